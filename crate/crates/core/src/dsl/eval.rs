use num_complex::Complex64;

use super::{BinOp, Bindings, Func, Node, SymbolExpr};
use crate::error::{Error, Result};

const MAX_INTEGER_EXPONENT: f64 = i32::MAX as f64;

/// Evaluates `expr` at every point of `xs`.
pub fn evaluate(expr: &SymbolExpr, xs: &[f64], bindings: &Bindings) -> Result<Vec<Complex64>> {
    let bound = bind(expr.root(), bindings)?;
    xs.iter().map(|&x| eval_at(&bound, x)).collect()
}

fn bind(node: &Node, bindings: &Bindings) -> Result<Node> {
    Ok(match node {
        Node::Param(name) => Node::Const(
            *bindings
                .get(name)
                .ok_or_else(|| Error::UnboundParameter(name.clone()))?,
        ),
        Node::Neg(a) => Node::Neg(Box::new(bind(a, bindings)?)),
        Node::Call { func, arg } => Node::call(*func, bind(arg, bindings)?),
        Node::Binary { op, lhs, rhs } => Node::binary(*op, bind(lhs, bindings)?, bind(rhs, bindings)?),
        other => other.clone(),
    })
}

fn eval_at(node: &Node, x: f64) -> Result<Complex64> {
    let v = match node {
        Node::Const(c) => Complex64::new(*c, 0.0),
        Node::ImagUnit => Complex64::i(),
        Node::Var => Complex64::new(x, 0.0),
        Node::Param(name) => return Err(Error::UnboundParameter(name.clone())),
        Node::Neg(a) => -eval_at(a, x)?,
        Node::Binary { op, lhs, rhs } => {
            let a = eval_at(lhs, x)?;
            let b = eval_at(rhs, x)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == Complex64::new(0.0, 0.0) {
                        return Err(Error::DivisionByZero { x });
                    }
                    a / b
                }
                BinOp::Pow => power(a, b, x)?,
            }
        }
        Node::Call { func, arg } => {
            let a = eval_at(arg, x)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Abs => Complex64::new(a.norm(), 0.0),
                Func::Conj => a.conj(),
            }
        }
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            x,
            context: node.to_string(),
        })
    }
}

// Integer exponents and positive real bases are single valued; anything else
// would need a branch cut.
fn power(base: Complex64, exponent: Complex64, x: f64) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= MAX_INTEGER_EXPONENT {
        let n = exponent.re as i32;
        if n < 0 && base == zero {
            return Err(Error::DivisionByZero { x });
        }
        return Ok(base.powi(n));
    }
    if base.im == 0.0 && base.re > 0.0 {
        return Ok((exponent * base.re.ln()).exp());
    }
    if base == zero && exponent.im == 0.0 && exponent.re > 0.0 {
        return Ok(zero);
    }
    Err(Error::Domain {
        x,
        base: base.to_string(),
        exponent: exponent.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use proptest::prelude::*;

    fn bindings(pairs: &[(&str, f64)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn closing_example_at_origin() {
        let e = parse("(2+sin(x))*exp(i*a*x)").unwrap();
        let v = evaluate(&e, &[0.0], &bindings(&[("a", 0.7)])).unwrap();
        assert_eq!(v, vec![Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let e = parse("i*i").unwrap();
        for v in evaluate(&e, &[-3.0, 0.0, 1.5, 1e6], &Bindings::new()).unwrap() {
            assert_eq!(v, Complex64::new(-1.0, 0.0));
        }
    }

    #[test]
    fn closing_example_matches_closed_form() {
        let e = parse("(2+sin(x))*exp(i*a*x)").unwrap();
        let xs: Vec<f64> = (0..16).map(|j| -7.5 + j as f64).collect();
        let got = evaluate(&e, &xs, &bindings(&[("a", 0.5)])).unwrap();
        for (x, g) in xs.iter().zip(got) {
            let want = Complex64::new((2.0 + x.sin()) * (0.5 * x).cos(), (2.0 + x.sin()) * (0.5 * x).sin());
            assert!((g - want).norm() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let e = parse("exp(i*a*x)*b").unwrap();
        assert_eq!(
            evaluate(&e, &[0.0], &bindings(&[("a", 1.0)])),
            Err(Error::UnboundParameter("b".into()))
        );
    }

    #[test]
    fn division_by_zero() {
        let e = parse("1/x").unwrap();
        assert_eq!(evaluate(&e, &[1.0, 0.0], &Bindings::new()), Err(Error::DivisionByZero { x: 0.0 }));
        let e = parse("x^-2").unwrap();
        assert_eq!(evaluate(&e, &[0.0], &Bindings::new()), Err(Error::DivisionByZero { x: 0.0 }));
    }

    #[test]
    fn overflow_is_non_finite() {
        let e = parse("exp(x)").unwrap();
        assert!(matches!(
            evaluate(&e, &[1000.0], &Bindings::new()),
            Err(Error::NonFinite { .. })
        ));
        let e = parse("x*a").unwrap();
        assert!(matches!(
            evaluate(&e, &[1.0], &bindings(&[("a", f64::NAN)])),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn powers() {
        let e = parse("x^3 + 2^x - x^0.5").unwrap();
        let v = evaluate(&e, &[4.0], &Bindings::new()).unwrap()[0];
        assert!((v - Complex64::new(64.0 + 16.0 - 2.0, 0.0)).norm() < 1e-12);
        let e = parse("(i*x)^2").unwrap();
        assert_eq!(evaluate(&e, &[3.0], &Bindings::new()).unwrap()[0], Complex64::new(-9.0, 0.0));
        let e = parse("x^0.5").unwrap();
        assert!(matches!(evaluate(&e, &[-1.0], &Bindings::new()), Err(Error::Domain { .. })));
        assert_eq!(evaluate(&e, &[0.0], &Bindings::new()).unwrap()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn functions() {
        let e = parse("abs(3+4*i) + conj(i) + cos(0)").unwrap();
        assert_eq!(evaluate(&e, &[0.0], &Bindings::new()).unwrap()[0], Complex64::new(6.0, -1.0));
    }

    proptest! {
        #[test]
        fn evaluation_is_pointwise(xs in proptest::collection::vec(-50.0f64..50.0, 1..40), seed in any::<u64>()) {
            let e = parse("(2+sin(x))*exp(i*a*x) + x^2/(1+x^2)").unwrap();
            let b = bindings(&[("a", 0.3)]);
            let before = evaluate(&e, &xs, &b).unwrap();
            let mut perm: Vec<usize> = (0..xs.len()).collect();
            let n = perm.len();
            for k in (1..n).rev() {
                perm.swap(k, (seed.rotate_left(k as u32) % (k as u64 + 1)) as usize);
            }
            let permuted: Vec<f64> = perm.iter().map(|&j| xs[j]).collect();
            let after = evaluate(&e, &permuted, &b).unwrap();
            for (k, &j) in perm.iter().enumerate() {
                prop_assert_eq!(after[k], before[j]);
            }
        }
    }
}
