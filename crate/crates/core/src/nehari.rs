//! Distances to analytic classes via finite Hankel sections.
//!
//! `dist(g, H∞₊)` is the norm of the Hankel operator built from the negative
//! coefficients of `g`; `dist(g, C + H∞₊)` is its essential norm, estimated
//! by the tail singular value `s_k` with `k = ⌈k_frac N⌉`. Minus-side
//! quantities are the plus-side ones of `conj(g)`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{fourier_coefficients, CircleSamples, FourierSeries, Side};
use crate::symbol::{detect_sectorial, SectorialWitness};

/// Values at or above `1 - AT_ONE_TOL` count as distance one.
pub const AT_ONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HankelTruncation {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl HankelTruncation {
    /// `A[j][k] = ĝ(-(j+k+1))`, `0 <= j, k < n`.
    pub fn new(g: &FourierSeries, n: usize) -> Result<Self> {
        check_budget(g, n)?;
        let anti: Vec<Complex64> = (0..2 * n - 1).map(|s| g.coeff(-(s as i64) - 1)).collect();
        let matrix = DMatrix::from_fn(n, n, |j, k| anti[j + k]);
        Ok(HankelTruncation { n, matrix })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.matrix.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

fn check_budget(g: &FourierSeries, n: usize) -> Result<()> {
    let available = (-g.min_index()) as usize;
    let needed = (2 * n).saturating_sub(1);
    if n == 0 || needed > available {
        return Err(Error::Budget {
            n,
            m: g.grid().len(),
            needed,
            available,
        });
    }
    Ok(())
}

/// Largest singular value of the `n × n` Hankel section.
pub fn hankel_norm(g: &FourierSeries, n: usize) -> Result<f64> {
    Ok(HankelTruncation::new(g, n)?.singular_values()[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceClass {
    HinfPlus,
    HinfMinus,
    CplusHinfPlus,
    CplusHinfMinus,
}

impl DistanceClass {
    pub fn new(side: Side, essential: bool) -> Self {
        match (side, essential) {
            (Side::Plus, false) => DistanceClass::HinfPlus,
            (Side::Minus, false) => DistanceClass::HinfMinus,
            (Side::Plus, true) => DistanceClass::CplusHinfPlus,
            (Side::Minus, true) => DistanceClass::CplusHinfMinus,
        }
    }

    pub fn side(self) -> Side {
        match self {
            DistanceClass::HinfPlus | DistanceClass::CplusHinfPlus => Side::Plus,
            DistanceClass::HinfMinus | DistanceClass::CplusHinfMinus => Side::Minus,
        }
    }

    pub fn is_essential(self) -> bool {
        matches!(self, DistanceClass::CplusHinfPlus | DistanceClass::CplusHinfMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceClass::HinfPlus => "hinf_plus",
            DistanceClass::HinfMinus => "hinf_minus",
            DistanceClass::CplusHinfPlus => "c_plus_hinf_plus",
            DistanceClass::CplusHinfMinus => "c_plus_hinf_minus",
        }
    }
}

impl fmt::Display for DistanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DistanceVerdict {
    BelowOne,
    AtOrAboveOne,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub class: DistanceClass,
    pub lower_bounds: Vec<Bound>,
    pub verdict: DistanceVerdict,
    pub margin: f64,
    /// Set for `C + H∞` targets: `s_k` of a section estimates the essential
    /// norm but is not a certified lower bound.
    pub essential_estimate: bool,
    pub grid_size: usize,
}

impl DistanceEstimate {
    fn from_bounds(class: DistanceClass, lower_bounds: Vec<Bound>, margin: f64, grid_size: usize) -> Self {
        let verdict = verdict_for(&lower_bounds, margin);
        DistanceEstimate {
            class,
            lower_bounds,
            verdict,
            margin,
            essential_estimate: class.is_essential(),
            grid_size,
        }
    }

    pub fn final_value(&self) -> Option<f64> {
        self.lower_bounds.last().map(|b| b.value)
    }

    pub fn value_at(&self, n: usize) -> Option<f64> {
        self.lower_bounds.iter().find(|b| b.n == n).map(|b| b.value)
    }
}

/// Relative growth over the last doubling, `max(v_last - v_prev, 0) / max(v_last, δ)`.
pub fn relative_increment(bounds: &[Bound], margin: f64) -> Option<f64> {
    match bounds {
        [.., prev, last] => Some((last.value - prev.value).max(0.0) / last.value.max(margin)),
        _ => None,
    }
}

fn converged(bounds: &[Bound], margin: f64) -> bool {
    relative_increment(bounds, margin).is_some_and(|inc| inc <= margin / 4.0)
}

// Early stop only once the verdict is settled: converged below `1 - δ`, or at one.
fn settled(bounds: &[Bound], margin: f64) -> bool {
    match bounds.last() {
        Some(last) if last.value >= 1.0 - AT_ONE_TOL => true,
        Some(last) => last.value <= 1.0 - margin && converged(bounds, margin),
        None => false,
    }
}

/// `BELOW_ONE` needs a final value `<= 1 - δ` that has stopped growing
/// (relative increment `<= δ/4`); one or more counts as `AT_OR_ABOVE_ONE`.
pub fn verdict_for(bounds: &[Bound], margin: f64) -> DistanceVerdict {
    let Some(last) = bounds.last() else {
        return DistanceVerdict::Inconclusive;
    };
    if last.value >= 1.0 - AT_ONE_TOL {
        DistanceVerdict::AtOrAboveOne
    } else if last.value <= 1.0 - margin && converged(bounds, margin) {
        DistanceVerdict::BelowOne
    } else {
        DistanceVerdict::Inconclusive
    }
}

fn check_schedule(g: &FourierSeries, schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    schedule.iter().try_for_each(|&n| check_budget(g, n))
}

fn tail_index(n: usize, k_frac: f64) -> usize {
    ((k_frac * n as f64).ceil() as usize).min(n - 1)
}

fn oriented(g: &FourierSeries, side: Side) -> std::borrow::Cow<'_, FourierSeries> {
    match side {
        Side::Plus => std::borrow::Cow::Borrowed(g),
        Side::Minus => std::borrow::Cow::Owned(g.conj()),
    }
}

/// Nehari lower bounds for `dist(g, H∞±)` along `schedule`. The schedule
/// stops early once the bounds have converged below `1 - δ` (relative
/// increment at most `δ/4`) or reached one.
pub fn dist_to_hinf(g: &FourierSeries, side: Side, schedule: &[usize], margin: f64) -> Result<DistanceEstimate> {
    check_schedule(g, schedule)?;
    let src = oriented(g, side);
    let mut bounds = Vec::new();
    for &n in schedule {
        bounds.push(Bound {
            n,
            value: hankel_norm(&src, n)?,
        });
        if settled(&bounds, margin) {
            break;
        }
    }
    Ok(DistanceEstimate::from_bounds(
        DistanceClass::new(side, false),
        bounds,
        margin,
        g.grid().len(),
    ))
}

/// Essential-norm estimates `s_k` for `dist(g, C + H∞±)`.
pub fn dist_to_cplus_hinf(
    g: &FourierSeries,
    side: Side,
    schedule: &[usize],
    k_frac: f64,
    margin: f64,
) -> Result<DistanceEstimate> {
    check_schedule(g, schedule)?;
    check_k_frac(k_frac)?;
    let src = oriented(g, side);
    let mut bounds = Vec::new();
    for &n in schedule {
        let s = HankelTruncation::new(&src, n)?.singular_values();
        bounds.push(Bound {
            n,
            value: s[tail_index(n, k_frac)],
        });
        if settled(&bounds, margin) {
            break;
        }
    }
    Ok(DistanceEstimate::from_bounds(
        DistanceClass::new(side, true),
        bounds,
        margin,
        g.grid().len(),
    ))
}

fn check_k_frac(k_frac: f64) -> Result<()> {
    if !(k_frac > 0.0 && k_frac < 1.0) {
        return Err(Error::Degenerate(format!("k_frac = {k_frac} outside (0, 1)")));
    }
    Ok(())
}

/// Both estimates for one side from a single SVD per section size. The
/// schedule continues until both have converged.
pub fn side_estimates(
    g: &FourierSeries,
    side: Side,
    schedule: &[usize],
    k_frac: f64,
    margin: f64,
) -> Result<(DistanceEstimate, DistanceEstimate)> {
    check_schedule(g, schedule)?;
    check_k_frac(k_frac)?;
    let src = oriented(g, side);
    let (mut norm, mut tail) = (Vec::new(), Vec::new());
    for &n in schedule {
        let s = HankelTruncation::new(&src, n)?.singular_values();
        norm.push(Bound { n, value: s[0] });
        tail.push(Bound {
            n,
            value: s[tail_index(n, k_frac)],
        });
        if settled(&norm, margin) && settled(&tail, margin) {
            break;
        }
    }
    let m = g.grid().len();
    Ok((
        DistanceEstimate::from_bounds(DistanceClass::new(side, false), norm, margin, m),
        DistanceEstimate::from_bounds(DistanceClass::new(side, true), tail, margin, m),
    ))
}

/// Analytic approximant `f` of `g` with a-posteriori error `max |g - f|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    pub f: CircleSamples,
    pub err: f64,
    /// Top singular value of the section that produced `f`.
    pub sigma: f64,
    pub n: usize,
    /// `f ∈ z̄^shift H∞₊`.
    pub shift: usize,
}

/// Schmidt-pair approximant: with `ξ` the polynomial carrying the top right
/// singular vector, `f = g - P₋(gξ)/ξ`.
pub fn aak_approximant(g: &FourierSeries, n: usize) -> Result<Approximant> {
    let samples = g.to_samples();
    aak_from_parts(g, &samples, n)
}

fn aak_from_parts(g: &FourierSeries, samples: &CircleSamples, n: usize) -> Result<Approximant> {
    let hankel = HankelTruncation::new(g, n)?;
    let scale = samples.sup_norm().max(1.0);
    let svd = hankel.matrix.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Degenerate("SVD returned no right singular vectors".into()))?;
    let (top, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Degenerate("empty section".into()))?;
    if !sigma.is_finite() {
        return Err(Error::Degenerate("non-finite singular value".into()));
    }
    if sigma <= 1e-14 * scale {
        return Ok(Approximant {
            f: samples.clone(),
            err: 0.0,
            sigma,
            n,
            shift: 0,
        });
    }
    let grid = g.grid();
    let xi_series = FourierSeries::from_fn(grid, |k| {
        if (0..n as i64).contains(&k) {
            v_t[(top, k as usize)].conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let xi = xi_series.to_samples();
    if xi.min_modulus() <= 1e-12 {
        return Err(Error::Degenerate("Schmidt vector vanishes on the grid".into()));
    }
    let product = fourier_coefficients(&samples.mul(&xi)?);
    let minus_part = FourierSeries::from_fn(grid, |k| if k < 0 { product.coeff(k) } else { Complex64::new(0.0, 0.0) })
        .to_samples();
    let correction = minus_part.div(&xi)?;
    let f = samples.zip_with(&correction, |a, b| a - b)?;
    let err = correction.sup_norm();
    Ok(Approximant {
        f,
        err,
        sigma,
        n,
        shift: 0,
    })
}

/// Approximant from `z̄^K H∞₊ ⊂ C + H∞₊`: `z̄^K · aak(z^K g)`.
pub fn shifted_approximant(g: &CircleSamples, n: usize, shift: usize) -> Result<Approximant> {
    let lifted = g.shifted(shift as i64);
    let series = fourier_coefficients(&lifted);
    let inner = aak_from_parts(&series, &lifted, n)?;
    let f = inner.f.shifted(-(shift as i64));
    let err = g.max_abs_diff(&f);
    Ok(Approximant {
        f,
        err,
        sigma: inner.sigma,
        n,
        shift,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorialCertificate {
    pub s: CircleSamples,
    pub f: CircleSamples,
    pub witness: SectorialWitness,
    /// `(1 - d²) / (2 max|f|²)` with `d = max|u - f|`.
    pub bound: f64,
    pub distance: f64,
    pub reconstruction_error: f64,
}

/// Splits a unimodular `u` within distance `< 1` of `f` as `u = s f` with
/// `s = u conj(f) / |f|²` sectorial.
pub fn sectorial_certificate(u: &CircleSamples, f: &CircleSamples) -> Result<SectorialCertificate> {
    let deviation = u.values().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    if deviation > 1e-7 {
        return Err(Error::NotUnitary { deviation, tol: 1e-7 });
    }
    let distance = u.max_abs_diff(f);
    if !(distance < 1.0) {
        return Err(Error::DistanceHypothesis(distance));
    }
    let s = u.zip_with(f, |a, b| a * b.conj() / b.norm_sqr())?;
    let fmax = f.sup_norm();
    let bound = (1.0 - distance * distance) / (2.0 * fmax * fmax);
    let min_re = s.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    if min_re < bound * (1.0 - 1e-6) {
        return Err(Error::Degenerate(format!(
            "sectorial margin {min_re:e} below the guaranteed {bound:e}"
        )));
    }
    let witness = detect_sectorial(s.values())
        .ok_or_else(|| Error::Degenerate("quotient is not sectorial on the grid".into()))?;
    let reconstruction_error = s.mul(f)?.max_abs_diff(u);
    Ok(SectorialCertificate {
        s,
        f: f.clone(),
        witness,
        bound,
        distance,
        reconstruction_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;
    use crate::hardy::cayley_pullback;
    use crate::symbol::LineSamples;

    fn grid(m: usize) -> CircleGrid {
        CircleGrid::new(m).unwrap()
    }

    fn series(m: usize, f: impl Fn(Complex64) -> Complex64) -> FourierSeries {
        fourier_coefficients(&CircleSamples::from_fn(grid(m), f).unwrap())
    }

    fn line_series(m: usize, f: impl Fn(f64) -> Complex64) -> FourierSeries {
        fourier_coefficients(&cayley_pullback(&LineSamples::from_fn(grid(m), "f", f).unwrap()).unwrap())
    }

    #[test]
    fn hankel_structure() {
        let g = series(64, |z| z.conj() + 2.0 * z.conj().powi(3) + z);
        let h = HankelTruncation::new(&g, 4).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(h.matrix()[(j, k)], g.coeff(-((j + k + 1) as i64)));
            }
        }
        assert!((h.matrix()[(0, 2)] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn conjugate_z_has_unit_norm() {
        let g = series(64, |z| z.conj());
        for n in [1, 2, 8, 16] {
            assert!((hankel_norm(&g, n).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn analytic_symbol_has_zero_norm() {
        let g = series(128, |z| (z * 0.5).exp() + z.powi(4));
        assert!(hankel_norm(&g, 16).unwrap() < 1e-14);
    }

    #[test]
    fn budget_is_enforced() {
        let g = series(64, |z| z);
        assert!(hankel_norm(&g, 16).is_ok());
        assert!(matches!(hankel_norm(&g, 17), Err(Error::Budget { .. })));
        assert!(matches!(hankel_norm(&g, 0), Err(Error::Budget { .. })));
        assert!(matches!(dist_to_hinf(&g, Side::Plus, &[], 0.05), Err(Error::EmptySchedule)));
    }

    #[test]
    fn conjugate_singular_inner_norms_climb_to_one() {
        // e^{-2iαx}, α = 0.5 on the circle: exp((1+z)/(1-z)) conjugated
        let g = line_series(4096, |x| Complex64::from_polar(1.0, -x));
        let norms: Vec<f64> = [64, 128, 256, 512].iter().map(|&n| hankel_norm(&g, n).unwrap()).collect();
        assert!(norms.windows(2).all(|w| w[1] >= w[0] - 1e-10), "{norms:?}");
        assert!(norms[0] > 0.99 && norms[3] <= 1.0 + 1e-10, "{norms:?}");
    }

    #[test]
    fn verdict_rules() {
        let b = |v: &[(usize, f64)]| v.iter().map(|&(n, value)| Bound { n, value }).collect::<Vec<_>>();
        assert_eq!(verdict_for(&b(&[(64, 0.0), (128, 0.0)]), 0.05), DistanceVerdict::BelowOne);
        assert_eq!(verdict_for(&b(&[(64, 0.0)]), 0.05), DistanceVerdict::Inconclusive);
        assert_eq!(verdict_for(&b(&[(64, 1.0)]), 0.05), DistanceVerdict::AtOrAboveOne);
        assert_eq!(verdict_for(&b(&[(64, 0.5), (128, 0.9)]), 0.05), DistanceVerdict::Inconclusive);
        assert_eq!(verdict_for(&b(&[(64, 0.9), (128, 0.96)]), 0.05), DistanceVerdict::Inconclusive);
        assert_eq!(verdict_for(&[], 0.05), DistanceVerdict::Inconclusive);
    }

    #[test]
    fn distance_of_constant_and_conjugate_z() {
        let one = series(4096, |_| 1.0.into());
        let e = dist_to_hinf(&one, Side::Plus, &[64, 128, 256, 512], 0.05).unwrap();
        assert_eq!(e.verdict, DistanceVerdict::BelowOne);
        assert!(e.lower_bounds.iter().all(|b| b.value < 1e-14));
        assert_eq!(e.lower_bounds.len(), 2);
        let zbar = series(4096, |z| z.conj());
        let e = dist_to_hinf(&zbar, Side::Plus, &[64, 128, 256, 512], 0.05).unwrap();
        assert_eq!(e.verdict, DistanceVerdict::AtOrAboveOne);
        assert!(e.lower_bounds.iter().all(|b| (b.value - 1.0).abs() < 1e-13));
        let other = dist_to_hinf(&zbar, Side::Minus, &[64, 128], 0.05).unwrap();
        assert_eq!(other.verdict, DistanceVerdict::BelowOne);
    }

    #[test]
    fn minus_side_is_plus_side_of_conjugate() {
        let g = series(1024, |z| z.conj() * 0.3 + (z * 0.9).exp() + 0.2 / (1.5 - z.conj()));
        let minus = dist_to_hinf(&g, Side::Minus, &[16, 32, 64], 0.05).unwrap();
        let plus = dist_to_hinf(&g.conj(), Side::Plus, &[16, 32, 64], 0.05).unwrap();
        assert_eq!(minus.lower_bounds, plus.lower_bounds);
        assert_eq!(minus.verdict, plus.verdict);
    }

    #[test]
    fn finite_rank_essential_estimate_vanishes() {
        let g = series(1024, |z| z.conj().powi(3) * 0.4 + z.conj() * 0.2 + z);
        let e = dist_to_cplus_hinf(&g, Side::Plus, &[32, 64, 128], 0.1, 0.05).unwrap();
        assert!(e.essential_estimate);
        assert!(e.lower_bounds.iter().all(|b| b.value < 1e-13));
        assert_eq!(e.verdict, DistanceVerdict::BelowOne);
        let zbar = series(1024, |z| z.conj());
        let e = dist_to_cplus_hinf(&zbar, Side::Plus, &[32, 64], 0.1, 0.05).unwrap();
        assert!(e.lower_bounds.iter().all(|b| b.value < 1e-13));
    }

    #[test]
    fn essential_estimate_of_conjugate_singular_inner() {
        // decays on the 4096 grid: aliasing near z = 1 makes the far
        // coefficients of exp((1+z)/(1-z)) unresolved
        let g = line_series(4096, |x| Complex64::from_polar(1.0, -x));
        let e = dist_to_cplus_hinf(&g, Side::Plus, &[128, 256, 512, 1024], 0.1, 0.05).unwrap();
        assert!(e.lower_bounds.iter().all(|b| b.value < 0.5), "{:?}", e.lower_bounds);
        assert_ne!(e.verdict, DistanceVerdict::AtOrAboveOne);
    }

    #[test]
    fn side_estimates_match_separate_runs() {
        let g = series(1024, |z| z.conj() * 0.3 + 0.5 * z.conj().powi(2) / (2.0 - z.conj()));
        let (a, b) = side_estimates(&g, Side::Minus, &[16, 32, 64], 0.1, 0.05).unwrap();
        let a2 = dist_to_hinf(&g, Side::Minus, &[16, 32, 64], 0.05).unwrap();
        for (x, y) in a.lower_bounds.iter().zip(&a2.lower_bounds) {
            assert_eq!(x, y);
        }
        assert!(b.essential_estimate && !a.essential_estimate);
    }

    #[test]
    fn aak_of_analytic_symbol_is_identity() {
        let g = series(256, |z| (z * 0.4).exp());
        let a = aak_approximant(&g, 16).unwrap();
        assert_eq!(a.err, 0.0);
        assert!(a.f.max_abs_diff(&g.to_samples()) < 1e-15);
    }

    /// Best sup-norm error of `z̄ + z - p` over real polynomials of degree at
    /// most two, by exhaustive search on a coefficient lattice.
    fn brute_force_zbar_plus_z() -> (f64, [f64; 3]) {
        let nodes = grid(128).nodes();
        let steps: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.1).collect();
        let mut best = (f64::INFINITY, [0.0; 3]);
        for &a0 in &steps {
            for &a1 in &steps {
                for &a2 in &steps {
                    let err = nodes
                        .iter()
                        .map(|z| (z.conj() + z - a0 - a1 * z - a2 * z * z).norm())
                        .fold(0.0, f64::max);
                    if err < best.0 - 1e-12 {
                        best = (err, [a0, a1, a2]);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn aak_of_zbar_plus_z() {
        let (oracle_err, coeffs) = brute_force_zbar_plus_z();
        assert!((oracle_err - 1.0).abs() < 1e-12);
        assert_eq!(coeffs, [0.0, 1.0, 0.0]);

        let g = series(256, |z| z.conj() + z);
        let a = aak_approximant(&g, 8).unwrap();
        assert!((a.err - oracle_err).abs() < 1e-12);
        let want = CircleSamples::from_fn(grid(256), |z| z).unwrap();
        assert!(a.f.max_abs_diff(&want) < 1e-12);
        assert!(a.err >= hankel_norm(&g, 8).unwrap() - 1e-8);
    }

    #[test]
    fn aak_dominates_hankel_norm() {
        let g = series(1024, |z| 0.4 * z.conj() / (1.0 - 0.5 * z.conj()) + 0.9 * z + 0.1);
        for n in [32, 64] {
            let a = aak_approximant(&g, n).unwrap();
            let lower = hankel_norm(&g, n).unwrap();
            assert!(a.err >= lower - 1e-8, "n = {n}");
            // rank-one Hankel: the approximant is exact, err equals the norm
            assert!((a.err - 0.4 / (1.0 - 0.25)).abs() < 1e-6, "{}", a.err);
            assert!(fourier_coefficients(&a.f).wrong_side_energy(Side::Plus, 0, 512) < 1e-6);
        }
    }

    #[test]
    fn shifted_approximant_stays_in_shifted_class() {
        let g = CircleSamples::from_fn(grid(1024), |z| z.conj().powi(2) + 0.3 * z.conj().powi(3) + z).unwrap();
        let a = shifted_approximant(&g, 32, 2).unwrap();
        assert!(fourier_coefficients(&a.f).wrong_side_energy(Side::Plus, 2, 512) < 1e-20);
        assert!((a.err - 0.3).abs() < 1e-10, "{}", a.err);
    }

    #[test]
    fn sectorial_certificate_trivial_cases() {
        let g = grid(64);
        let one = CircleSamples::constant(g, 1.0.into());
        let c = sectorial_certificate(&one, &one).unwrap();
        assert!(c.s.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let half = CircleSamples::constant(g, 0.5.into());
        let c = sectorial_certificate(&one, &half).unwrap();
        assert!(c.s.values().iter().all(|v| (v - 2.0).norm() < 1e-15));
        assert!((c.witness.c - 1.0).norm() < 1e-6);
        assert!(c.reconstruction_error <= 1e-15);
    }

    #[test]
    fn sectorial_certificate_needs_distance_below_one() {
        let g = grid(64);
        let u = CircleSamples::from_fn(g, |z| z).unwrap();
        let zero = CircleSamples::constant(g, 0.0.into());
        assert!(matches!(sectorial_certificate(&u, &zero), Err(Error::DistanceHypothesis(_))));
        let two = CircleSamples::constant(g, 2.0.into());
        assert!(matches!(sectorial_certificate(&two, &two), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn sectorial_certificate_from_approximant() {
        // u = z̄ (z - a)/(1 - a z) is unimodular with dist(u, H∞₊) = a
        let g = grid(1024);
        let u = CircleSamples::from_fn(g, |z| z.conj() * (z - 0.5) / (1.0 - 0.5 * z)).unwrap();
        let mu = u.values().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(mu < 1e-12);
        let a = aak_approximant(&fourier_coefficients(&u), 32).unwrap();
        assert!((a.err - 0.5).abs() < 1e-12);
        let c = sectorial_certificate(&u, &a.f).unwrap();
        assert!(c.reconstruction_error <= 1e-9);
        assert!(c.witness.holds_for(c.s.values()));
        assert!(c.s.values().iter().all(|v| v.re >= c.bound * (1.0 - 1e-6)));
    }

    #[test]
    fn random_symbols_have_monotone_bounded_norms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let c: Vec<Complex64> = (0..21).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let s = CircleSamples::from_fn(grid(512), |z| {
                c.iter().enumerate().map(|(k, a)| a * z.powi(k as i32 - 10)).sum()
            })
            .unwrap();
            let g = fourier_coefficients(&s);
            let sup = s.sup_norm();
            let norms: Vec<f64> = [1, 2, 4, 8, 16, 32].iter().map(|&n| hankel_norm(&g, n).unwrap()).collect();
            assert!(norms.windows(2).all(|w| w[1] >= w[0] - 1e-10));
            assert!(norms.iter().all(|&v| v <= sup + 1e-10));
        }
    }
}
