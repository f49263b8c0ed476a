//! Circle transplant, Fourier coefficients and outer factorization.
//!
//! Analytic-side bookkeeping follows `B(x) = (x - i)/(x + i)`: functions
//! bounded and analytic in the upper half-plane become functions with
//! vanishing negative Fourier coefficients on the circle.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dsl::{evaluate, Bindings, SymbolExpr};
use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::symbol::{LineSamples, DEFAULT_INVERTIBILITY_FLOOR};

/// Analytic side: `Plus` is the upper half-plane / nonnegative frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleSamples {
    grid: CircleGrid,
    values: Vec<Complex64>,
}

impl CircleSamples {
    pub fn new(grid: CircleGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteSample(j));
        }
        Ok(CircleSamples { grid, values })
    }

    pub fn from_fn(grid: CircleGrid, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        CircleSamples::new(grid, values)
    }

    pub fn constant(grid: CircleGrid, c: Complex64) -> Self {
        CircleSamples {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        crate::symbol::sup_norm(&self.values)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<CircleSamples> {
        CircleSamples::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(
        &self,
        other: &CircleSamples,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<CircleSamples> {
        if self.grid != other.grid {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        CircleSamples::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn mul(&self, other: &CircleSamples) -> Result<CircleSamples> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn div(&self, other: &CircleSamples) -> Result<CircleSamples> {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn conj(&self) -> CircleSamples {
        CircleSamples {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn recip(&self) -> Result<CircleSamples> {
        self.map(|v| 1.0 / v)
    }

    /// Multiplication by `z^k`.
    pub fn shifted(&self, k: i64) -> CircleSamples {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, k as f64 * self.grid.theta(j)))
            .collect();
        CircleSamples {
            grid: self.grid,
            values,
        }
    }

    pub fn max_abs_diff(&self, other: &CircleSamples) -> f64 {
        if self.grid != other.grid {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Two-sided coefficients `ĝ(k)`, `k ∈ [-M/2, M/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    grid: CircleGrid,
    // index k + M/2
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn from_fn(grid: CircleGrid, f: impl Fn(i64) -> Complex64) -> Self {
        let half = (grid.len() / 2) as i64;
        FourierSeries {
            grid,
            coeffs: (-half..half).map(f).collect(),
        }
    }

    /// Coefficients listed from `k = -M/2` upward.
    pub fn from_vec(grid: CircleGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: coeffs.len(),
            });
        }
        Ok(FourierSeries { grid, coeffs })
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn min_index(&self) -> i64 {
        -((self.grid.len() / 2) as i64)
    }

    pub fn max_index(&self) -> i64 {
        (self.grid.len() / 2) as i64 - 1
    }

    /// `ĝ(k)`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k < self.min_index() || k > self.max_index() {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k - self.min_index()) as usize]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Coefficients of `conj(g)`: `conj(ĝ(-k))`.
    pub fn conj(&self) -> FourierSeries {
        let lo = self.min_index();
        let coeffs = (lo..=self.max_index())
            .map(|k| {
                if k == lo {
                    // ĝ(M/2) = -ĝ(-M/2) on the half-shifted grid
                    -self.coeff(lo).conj()
                } else {
                    self.coeff(-k).conj()
                }
            })
            .collect();
        FourierSeries {
            grid: self.grid,
            coeffs,
        }
    }

    /// Share of the total energy carried by coefficients on the wrong side of
    /// `side`, looking only at `|k| <= band`.
    ///
    /// With `shift = K`, plus-side membership means no coefficients below
    /// `-K` (an element of `z̄^K H∞₊`), and symmetrically for the minus side.
    pub fn wrong_side_energy(&self, side: Side, shift: usize, band: usize) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let band = band as i64;
        let k0 = shift as i64 + 1;
        let wrong: f64 = (k0..=band)
            .map(|k| match side {
                Side::Plus => self.coeff(-k),
                Side::Minus => self.coeff(k),
            })
            .map(|c| c.norm_sqr())
            .sum();
        wrong / total
    }

    pub fn to_samples(&self) -> CircleSamples {
        inverse_fourier(self)
    }
}

fn plan(m: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if forward {
        planner.plan_fft_forward(m)
    } else {
        planner.plan_fft_inverse(m)
    }
}

/// `ĝ(k) = (1/M) Σ_j g_j e^{-ikθ_j}` on the half-shifted grid.
pub fn fourier_coefficients(g: &CircleSamples) -> FourierSeries {
    let m = g.grid.len();
    let mut buf = g.values.clone();
    plan(m, true).process(&mut buf);
    let half = (m / 2) as i64;
    let scale = 1.0 / m as f64;
    let coeffs = (-half..half)
        .map(|k| {
            let phase = Complex64::from_polar(scale, -PI * k as f64 / m as f64);
            phase * buf[k.rem_euclid(m as i64) as usize]
        })
        .collect();
    FourierSeries { grid: g.grid, coeffs }
}

pub fn inverse_fourier(s: &FourierSeries) -> CircleSamples {
    let m = s.grid.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for k in s.min_index()..=s.max_index() {
        let phase = Complex64::from_polar(1.0, PI * k as f64 / m as f64);
        buf[k.rem_euclid(m as i64) as usize] = phase * s.coeff(k);
    }
    plan(m, false).process(&mut buf);
    CircleSamples {
        grid: s.grid,
        values: buf,
    }
}

/// `g(z_j) = f(x_j)`; a relabeling of the line samples.
pub fn cayley_pullback(f: &LineSamples) -> Result<CircleSamples> {
    let grid = f.grid().circle().ok_or(Error::NotCayleyGrid)?;
    CircleSamples::new(grid, f.values().to_vec())
}

pub fn cayley_pullback_expr(expr: &SymbolExpr, bindings: &Bindings, grid: CircleGrid) -> Result<CircleSamples> {
    let values = evaluate(expr, &grid.line_points(), bindings)?;
    CircleSamples::new(grid, values)
}

/// Harmonic conjugate of a real function, normalized to zero mean.
fn conjugate_real(grid: CircleGrid, u: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(m, true).process(&mut buf);
    // Multiplier -i sgn(k) with k taken in [-M/2, M/2). The half-shift phase
    // cancels between the forward and inverse transforms.
    let half = m / 2;
    for (idx, c) in buf.iter_mut().enumerate() {
        *c = if idx == 0 || idx == half {
            Complex64::new(0.0, 0.0)
        } else if idx < half {
            Complex64::new(c.im, -c.re)
        } else {
            Complex64::new(-c.im, c.re)
        };
    }
    plan(m, false).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Conjugate function of the real part of `u`.
pub fn conjugate_function(u: &CircleSamples) -> CircleSamples {
    let re: Vec<f64> = u.values.iter().map(|v| v.re).collect();
    let values = conjugate_real(u.grid, &re)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    CircleSamples { grid: u.grid, values }
}

/// Outer function with modulus `|g|`: `exp(L + i L̃)` with `L = log|g|`.
pub fn outer_factor(g: &CircleSamples) -> Result<CircleSamples> {
    outer_factor_with_floor(g, DEFAULT_INVERTIBILITY_FLOOR)
}

pub fn outer_factor_with_floor(g: &CircleSamples, floor: f64) -> Result<CircleSamples> {
    let min = g.min_modulus();
    if !(min >= floor) {
        return Err(Error::NotInvertible { min, floor });
    }
    let log_modulus: Vec<f64> = g.values.iter().map(|v| v.norm().ln()).collect();
    let conj = conjugate_real(g.grid, &log_modulus);
    let values = log_modulus
        .iter()
        .zip(&conj)
        .map(|(&l, &t)| Complex64::new(l, t).exp())
        .collect();
    CircleSamples::new(g.grid, values)
}

/// `u = g / outer_factor(g)`.
pub fn unimodular_part(g: &CircleSamples) -> Result<CircleSamples> {
    Ok(unimodular_outer(g, DEFAULT_INVERTIBILITY_FLOOR)?.0)
}

/// Both factors of `g = u h`.
pub fn unimodular_outer(g: &CircleSamples, floor: f64) -> Result<(CircleSamples, CircleSamples)> {
    let h = outer_factor_with_floor(g, floor)?;
    let u = g.div(&h)?;
    Ok((u, h))
}
