use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-shifted equispaced grid on the unit circle, `θ_j = 2π(j + 1/2)/M`.
///
/// The node `z = 1` (the image of `x = ∞` under the Cayley map) is never
/// sampled. The line points `x_j = i(1 + z_j)/(1 - z_j) = -cot(θ_j/2)` are
/// increasing in `j` and satisfy `x_{M-1-j} = -x_j` bit for bit, so
/// reflection `x ↦ -x` is the index map `j ↦ M-1-j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct CircleGrid {
    m: usize,
}

impl CircleGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(m));
        }
        Ok(CircleGrid { m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + 0.5) / self.m as f64
    }

    pub fn node(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.theta(j))
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.m).map(|j| self.node(j)).collect()
    }

    pub fn mirror(&self, j: usize) -> usize {
        self.m - 1 - j
    }

    /// Preimages of the nodes on the real line.
    pub fn line_points(&self) -> Vec<f64> {
        let half = self.m / 2;
        let mut xs = vec![0.0; self.m];
        for j in 0..half {
            let x = -1.0 / (0.5 * self.theta(j)).tan();
            xs[j] = x;
            xs[self.m - 1 - j] = -x;
        }
        xs
    }

    pub fn refined(&self) -> CircleGrid {
        CircleGrid { m: 2 * self.m }
    }

    /// Largest `n` whose Hankel section `ĝ(-1) .. ĝ(-(2n-1))` stays within the
    /// stored coefficient range.
    pub fn hankel_budget(&self) -> usize {
        self.m / 4
    }
}

impl TryFrom<usize> for CircleGrid {
    type Error = Error;

    fn try_from(m: usize) -> Result<Self> {
        CircleGrid::new(m)
    }
}

impl From<CircleGrid> for usize {
    fn from(g: CircleGrid) -> usize {
        g.m
    }
}

/// Cayley map `B(x) = (x - i)/(x + i)` from the real line to the unit circle.
pub fn cayley(x: f64) -> Complex64 {
    let i = Complex64::i();
    (x - i) / (x + i)
}

/// Inverse Cayley map `x(z) = i(1 + z)/(1 - z)`.
pub fn inverse_cayley(z: Complex64) -> Complex64 {
    Complex64::i() * (1.0 + z) / (1.0 - z)
}
