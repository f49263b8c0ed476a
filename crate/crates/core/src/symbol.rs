//! Sampled symbols on the real line.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsl::{evaluate, Bindings, SymbolExpr};
use crate::error::{Error, Result};
use crate::grid::CircleGrid;

pub const DEFAULT_INVERTIBILITY_FLOOR: f64 = 1e-8;

const COARSE_ANGLES: usize = 720;
const ANGLE_TOL: f64 = 1e-10;

/// Sample points on the real line, optionally tied to a Cayley circle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGrid {
    points: Arc<[f64]>,
    circle: Option<CircleGrid>,
}

impl LineGrid {
    pub fn from_circle(circle: CircleGrid) -> Self {
        LineGrid {
            points: circle.line_points().into(),
            circle: Some(circle),
        }
    }

    /// Arbitrary points; reflection requires them to pair up as `x_{n-1-j} = -x_j`.
    pub fn custom(points: Vec<f64>) -> Self {
        LineGrid {
            points: points.into(),
            circle: None,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn circle(&self) -> Option<CircleGrid> {
        self.circle
    }

    pub fn is_symmetric(&self) -> bool {
        if self.circle.is_some() {
            return true;
        }
        let n = self.points.len();
        (0..n).all(|j| self.points[n - 1 - j] == -self.points[j])
    }
}

/// Identity of a sampled symbol.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolMeta {
    pub label: String,
    pub bindings: Bindings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSamples {
    grid: LineGrid,
    values: Vec<Complex64>,
    pub meta: SymbolMeta,
}

impl LineSamples {
    pub fn new(grid: LineGrid, values: Vec<Complex64>, meta: SymbolMeta) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteSample(j));
        }
        Ok(LineSamples { grid, values, meta })
    }

    pub fn from_expr(expr: &SymbolExpr, bindings: &Bindings, circle: CircleGrid) -> Result<Self> {
        let grid = LineGrid::from_circle(circle);
        let values = evaluate(expr, grid.points(), bindings)?;
        let meta = SymbolMeta {
            label: expr.canonical(),
            bindings: bindings.clone(),
        };
        LineSamples::new(grid, values, meta)
    }

    pub fn from_fn(circle: CircleGrid, label: &str, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let grid = LineGrid::from_circle(circle);
        let values = grid.points().iter().map(|&x| f(x)).collect();
        let meta = SymbolMeta {
            label: label.to_string(),
            bindings: Bindings::new(),
        };
        LineSamples::new(grid, values, meta)
    }

    pub fn grid(&self) -> &LineGrid {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map on the same grid.
    pub fn map(&self, label: &str, f: impl Fn(Complex64) -> Complex64) -> Result<LineSamples> {
        let meta = SymbolMeta {
            label: label.to_string(),
            bindings: self.meta.bindings.clone(),
        };
        LineSamples::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect(), meta)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }
}

pub fn sup_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `f(-x)`, as an index permutation.
pub fn reflect(f: &LineSamples) -> Result<LineSamples> {
    if !f.grid.is_symmetric() {
        return Err(Error::AsymmetricGrid);
    }
    let values = f.values.iter().rev().copied().collect();
    Ok(LineSamples {
        grid: f.grid.clone(),
        values,
        meta: SymbolMeta {
            label: format!("reflect[{}]", f.meta.label),
            bindings: f.meta.bindings.clone(),
        },
    })
}

/// `ψ(x) = φ(x)/φ(-x)`.
pub fn test_symbol(phi: &LineSamples, floor: f64) -> Result<LineSamples> {
    let min = invertibility_floor(phi);
    if !(min >= floor) {
        return Err(Error::NotInvertible { min, floor });
    }
    let reflected = reflect(phi)?;
    let values = phi
        .values
        .iter()
        .zip(&reflected.values)
        .map(|(a, b)| a / b)
        .collect();
    LineSamples::new(
        phi.grid.clone(),
        values,
        SymbolMeta {
            label: format!("test_symbol[{}]", phi.meta.label),
            bindings: phi.meta.bindings.clone(),
        },
    )
}

/// Maximal deviation of `|f|` from one, and whether it is within `tol`.
pub fn is_unitary(f: &LineSamples, tol: f64) -> (bool, f64) {
    let deviation = f
        .values
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    (deviation <= tol, deviation)
}

/// `min |f|` over the grid.
pub fn invertibility_floor(f: &LineSamples) -> f64 {
    f.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
}

pub fn essential_range(f: &LineSamples) -> Vec<Complex64> {
    f.values.clone()
}

/// Rotation `c` and margin `epsilon` with `Re(c f) >= epsilon` on all samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorialWitness {
    pub c: Complex64,
    pub epsilon: f64,
}

impl SectorialWitness {
    /// Re-checks the witness against `values`.
    pub fn holds_for(&self, values: &[Complex64]) -> bool {
        (self.c.norm() - 1.0).abs() <= 1e-12 && self.epsilon > 0.0 && margin(self.c, values) >= self.epsilon
    }
}

/// `min_j Re(c v_j)`.
pub fn margin(c: Complex64, values: &[Complex64]) -> f64 {
    values
        .iter()
        .map(|v| c.re * v.re - c.im * v.im)
        .fold(f64::INFINITY, f64::min)
}

/// Searches the rotation maximizing the sectorial margin of a point cloud.
///
/// Returns `None` when no open half-plane through the origin contains every
/// value. The search runs over the convex hull of the cloud: 720 coarse
/// angles followed by golden-section refinement to 1e-10 rad.
pub fn detect_sectorial(values: &[Complex64]) -> Option<SectorialWitness> {
    let hull = convex_hull(values);
    if hull.is_empty() || (hull.len() >= 3 && contains_origin(&hull)) {
        return None;
    }
    let eps = |theta: f64| margin_with_cutoff(Complex64::from_polar(1.0, theta), &hull, f64::NEG_INFINITY);

    // best-first: the direction opposite the mean is usually close to optimal
    let mean: Complex64 = hull.iter().sum::<Complex64>() / hull.len() as f64;
    let step = 2.0 * PI / COARSE_ANGLES as f64;
    let mut best_theta = 0.0;
    let mut best = f64::NEG_INFINITY;
    if mean.norm() > 0.0 {
        best_theta = -mean.arg();
        best = eps(best_theta);
    }
    for k in 0..COARSE_ANGLES {
        let theta = k as f64 * step;
        let e = margin_with_cutoff(Complex64::from_polar(1.0, theta), &hull, best);
        if e > best {
            best = e;
            best_theta = theta;
        }
    }

    let (mut lo, mut hi) = (best_theta - step, best_theta + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (eps(a), eps(b));
    while hi - lo > ANGLE_TOL {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = eps(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = eps(a);
        }
    }
    let refined = 0.5 * (lo + hi);
    let theta = if eps(refined) >= best { refined } else { best_theta };
    let c = Complex64::from_polar(1.0, theta);
    let epsilon = margin(c, values);
    (epsilon > 0.0).then_some(SectorialWitness { c, epsilon })
}

fn margin_with_cutoff(c: Complex64, points: &[Complex64], cutoff: f64) -> f64 {
    let mut m = f64::INFINITY;
    for v in points {
        let r = c.re * v.re - c.im * v.im;
        if r < m {
            m = r;
            if m < cutoff {
                break;
            }
        }
    }
    m
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Counter-clockwise hull vertices (monotone chain). Degenerate clouds give
/// one or two points.
pub(crate) fn convex_hull(values: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = values.to_vec();
    pts.sort_unstable_by(|a, b| match a.re.total_cmp(&b.re) {
        Ordering::Equal => a.im.total_cmp(&b.im),
        o => o,
    });
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

// Closed containment: the origin on an edge counts as inside.
fn contains_origin(hull: &[Complex64]) -> bool {
    let o = Complex64::new(0.0, 0.0);
    (0..hull.len()).all(|k| cross(hull[k], hull[(k + 1) % hull.len()], o) >= 0.0)
}
