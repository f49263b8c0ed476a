//! Finite sections of Toeplitz and Hankel operators built from transplanted
//! Fourier coefficients. Used as a consistency check only.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{cayley_pullback, fourier_coefficients, FourierSeries};
use crate::symbol::{test_symbol, LineSamples};

pub const DEFAULT_KERNEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Toeplitz,
    Hankel,
    ToeplitzPlusHankel,
    ToeplitzMinusHankel,
}

impl SectionKind {
    pub fn name(self) -> &'static str {
        match self {
            SectionKind::Toeplitz => "toeplitz",
            SectionKind::Hankel => "hankel",
            SectionKind::ToeplitzPlusHankel => "toeplitz_plus_hankel",
            SectionKind::ToeplitzMinusHankel => "toeplitz_minus_hankel",
        }
    }

    fn weights(self) -> (f64, f64) {
        match self {
            SectionKind::Toeplitz => (1.0, 0.0),
            SectionKind::Hankel => (0.0, 1.0),
            SectionKind::ToeplitzPlusHankel => (1.0, 1.0),
            SectionKind::ToeplitzMinusHankel => (1.0, -1.0),
        }
    }
}

/// `N×N` section together with its `(N+p)×N` and `N×(N+p)` extensions, whose
/// small singular values count kernel and cokernel separately.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSection {
    pub n: usize,
    pub kind: SectionKind,
    pub matrix: DMatrix<Complex64>,
    pub tall: DMatrix<Complex64>,
    pub wide: DMatrix<Complex64>,
    pub pad: usize,
    pub source: String,
}

fn entries(g: &FourierSeries, kind: SectionKind, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let (wt, wh) = kind.weights();
    DMatrix::from_fn(rows, cols, |j, k| {
        let t = if wt != 0.0 { g.coeff(j as i64 - k as i64) } else { Complex64::new(0.0, 0.0) };
        let h = if wh != 0.0 { g.coeff((j + k + 1) as i64) } else { Complex64::new(0.0, 0.0) };
        t * wt + h * wh
    })
}

/// `T[j][k] = ĝ(j-k)`, `H[j][k] = ĝ(j+k+1)`.
pub fn build_section(g: &FourierSeries, kind: SectionKind, n: usize) -> Result<OperatorSection> {
    let m = g.grid().len();
    let available = g.grid().hankel_budget();
    if n == 0 || n > available {
        return Err(Error::Budget {
            n,
            m,
            needed: 2 * n,
            available,
        });
    }
    let pad = (n / 8).max(1).min(m / 2 - 2 * n);
    Ok(OperatorSection {
        n,
        kind,
        matrix: entries(g, kind, n, n),
        tall: entries(g, kind, n + pad, n),
        wide: entries(g, kind, n, n + pad),
        pad,
        source: String::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDiagnostics {
    pub n: usize,
    pub kind: SectionKind,
    pub source: String,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Singular values of the square section, descending.
    pub singular_values: Vec<f64>,
    /// `σ_min` of the tall extension.
    pub tall_sigma_min: f64,
    /// `σ_min` of the wide extension.
    pub wide_sigma_min: f64,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// Absolute threshold, `kernel_tol · σ_max`.
    pub threshold: f64,
}

fn descending(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite singular value".into()));
    }
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Singular spectrum and numerical kernel/cokernel counts; `kernel_tol` is
/// relative to `σ_max`.
pub fn diagnostics(sec: &OperatorSection, kernel_tol: f64) -> Result<SectionDiagnostics> {
    let s = descending(&sec.matrix)?;
    let sigma_max = s[0];
    let threshold = kernel_tol * sigma_max;
    let tall = descending(&sec.tall)?;
    let wide = descending(&sec.wide)?;
    let small = |v: &[f64]| v.iter().filter(|&&x| x < threshold || sigma_max == 0.0).count();
    Ok(SectionDiagnostics {
        n: sec.n,
        kind: sec.kind,
        source: sec.source.clone(),
        sigma_min: *s.last().expect("nonempty"),
        sigma_max,
        tall_sigma_min: *tall.last().expect("nonempty"),
        wide_sigma_min: *wide.last().expect("nonempty"),
        kernel_dim: small(&tall),
        cokernel_dim: small(&wide),
        threshold,
        singular_values: s,
    })
}

impl SectionDiagnostics {
    /// Kernel and cokernel counts cannot exceed the small singular values of
    /// the square section.
    pub fn is_consistent(&self) -> bool {
        let square = self.singular_values.iter().filter(|&&x| x < self.threshold).count();
        let square = if self.sigma_max == 0.0 { self.n } else { square };
        self.kernel_dim <= square && self.cokernel_dim <= square
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub n: usize,
    pub sigma_min_wh: f64,
    pub sigma_min_w_minus_h: f64,
    pub sigma_min_w_psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub rows: Vec<DeltaRow>,
    /// WH, W−H and W_ψ diagnostics for every `N`.
    pub sections: Vec<SectionDiagnostics>,
    pub psi_well_conditioned: bool,
    pub phi_well_conditioned: bool,
    pub consistent: bool,
    /// Finite sections are a heuristic proxy for the half-line operators.
    pub advisory: bool,
}

/// `σ_min / σ_max` below this counts as ill-conditioned.
pub const CONDITION_FLOOR: f64 = 1e-2;

/// Sections of `W_φ + H_φ`, `W_φ - H_φ` and `W_ψ` across `schedule`.
pub fn delta_consistency(phi: &LineSamples, schedule: &[usize], kernel_tol: f64) -> Result<DeltaReport> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let g_phi = fourier_coefficients(&cayley_pullback(phi)?);
    let psi = test_symbol(phi, crate::symbol::DEFAULT_INVERTIBILITY_FLOOR)?;
    let g_psi = fourier_coefficients(&cayley_pullback(&psi)?);
    let mut rows = Vec::with_capacity(schedule.len());
    let mut sections = Vec::with_capacity(3 * schedule.len());
    for &n in schedule {
        let mut sig = [0.0; 3];
        for (i, (g, kind, label)) in [
            (&g_phi, SectionKind::ToeplitzPlusHankel, "phi"),
            (&g_phi, SectionKind::ToeplitzMinusHankel, "phi"),
            (&g_psi, SectionKind::Toeplitz, "psi"),
        ]
        .into_iter()
        .enumerate()
        {
            let mut sec = build_section(g, kind, n)?;
            sec.source = label.to_string();
            let d = diagnostics(&sec, kernel_tol)?;
            sig[i] = d.sigma_min;
            sections.push(d);
        }
        rows.push(DeltaRow {
            n,
            sigma_min_wh: sig[0],
            sigma_min_w_minus_h: sig[1],
            sigma_min_w_psi: sig[2],
        });
    }
    let well = |label: &str, kind: SectionKind| {
        sections
            .iter()
            .filter(|d| d.source == label && d.kind == kind)
            .all(|d| d.sigma_max > 0.0 && d.sigma_min >= CONDITION_FLOOR * d.sigma_max)
    };
    let psi_well_conditioned = well("psi", SectionKind::Toeplitz);
    let phi_well_conditioned =
        well("phi", SectionKind::ToeplitzPlusHankel) && well("phi", SectionKind::ToeplitzMinusHankel);
    Ok(DeltaReport {
        rows,
        sections,
        psi_well_conditioned,
        phi_well_conditioned,
        consistent: psi_well_conditioned == phi_well_conditioned,
        advisory: true,
    })
}
