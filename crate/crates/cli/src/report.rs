use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use whh_core::classify::{
    analyze, verify_certificate, ExprSource, FactorizationCertificate, LevelSummary, Property, RegularityVerdict,
    Route, SymbolSource, Tri, transplanted_test_symbol,
};
use whh_core::dsl::{Bindings, SymbolExpr};
use whh_core::grid::CircleGrid;
use whh_core::hardy::{cayley_pullback, fourier_coefficients, FourierSeries, Side};
use whh_core::lab::{delta_consistency, DeltaReport};
use whh_core::nehari::DistanceEstimate;
use whh_core::symbol::{detect_sectorial, LineGrid, LineSamples, SectorialWitness, SymbolMeta};

use crate::cache::{CacheKey, CoefficientCache};
use crate::config::{AnalysisConfig, ConfigError};

pub const SCHEMA_VERSION: u32 = 1;

/// Fourier coefficients `k = min_index ..= min_index + re.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientArray {
    pub min_index: i64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CoefficientArray {
    /// Coefficients with `|k| <= band`.
    pub fn banded(series: &FourierSeries, band: usize) -> Self {
        let lo = (-(band as i64)).max(series.min_index());
        let hi = (band as i64).min(series.max_index());
        let (re, im) = (lo..=hi).map(|k| series.coeff(k)).map(|c| (c.re, c.im)).unzip();
        CoefficientArray { min_index: lo, re, im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub role: whh_core::classify::FactorRole,
    pub side: Side,
    pub shift: usize,
    pub invertible: bool,
    pub reciprocal_shift: usize,
    pub coefficients: CoefficientArray,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub kind: Property,
    pub side: Side,
    pub route: Route,
    pub grid_size: usize,
    pub witness: SectorialWitness,
    pub reconstruction_error: f64,
    pub verified: bool,
    pub s: CoefficientArray,
    pub factors: Vec<FactorReport>,
}

impl CertificateReport {
    fn new(cert: &FactorizationCertificate, band: usize, verified: bool) -> Self {
        let coeffs = |s| CoefficientArray::banded(&fourier_coefficients(s), band);
        CertificateReport {
            kind: cert.kind,
            side: cert.side,
            route: cert.route,
            grid_size: cert.grid().len(),
            witness: cert.witness,
            reconstruction_error: cert.reconstruction_error,
            verified,
            s: coeffs(&cert.s),
            factors: cert
                .factors
                .iter()
                .map(|f| FactorReport {
                    role: f.role,
                    side: f.side,
                    shift: f.shift,
                    invertible: f.invertible,
                    reciprocal_shift: f.reciprocal_shift,
                    coefficients: coeffs(&f.samples),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiDescription {
    pub expression: String,
    pub unitary: bool,
    pub unitarity_deviation: f64,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// Present when `ψ` is sectorial on the base grid.
    pub sectorial: Option<SectorialWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub symbol: String,
    pub phi_unitary: bool,
    pub phi_unitarity_deviation: f64,
    pub invertibility_floor: f64,
    pub psi: PsiDescription,
    /// Grid of the final estimates.
    pub grid_size: usize,
    pub levels: Vec<LevelSummary>,
    pub estimates: Vec<DistanceEstimate>,
    pub verdict: RegularityVerdict,
    /// Indices into `certificates` supporting each YES entry.
    pub certified_by: BTreeMap<Property, Vec<usize>>,
    pub certificates: Vec<CertificateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_lab: Option<DeltaReport>,
    /// `φ` on the base grid, `[re, im]`.
    pub essential_range: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub analysis_ms: f64,
    pub operator_lab_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub index: usize,
    pub bindings: Bindings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<PointResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub config: AnalysisConfig,
    pub points: Vec<PointReport>,
    pub total_ms: f64,
}

impl AnalysisReport {
    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Samples `φ` through its transplanted coefficients, optionally cached.
/// Cold and warm paths both rebuild the samples from the coefficients.
pub struct CachedSource {
    expr: SymbolExpr,
    bindings: Bindings,
    cache: Option<CoefficientCache>,
}

impl CachedSource {
    pub fn new(expr: SymbolExpr, bindings: Bindings, cache: Option<CoefficientCache>) -> Self {
        CachedSource { expr, bindings, cache }
    }

    pub fn series(&self, grid: CircleGrid) -> whh_core::Result<FourierSeries> {
        let key = CacheKey::new(&self.expr, &self.bindings, grid.len());
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.load(&key, grid)) {
            return Ok(hit);
        }
        let direct = ExprSource::new(self.expr.clone(), self.bindings.clone()).sample(grid)?;
        let series = fourier_coefficients(&cayley_pullback(&direct)?);
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.store(&key, &series) {
                log::warn!("cannot write cache entry {}: {e}", cache.path(&key).display());
            }
        }
        Ok(series)
    }
}

impl SymbolSource for CachedSource {
    fn label(&self) -> String {
        self.expr.canonical()
    }

    fn sample(&self, grid: CircleGrid) -> whh_core::Result<LineSamples> {
        let values = self.series(grid)?.to_samples().values().to_vec();
        LineSamples::new(
            LineGrid::from_circle(grid),
            values,
            SymbolMeta {
                label: self.label(),
                bindings: self.bindings.clone(),
            },
        )
    }
}

fn certified_by(verdict: &RegularityVerdict, certs: &[FactorizationCertificate]) -> BTreeMap<Property, Vec<usize>> {
    let covering = |p: Property| -> Vec<usize> {
        certs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind.covers().contains(&p))
            .map(|(i, _)| i)
            .collect()
    };
    Property::ALL
        .iter()
        .filter(|&&p| verdict.value(p) == Tri::Yes)
        .map(|&p| {
            let ids = match p {
                Property::Invertible => {
                    let mut v = covering(Property::LeftInvertible);
                    v.extend(covering(Property::RightInvertible));
                    v
                }
                Property::Fredholm => {
                    let mut v = covering(Property::LeftFredholm);
                    v.extend(covering(Property::RightFredholm));
                    v
                }
                _ => covering(p),
            };
            let mut ids = ids;
            ids.sort_unstable();
            ids.dedup();
            (p, ids)
        })
        .collect()
}

fn run_point(cfg: &AnalysisConfig, expr: &SymbolExpr, bindings: &Bindings, cache: Option<CoefficientCache>) -> Result<(PointResult, f64, f64), String> {
    let started = Instant::now();
    let ccfg = cfg.classifier();
    let source = CachedSource::new(expr.clone(), bindings.clone(), cache);
    let analysis = analyze(&source, &ccfg).map_err(|e| e.to_string())?;
    let band = ccfg.certificate_tol.band;
    let mut certificates = Vec::with_capacity(analysis.certificates.len());
    for cert in &analysis.certificates {
        let psi = source
            .sample(cert.grid())
            .and_then(|phi| transplanted_test_symbol(&phi, ccfg.floor))
            .map_err(|e| e.to_string())?;
        let verified = verify_certificate(&psi, cert, &ccfg.certificate_tol);
        certificates.push(CertificateReport::new(cert, band, verified));
    }
    let analysis_ms = started.elapsed().as_secs_f64() * 1e3;

    let base = CircleGrid::new(cfg.grid_size).map_err(|e| e.to_string())?;
    let phi = source.sample(base).map_err(|e| e.to_string())?;
    let psi = whh_core::symbol::test_symbol(&phi, ccfg.floor).map_err(|e| e.to_string())?;
    let (phi_unitary, phi_dev) = whh_core::symbol::is_unitary(&phi, ccfg.unitary_tol);
    let (psi_unitary, psi_dev) = whh_core::symbol::is_unitary(&psi, ccfg.unitary_tol);
    let moduli = psi.values().iter().map(|v| v.norm());
    let psi_desc = PsiDescription {
        expression: expr.test_symbol_expr().canonical(),
        unitary: psi_unitary,
        unitarity_deviation: psi_dev,
        min_modulus: moduli.clone().fold(f64::INFINITY, f64::min),
        max_modulus: moduli.fold(0.0, f64::max),
        sectorial: detect_sectorial(psi.values()),
    };

    let lab_started = Instant::now();
    let operator_lab = if cfg.operator_lab {
        Some(delta_consistency(&phi, &cfg.schedule, cfg.tolerances.kernel).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let lab_ms = lab_started.elapsed().as_secs_f64() * 1e3;

    let result = PointResult {
        symbol: expr.canonical(),
        phi_unitary,
        phi_unitarity_deviation: phi_dev,
        invertibility_floor: analysis.invertibility_floor,
        psi: psi_desc,
        grid_size: analysis.grid_size,
        levels: analysis.levels.clone(),
        certified_by: certified_by(&analysis.verdict, &analysis.certificates),
        estimates: analysis.estimates,
        verdict: analysis.verdict,
        certificates,
        operator_lab,
        essential_range: phi.values().iter().map(|v| [v.re, v.im]).collect(),
    };
    Ok((result, analysis_ms, lab_ms))
}

/// Validates `cfg` and runs every sweep point; failing points are recorded
/// in the report rather than aborting the run.
pub fn run(cfg: &AnalysisConfig) -> Result<AnalysisReport, ConfigError> {
    cfg.validate()?;
    let expr = cfg.expr()?;
    let cache = match cfg.resolved_cache_dir() {
        Some(dir) => match CoefficientCache::new(&dir) {
            Ok(c) => Some(c),
            Err(e) => {
                log::warn!("cache directory {} unusable ({e}), continuing without cache", dir.display());
                None
            }
        },
        None => None,
    };
    let started = Instant::now();
    let points: Vec<PointReport> = cfg
        .sweep()
        .into_par_iter()
        .enumerate()
        .map(|(index, bindings)| {
            let t = Instant::now();
            let outcome = run_point(cfg, &expr, &bindings, cache.clone());
            let total_ms = t.elapsed().as_secs_f64() * 1e3;
            match outcome {
                Ok((result, analysis_ms, operator_lab_ms)) => PointReport {
                    index,
                    bindings,
                    result: Some(result),
                    error: None,
                    timings: Timings {
                        analysis_ms,
                        operator_lab_ms,
                        total_ms,
                    },
                },
                Err(e) => {
                    log::warn!("point {index} {bindings:?} failed: {e}");
                    PointReport {
                        index,
                        bindings,
                        result: None,
                        error: Some(e),
                        timings: Timings {
                            analysis_ms: total_ms,
                            operator_lab_ms: 0.0,
                            total_ms,
                        },
                    }
                }
            }
        })
        .collect();
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        points,
        total_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}
