use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsl::{Bindings, SymbolExpr};
use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::hardy::{
    cayley_pullback, fourier_coefficients, outer_factor_with_floor, unimodular_outer, CircleSamples, Side,
};
use crate::nehari::{
    aak_approximant, sectorial_certificate, shifted_approximant, side_estimates, DistanceClass, DistanceEstimate,
    DistanceVerdict,
};
use crate::symbol::{detect_sectorial, is_unitary, test_symbol, LineSamples, SectorialWitness};

/// Operators every verdict speaks about.
pub const APPLIES_TO: [&str; 2] = ["WH_phi = W_phi + H_phi", "W_phi - H_phi"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tri {
    Yes,
    No,
    Inconclusive,
}

impl Tri {
    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            _ => Tri::Inconclusive,
        }
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Yes => "YES",
            Tri::No => "NO",
            Tri::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Invertible,
    LeftInvertible,
    RightInvertible,
    Fredholm,
    LeftFredholm,
    RightFredholm,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Invertible,
        Property::LeftInvertible,
        Property::RightInvertible,
        Property::Fredholm,
        Property::LeftFredholm,
        Property::RightFredholm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Invertible => "invertible",
            Property::LeftInvertible => "left_invertible",
            Property::RightInvertible => "right_invertible",
            Property::Fredholm => "fredholm",
            Property::LeftFredholm => "left_fredholm",
            Property::RightFredholm => "right_fredholm",
        }
    }

    /// Left and right swapped.
    pub fn mirror(self) -> Property {
        match self {
            Property::LeftInvertible => Property::RightInvertible,
            Property::RightInvertible => Property::LeftInvertible,
            Property::LeftFredholm => Property::RightFredholm,
            Property::RightFredholm => Property::LeftFredholm,
            p => p,
        }
    }

    /// One-sided properties a certificate of this kind establishes.
    pub fn covers(self) -> &'static [Property] {
        use Property::*;
        match self {
            Invertible => &[LeftInvertible, RightInvertible, LeftFredholm, RightFredholm],
            LeftInvertible => &[LeftInvertible, LeftFredholm],
            RightInvertible => &[RightInvertible, RightFredholm],
            Fredholm => &[LeftFredholm, RightFredholm],
            LeftFredholm => &[LeftFredholm],
            RightFredholm => &[RightFredholm],
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub value: Tri,
    /// Distance estimates the value was derived from.
    pub provenance: Vec<DistanceClass>,
    /// Set for NO values resting on essential-norm estimates.
    pub heuristic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Entry {
    fn from_estimate(e: &DistanceEstimate) -> Entry {
        let value = match e.verdict {
            DistanceVerdict::BelowOne => Tri::Yes,
            DistanceVerdict::AtOrAboveOne => Tri::No,
            DistanceVerdict::Inconclusive => Tri::Inconclusive,
        };
        Entry {
            value,
            provenance: vec![e.class],
            heuristic: value == Tri::No && e.class.is_essential(),
            note: None,
        }
    }

    fn conjunction(a: &Entry, b: &Entry) -> Entry {
        let value = a.value.and(b.value);
        let mut provenance = a.provenance.clone();
        for c in &b.provenance {
            if !provenance.contains(c) {
                provenance.push(*c);
            }
        }
        let heuristic = value == Tri::No
            && [a, b]
                .iter()
                .filter(|e| e.value == Tri::No)
                .all(|e| e.heuristic);
        Entry {
            value,
            provenance,
            heuristic,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub invertible: Entry,
    pub left_invertible: Entry,
    pub right_invertible: Entry,
    pub fredholm: Entry,
    pub left_fredholm: Entry,
    pub right_fredholm: Entry,
    pub applies_to: Vec<String>,
}

impl RegularityVerdict {
    /// Builds the six entries from the four distance estimates.
    pub fn from_estimates(estimates: &[DistanceEstimate]) -> Result<RegularityVerdict> {
        let find = |class: DistanceClass| {
            estimates
                .iter()
                .find(|e| e.class == class)
                .map(Entry::from_estimate)
                .ok_or_else(|| Error::Degenerate(format!("missing {class} estimate")))
        };
        let (left_invertible, right_invertible) = (find(DistanceClass::HinfPlus)?, find(DistanceClass::HinfMinus)?);
        let (left_fredholm, right_fredholm) = (find(DistanceClass::CplusHinfPlus)?, find(DistanceClass::CplusHinfMinus)?);
        let mut v = RegularityVerdict {
            invertible: Entry::conjunction(&left_invertible, &right_invertible),
            fredholm: Entry::conjunction(&left_fredholm, &right_fredholm),
            left_invertible,
            right_invertible,
            left_fredholm,
            right_fredholm,
            applies_to: APPLIES_TO.iter().map(|s| s.to_string()).collect(),
        };
        for (inv, fred, class) in [
            (Property::LeftInvertible, Property::LeftFredholm, DistanceClass::HinfPlus),
            (Property::RightInvertible, Property::RightFredholm, DistanceClass::HinfMinus),
        ] {
            if v.get(inv).value == Tri::Yes && v.get(fred).value != Tri::Yes {
                *v.get_mut(fred) = Entry {
                    value: Tri::Yes,
                    provenance: vec![class],
                    heuristic: false,
                    note: Some(format!("implied by {inv}")),
                };
            }
        }
        v.recombine();
        Ok(v)
    }

    pub fn get(&self, p: Property) -> &Entry {
        match p {
            Property::Invertible => &self.invertible,
            Property::LeftInvertible => &self.left_invertible,
            Property::RightInvertible => &self.right_invertible,
            Property::Fredholm => &self.fredholm,
            Property::LeftFredholm => &self.left_fredholm,
            Property::RightFredholm => &self.right_fredholm,
        }
    }

    pub fn get_mut(&mut self, p: Property) -> &mut Entry {
        match p {
            Property::Invertible => &mut self.invertible,
            Property::LeftInvertible => &mut self.left_invertible,
            Property::RightInvertible => &mut self.right_invertible,
            Property::Fredholm => &mut self.fredholm,
            Property::LeftFredholm => &mut self.left_fredholm,
            Property::RightFredholm => &mut self.right_fredholm,
        }
    }

    pub fn value(&self, p: Property) -> Tri {
        self.get(p).value
    }

    fn recombine(&mut self) {
        self.invertible = Entry::conjunction(&self.left_invertible, &self.right_invertible);
        self.fredholm = Entry::conjunction(&self.left_fredholm, &self.right_fredholm);
    }

    /// Checks the structural invariants: conjunctions, one-sided implication,
    /// and that no YES rests on an inconclusive estimate.
    pub fn is_consistent(&self, estimates: &[DistanceEstimate]) -> bool {
        let conj_ok = (self.invertible.value == Tri::Yes)
            == (self.left_invertible.value == Tri::Yes && self.right_invertible.value == Tri::Yes)
            && (self.fredholm.value == Tri::Yes)
                == (self.left_fredholm.value == Tri::Yes && self.right_fredholm.value == Tri::Yes);
        let implication = (self.left_invertible.value != Tri::Yes || self.left_fredholm.value == Tri::Yes)
            && (self.right_invertible.value != Tri::Yes || self.right_fredholm.value == Tri::Yes);
        let provenance = Property::ALL.iter().all(|&p| {
            let e = self.get(p);
            e.value != Tri::Yes
                || (!e.provenance.is_empty()
                    && e.provenance.iter().all(|c| {
                        estimates
                            .iter()
                            .find(|d| d.class == *c)
                            .is_some_and(|d| d.verdict == DistanceVerdict::BelowOne)
                    }))
        });
        conj_ok && implication && provenance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateTolerance {
    /// Relative to `max(1, sup|ψ|)`.
    pub product: f64,
    /// Largest admissible share of wrong-side coefficient energy.
    pub energy: f64,
    /// Coefficients `|k| <= band` enter the energy test.
    pub band: usize,
}

impl Default for CertificateTolerance {
    fn default() -> Self {
        CertificateTolerance {
            product: 1e-7,
            energy: 1e-6,
            band: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// First grid of the refinement sequence.
    pub grid_size: usize,
    pub max_grid_size: usize,
    pub schedule: Vec<usize>,
    pub margin: f64,
    /// Tail index fraction for the essential-norm estimates.
    pub k_frac: f64,
    pub unitary_tol: f64,
    pub floor: f64,
    /// Agreement required between consecutive grids at shared `N`.
    pub refine_tol: f64,
    pub certificates: bool,
    pub certificate_tol: CertificateTolerance,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            grid_size: 4096,
            max_grid_size: 1 << 22,
            schedule: vec![64, 128, 256, 512],
            margin: 0.05,
            k_frac: 0.1,
            unitary_tol: 1e-10,
            floor: crate::symbol::DEFAULT_INVERTIBILITY_FLOOR,
            refine_tol: 1e-3,
            certificates: true,
            certificate_tol: CertificateTolerance::default(),
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let base = CircleGrid::new(self.grid_size)?;
        CircleGrid::new(self.max_grid_size)?;
        if self.max_grid_size < self.grid_size {
            return Err(Error::Degenerate(format!(
                "max_grid_size {} below grid_size {}",
                self.max_grid_size, self.grid_size
            )));
        }
        if self.schedule.is_empty() {
            return Err(Error::EmptySchedule);
        }
        let available = base.hankel_budget();
        if let Some(&n) = self.schedule.iter().find(|&&n| n == 0 || n > available) {
            return Err(Error::Budget {
                n,
                m: self.grid_size,
                needed: 2 * n - 1,
                available,
            });
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::Degenerate(format!("margin {} outside (0, 1)", self.margin)));
        }
        if !(self.k_frac > 0.0 && self.k_frac < 1.0) {
            return Err(Error::Degenerate(format!("k_frac {} outside (0, 1)", self.k_frac)));
        }
        if self.certificate_tol.band > self.grid_size / 2 {
            return Err(Error::Degenerate(format!(
                "energy band {} exceeds M/2 = {}",
                self.certificate_tol.band,
                self.grid_size / 2
            )));
        }
        Ok(())
    }

    fn largest_section(&self) -> usize {
        self.schedule.iter().copied().max().unwrap_or(1)
    }
}

/// Anything that can be sampled on a Cayley grid of any size.
pub trait SymbolSource: Sync {
    fn label(&self) -> String;
    fn sample(&self, grid: CircleGrid) -> Result<LineSamples>;
}

#[derive(Debug, Clone)]
pub struct ExprSource {
    pub expr: SymbolExpr,
    pub bindings: Bindings,
}

impl ExprSource {
    pub fn new(expr: SymbolExpr, bindings: Bindings) -> Self {
        ExprSource { expr, bindings }
    }

    pub fn parse(text: &str, bindings: Bindings) -> Result<Self> {
        Ok(ExprSource::new(text.parse()?, bindings))
    }
}

impl SymbolSource for ExprSource {
    fn label(&self) -> String {
        self.expr.canonical()
    }

    fn sample(&self, grid: CircleGrid) -> Result<LineSamples> {
        LineSamples::from_expr(&self.expr, &self.bindings, grid)
    }
}

pub struct FnSource<F> {
    pub label: String,
    pub f: F,
}

impl<F: Fn(f64) -> Complex64 + Sync> FnSource<F> {
    pub fn new(label: &str, f: F) -> Self {
        FnSource {
            label: label.to_string(),
            f,
        }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> SymbolSource for FnSource<F> {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn sample(&self, grid: CircleGrid) -> Result<LineSamples> {
        LineSamples::from_fn(grid, &self.label, &self.f)
    }
}

/// The test symbol and its factorizations on one grid.
#[derive(Debug, Clone)]
struct Target {
    line: LineSamples,
    psi: CircleSamples,
    /// Outer factor of `|ψ|`.
    h: CircleSamples,
    /// `ψ / h`, unimodular, for plus-side questions.
    u_plus: CircleSamples,
    /// `ψ / conj(h)`, unimodular, for minus-side questions.
    u_minus: CircleSamples,
    unitary: bool,
    deviation: f64,
    floor: f64,
}

impl Target {
    fn new(phi: &LineSamples, cfg: &ClassifierConfig, force_unitary: bool) -> Result<Target> {
        let floor = crate::symbol::invertibility_floor(phi);
        let line = test_symbol(phi, cfg.floor)?;
        let psi = cayley_pullback(&line)?;
        let (unitary, deviation) = is_unitary(&line, cfg.unitary_tol);
        let (h, u_plus, u_minus) = if unitary || force_unitary {
            (CircleSamples::constant(psi.grid(), Complex64::new(1.0, 0.0)), psi.clone(), psi.clone())
        } else {
            let h = outer_factor_with_floor(&psi, cfg.floor)?;
            let u_plus = psi.div(&h)?;
            let u_minus = psi.div(&h.conj())?;
            (h, u_plus, u_minus)
        };
        Ok(Target {
            line,
            psi,
            h,
            u_plus,
            u_minus,
            unitary,
            deviation,
            floor,
        })
    }

    /// Target for `conj(ψ)`: minus-side questions about `ψ` become plus-side
    /// questions about the conjugate.
    fn conjugate(&self) -> Result<Target> {
        Ok(Target {
            line: self.line.map("conj", |v| v.conj())?,
            psi: self.psi.conj(),
            h: self.h.clone(),
            u_plus: self.u_minus.conj(),
            u_minus: self.u_plus.conj(),
            unitary: self.unitary,
            deviation: self.deviation,
            floor: self.floor,
        })
    }

    fn estimates(&self, cfg: &ClassifierConfig) -> Result<Vec<DistanceEstimate>> {
        let (hp, cp) = side_estimates(
            &fourier_coefficients(&self.u_plus),
            Side::Plus,
            &cfg.schedule,
            cfg.k_frac,
            cfg.margin,
        )?;
        let (hm, cm) = side_estimates(
            &fourier_coefficients(&self.u_minus),
            Side::Minus,
            &cfg.schedule,
            cfg.k_frac,
            cfg.margin,
        )?;
        Ok(vec![hp, hm, cp, cm])
    }
}

/// Verdict for a unitary symbol from distances of `ψ` itself.
pub fn classify_unitary(phi: &LineSamples, cfg: &ClassifierConfig) -> Result<RegularityVerdict> {
    let (ok, deviation) = is_unitary(phi, cfg.unitary_tol);
    if !ok {
        return Err(Error::NotUnitary {
            deviation,
            tol: cfg.unitary_tol,
        });
    }
    let target = Target::new(phi, cfg, true)?;
    RegularityVerdict::from_estimates(&target.estimates(cfg)?)
}

/// Verdict and certificates for an invertible symbol on its own grid.
pub fn classify_general(
    phi: &LineSamples,
    cfg: &ClassifierConfig,
) -> Result<(RegularityVerdict, Vec<FactorizationCertificate>)> {
    let target = Target::new(phi, cfg, false)?;
    let estimates = target.estimates(cfg)?;
    let mut verdict = RegularityVerdict::from_estimates(&estimates)?;
    let mut certificates = Vec::new();
    if cfg.certificates {
        let mut search = CertificateSearch::new(&verdict);
        search.run(&target, cfg)?;
        certificates = search.finish(&mut verdict, target.psi.grid().len());
    }
    Ok((verdict, certificates))
}

/// Transplanted test symbol of `phi`, the reference for `verify_certificate`.
pub fn transplanted_test_symbol(phi: &LineSamples, floor: f64) -> Result<CircleSamples> {
    cayley_pullback(&test_symbol(phi, floor)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub grid_size: usize,
    pub estimates: Vec<DistanceEstimate>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub label: String,
    /// Grid whose estimates produced the verdict.
    pub grid_size: usize,
    pub levels: Vec<LevelSummary>,
    pub unitary: bool,
    /// `max ||ψ| - 1|` on the final grid.
    pub unitarity_deviation: f64,
    /// `min |φ|` on the final grid.
    pub invertibility_floor: f64,
    pub estimates: Vec<DistanceEstimate>,
    pub verdict: RegularityVerdict,
    pub certificates: Vec<FactorizationCertificate>,
}

fn agree(a: &[DistanceEstimate], b: &[DistanceEstimate], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        x.class == y.class
            && x.verdict == y.verdict
            && (x.class.is_essential()
                || x.lower_bounds.iter().all(|bx| match y.value_at(bx.n) {
                    Some(v) => (v - bx.value).abs() <= tol,
                    None => true,
                }))
    })
}

// An inconclusive H∞ estimate still below `1 - δ` may settle on a finer grid;
// one stuck between `1 - δ` and one will not.
fn unsettled(estimates: &[DistanceEstimate]) -> bool {
    estimates.iter().any(|e| {
        !e.class.is_essential()
            && e.verdict == DistanceVerdict::Inconclusive
            && e.final_value().is_some_and(|v| v <= 1.0 - e.margin)
    })
}

/// Full pipeline with grid refinement.
///
/// The grid doubles from `cfg.grid_size` until two consecutive grids give the
/// same four verdicts with H∞ bounds within `refine_tol`, and no H∞ estimate
/// is still growing below `1 - δ`. Certificates are searched on the final
/// grid and, failing verification, on further doublings up to
/// `cfg.max_grid_size`.
pub fn analyze(source: &dyn SymbolSource, cfg: &ClassifierConfig) -> Result<Analysis> {
    cfg.validate()?;
    let mut grid = CircleGrid::new(cfg.grid_size)?;
    let mut levels: Vec<LevelSummary> = Vec::new();
    let mut target;
    loop {
        let phi = source.sample(grid)?;
        target = Target::new(&phi, cfg, false)?;
        let estimates = target.estimates(cfg)?;
        log::debug!("{}: M = {} estimates {:?}", source.label(), grid.len(), estimates);
        let done = levels
            .last()
            .is_some_and(|prev| agree(&prev.estimates, &estimates, cfg.refine_tol))
            && !unsettled(&estimates);
        levels.push(LevelSummary {
            grid_size: grid.len(),
            estimates,
        });
        if done || grid.len() * 2 > cfg.max_grid_size {
            break;
        }
        grid = grid.refined();
    }
    let last = levels.last().expect("at least one level");
    let estimates = last.estimates.clone();
    let mut verdict = RegularityVerdict::from_estimates(&estimates)?;
    let mut certificates = Vec::new();
    if cfg.certificates {
        let mut search = CertificateSearch::new(&verdict);
        let mut cert_target = target.clone();
        loop {
            search.run(&cert_target, cfg)?;
            if search.complete() || grid.len() * 2 > cfg.max_grid_size {
                break;
            }
            grid = grid.refined();
            log::debug!("{}: certificate search on M = {}", source.label(), grid.len());
            cert_target = Target::new(&source.sample(grid)?, cfg, false)?;
        }
        certificates = search.finish(&mut verdict, last.grid_size);
    }
    Ok(Analysis {
        label: source.label(),
        grid_size: last.grid_size,
        unitary: target.unitary,
        unitarity_deviation: target.deviation,
        invertibility_floor: target.floor,
        estimates,
        verdict,
        certificates,
        levels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `ψ` itself is sectorial.
    Direct,
    /// `ψ = r e^{iβx}` with `r` sectorial or approximated.
    ExponentialExtraction,
    /// Nehari approximant of the unimodular part.
    Approximant,
    /// Approximant from `z̄^K H∞`.
    ShiftedApproximant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorRole {
    H,
    H1,
    H2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFactor {
    pub role: FactorRole,
    pub samples: CircleSamples,
    pub side: Side,
    /// Membership in `z̄^shift H∞₊` (or `z^shift H∞₋`).
    pub shift: usize,
    pub invertible: bool,
    pub reciprocal_shift: usize,
}

impl AnalyticFactor {
    fn conj(&self) -> AnalyticFactor {
        AnalyticFactor {
            samples: self.samples.conj(),
            side: self.side.opposite(),
            ..self.clone()
        }
    }
}

/// `ψ = s · Π factors` with `s` sectorial.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationCertificate {
    pub kind: Property,
    pub side: Side,
    pub route: Route,
    pub s: CircleSamples,
    pub witness: SectorialWitness,
    pub factors: Vec<AnalyticFactor>,
    pub reconstruction_error: f64,
}

impl FactorizationCertificate {
    pub fn grid(&self) -> CircleGrid {
        self.s.grid()
    }

    fn product(&self) -> Result<CircleSamples> {
        self.factors.iter().try_fold(self.s.clone(), |acc, f| acc.mul(&f.samples))
    }

    fn conj(&self) -> FactorizationCertificate {
        FactorizationCertificate {
            kind: self.kind.mirror(),
            side: self.side.opposite(),
            route: self.route,
            s: self.s.conj(),
            witness: SectorialWitness {
                c: self.witness.c.conj(),
                epsilon: self.witness.epsilon,
            },
            factors: self.factors.iter().map(AnalyticFactor::conj).collect(),
            reconstruction_error: self.reconstruction_error,
        }
    }
}

fn energy_ok(samples: &CircleSamples, side: Side, shift: usize, tol: &CertificateTolerance) -> bool {
    let e = fourier_coefficients(samples).wrong_side_energy(side, shift, tol.band);
    e.is_finite() && e <= tol.energy
}

/// Independent re-check of a certificate against `ψ`'s transplant.
pub fn verify_certificate(psi: &CircleSamples, cert: &FactorizationCertificate, tol: &CertificateTolerance) -> bool {
    if psi.grid() != cert.grid() || cert.factors.iter().any(|f| f.samples.grid() != psi.grid()) {
        return false;
    }
    let Ok(product) = cert.product() else {
        return false;
    };
    let err = product.max_abs_diff(psi);
    if !(err <= tol.product * psi.sup_norm().max(1.0)) {
        return false;
    }
    if detect_sectorial(cert.s.values()).is_none() || !cert.witness.holds_for(cert.s.values()) {
        return false;
    }
    cert.factors.iter().all(|f| {
        energy_ok(&f.samples, f.side, f.shift, tol)
            && (!f.invertible
                || f
                    .samples
                    .recip()
                    .is_ok_and(|r| energy_ok(&r, f.side, f.reciprocal_shift, tol)))
    })
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn assemble(
    kind: Property,
    route: Route,
    s: CircleSamples,
    factors: Vec<AnalyticFactor>,
    psi: &CircleSamples,
) -> Option<FactorizationCertificate> {
    let witness = detect_sectorial(s.values())?;
    let mut cert = FactorizationCertificate {
        kind,
        side: Side::Plus,
        route,
        s,
        witness,
        factors,
        reconstruction_error: 0.0,
    };
    cert.reconstruction_error = cert.product().ok()?.max_abs_diff(psi);
    Some(cert)
}

fn plus_factor(role: FactorRole, samples: CircleSamples, shift: usize, invertible: bool, reciprocal_shift: usize) -> AnalyticFactor {
    AnalyticFactor {
        role,
        samples,
        side: Side::Plus,
        shift,
        invertible,
        reciprocal_shift,
    }
}

/// Slope `β` of a linear fit to the unwrapped phase of `ψ` around `x = 0`.
/// Unwrapping stops at the first jump larger than `π/4`.
fn phase_slope(line: &LineSamples) -> Option<f64> {
    let xs = line.points();
    let vs = line.values();
    let m = xs.len();
    if m < 16 {
        return None;
    }
    let mid = m / 2;
    let mut pts: Vec<(f64, f64)> = vec![(xs[mid], vs[mid].arg())];
    for dir in [1i64, -1] {
        let mut phase = vs[mid].arg();
        let mut j = mid as i64;
        loop {
            let next = j + dir;
            if next < 0 || next >= m as i64 {
                break;
            }
            let step = (vs[next as usize] / vs[j as usize]).arg();
            if step.abs() > std::f64::consts::FRAC_PI_4 {
                break;
            }
            phase += step;
            pts.push((xs[next as usize], phase));
            j = next;
        }
    }
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Plus-side certificate builders. Minus-side certificates are obtained from
/// these applied to `conj(ψ)`.
fn direct(t: &Target, kind: Property) -> Option<FactorizationCertificate> {
    let one = CircleSamples::constant(t.psi.grid(), one());
    assemble(
        kind,
        Route::Direct,
        t.psi.clone(),
        vec![plus_factor(FactorRole::H, one, 0, true, 0)],
        &t.psi,
    )
}

fn approximant_factors(u: &CircleSamples, cfg: &ClassifierConfig) -> Option<(CircleSamples, CircleSamples)> {
    let series = fourier_coefficients(u);
    let budget = u.grid().hankel_budget();
    let mut sizes: Vec<usize> = cfg.schedule.iter().copied().filter(|&n| n <= budget).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    for n in sizes {
        let Ok(approx) = aak_approximant(&series, n) else {
            continue;
        };
        if let Ok(sc) = sectorial_certificate(u, &approx.f) {
            return Some((sc.s, sc.f));
        }
    }
    None
}

fn via_approximant(t: &Target, kind: Property, cfg: &ClassifierConfig) -> Option<FactorizationCertificate> {
    let (s, f) = approximant_factors(&t.u_plus, cfg)?;
    let h = f.mul(&t.h).ok()?;
    assemble(
        kind,
        Route::Approximant,
        s,
        vec![plus_factor(FactorRole::H, h, 0, kind == Property::Invertible, 0)],
        &t.psi,
    )
}

fn via_extraction(t: &Target, cfg: &ClassifierConfig) -> Option<FactorizationCertificate> {
    let beta = phase_slope(&t.line)?;
    if !(beta > 1e-9) {
        return None;
    }
    let grid = t.psi.grid();
    let p_line = LineSamples::from_fn(grid, "exp", |x| Complex64::from_polar(1.0, beta * x)).ok()?;
    let p = cayley_pullback(&p_line).ok()?;
    let r = t.psi.div(&p).ok()?;
    if let Some(cert) = assemble(
        Property::LeftInvertible,
        Route::ExponentialExtraction,
        r.clone(),
        vec![plus_factor(FactorRole::H, p.clone(), 0, false, 0)],
        &t.psi,
    ) {
        return Some(cert);
    }
    let (u_r, h_r) = unimodular_outer(&r, cfg.floor).ok()?;
    let (s, f) = approximant_factors(&u_r, cfg)?;
    let h = p.mul(&f).ok()?.mul(&h_r).ok()?;
    assemble(
        Property::LeftInvertible,
        Route::ExponentialExtraction,
        s,
        vec![plus_factor(FactorRole::H, h, 0, false, 0)],
        &t.psi,
    )
}

fn via_shifted(t: &Target, kind: Property, cfg: &ClassifierConfig) -> Option<FactorizationCertificate> {
    let n = cfg.largest_section().min(t.psi.grid().hankel_budget());
    let shift = ((cfg.k_frac * n as f64).ceil() as usize).min(n - 1);
    let approx = shifted_approximant(&t.u_plus, n, shift).ok()?;
    let sc = sectorial_certificate(&t.u_plus, &approx.f).ok()?;
    let two_sided = kind == Property::Fredholm;
    assemble(
        kind,
        Route::ShiftedApproximant,
        sc.s,
        vec![
            plus_factor(FactorRole::H1, sc.f, shift, two_sided, shift),
            plus_factor(FactorRole::H2, t.h.clone(), 0, true, 0),
        ],
        &t.psi,
    )
}

fn plus_candidates(t: &Target, kind: Property, cfg: &ClassifierConfig) -> Vec<FactorizationCertificate> {
    let mut out = Vec::new();
    match kind {
        Property::Invertible => {
            out.extend(direct(t, kind));
            if out.is_empty() {
                out.extend(via_approximant(t, kind, cfg));
            }
        }
        Property::LeftInvertible => {
            out.extend(direct(t, kind));
            if out.is_empty() {
                out.extend(via_extraction(t, cfg));
            }
            if out.is_empty() {
                out.extend(via_approximant(t, kind, cfg));
            }
        }
        Property::Fredholm | Property::LeftFredholm => out.extend(via_shifted(t, kind, cfg)),
        _ => {}
    }
    out
}

/// Tracks which one-sided YES entries still lack a verified certificate.
struct CertificateSearch {
    wanted: Vec<Property>,
    covered: Vec<Property>,
    found: Vec<FactorizationCertificate>,
}

impl CertificateSearch {
    fn new(verdict: &RegularityVerdict) -> Self {
        let wanted = Property::ALL
            .iter()
            .copied()
            .filter(|&p| verdict.value(p) == Tri::Yes)
            .collect();
        CertificateSearch {
            wanted,
            covered: Vec::new(),
            found: Vec::new(),
        }
    }

    fn needs(&self, kind: Property) -> bool {
        self.wanted.contains(&kind) && kind.covers().iter().any(|p| !self.covered.contains(p))
    }

    fn complete(&self) -> bool {
        self.wanted
            .iter()
            .flat_map(|p| p.covers().iter().filter(|q| self.wanted.contains(q)))
            .all(|p| self.covered.contains(p))
    }

    fn run(&mut self, t: &Target, cfg: &ClassifierConfig) -> Result<()> {
        let conj = t.conjugate()?;
        let tol = &cfg.certificate_tol;
        for kind in Property::ALL {
            if !self.needs(kind) {
                continue;
            }
            // minus-side kinds come from the plus side of conj(ψ)
            let (plus_kind, target, flip) = match kind {
                Property::RightInvertible | Property::RightFredholm => (kind.mirror(), &conj, true),
                _ => (kind, t, false),
            };
            let mut candidates: Vec<FactorizationCertificate> = plus_candidates(target, plus_kind, cfg)
                .into_iter()
                .map(|c| if flip { c.conj() } else { c })
                .collect();
            if matches!(kind, Property::Invertible | Property::Fredholm) {
                candidates.extend(
                    plus_candidates(&conj, kind, cfg)
                        .into_iter()
                        .map(|c| FactorizationCertificate { kind, ..c.conj() }),
                );
            }
            if let Some(cert) = candidates.into_iter().find(|c| verify_certificate(&t.psi, c, tol)) {
                log::debug!("{kind}: verified {:?} certificate on M = {}", cert.route, t.psi.grid().len());
                for p in kind.covers() {
                    if !self.covered.contains(p) {
                        self.covered.push(*p);
                    }
                }
                self.found.push(cert);
            }
        }
        Ok(())
    }

    /// Downgrades uncovered YES entries and returns the certificates.
    fn finish(self, verdict: &mut RegularityVerdict, grid_size: usize) -> Vec<FactorizationCertificate> {
        for p in [
            Property::LeftInvertible,
            Property::RightInvertible,
            Property::LeftFredholm,
            Property::RightFredholm,
        ] {
            let e = verdict.get_mut(p);
            if e.value == Tri::Yes && !self.covered.contains(&p) {
                e.value = Tri::Inconclusive;
                e.note = Some(format!("no verified certificate (grids from M = {grid_size})"));
            }
        }
        verdict.recombine();
        self.found
    }
}
