use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use whh_core::classify::{CertificateTolerance, ClassifierConfig};
use whh_core::dsl::{Bindings, SymbolExpr};
use whh_core::grid::CircleGrid;
use whh_core::lab::DEFAULT_KERNEL_TOL;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "WHH_CACHE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid symbol: {0}")]
    Symbol(whh_core::Error),
    #[error("{0}")]
    Invalid(String),
}

/// One value or a sweep list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValues {
    One(f64),
    Sweep(Vec<f64>),
}

impl ParamValues {
    pub fn values(&self) -> &[f64] {
        match self {
            ParamValues::One(v) => std::slice::from_ref(v),
            ParamValues::Sweep(v) => v,
        }
    }
}

fn default_grid_size() -> usize {
    4096
}
fn default_max_grid_size() -> usize {
    1 << 22
}
fn default_schedule() -> Vec<usize> {
    vec![64, 128, 256, 512]
}
fn default_margin() -> f64 {
    0.05
}
fn default_k_frac() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("whh-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub unitary: f64,
    pub invertibility_floor: f64,
    pub refine: f64,
    pub product: f64,
    pub energy: f64,
    /// Coefficient band of the energy test; defaults to `grid_size / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_band: Option<usize>,
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        Tolerances {
            unitary: c.unitary_tol,
            invertibility_floor: c.floor,
            refine: c.refine_tol,
            product: c.certificate_tol.product,
            energy: c.certificate_tol.energy,
            energy_band: None,
            kernel: DEFAULT_KERNEL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub symbol: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValues>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_max_grid_size")]
    pub max_grid_size: usize,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<usize>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_k_frac")]
    pub k_frac: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_true")]
    pub certificates: bool,
    #[serde(default = "default_true")]
    pub operator_lab: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl AnalysisConfig {
    pub fn new(symbol: &str) -> Self {
        AnalysisConfig {
            symbol: symbol.to_string(),
            params: BTreeMap::new(),
            grid_size: default_grid_size(),
            max_grid_size: default_max_grid_size(),
            schedule: default_schedule(),
            margin: default_margin(),
            k_frac: default_k_frac(),
            tolerances: Tolerances::default(),
            certificates: true,
            operator_lab: true,
            out_dir: default_out_dir(),
            cache_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn expr(&self) -> Result<SymbolExpr, ConfigError> {
        self.symbol.parse().map_err(ConfigError::Symbol)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if CircleGrid::new(self.grid_size).is_err() {
            return invalid(format!("grid_size {} is not a power of two >= 8", self.grid_size));
        }
        if CircleGrid::new(self.max_grid_size).is_err() || self.max_grid_size < self.grid_size {
            return invalid(format!(
                "max_grid_size {} must be a power of two >= grid_size",
                self.max_grid_size
            ));
        }
        if self.schedule.is_empty() {
            return invalid("schedule is empty".into());
        }
        if let Some(n) = self.schedule.iter().find(|&&n| n == 0 || n > self.grid_size / 4) {
            return invalid(format!(
                "schedule value {n} outside 1..={} (grid_size / 4)",
                self.grid_size / 4
            ));
        }
        let expr = self.expr()?;
        for name in expr.params() {
            if !self.params.contains_key(name) {
                return invalid(format!("parameter '{name}' has no value"));
            }
        }
        for (name, values) in &self.params {
            if !expr.params().contains(name) {
                return invalid(format!("parameter '{name}' does not occur in the symbol"));
            }
            if values.values().is_empty() {
                return invalid(format!("sweep list for '{name}' is empty"));
            }
            if values.values().iter().any(|v| !v.is_finite()) {
                return invalid(format!("non-finite value for '{name}'"));
            }
        }
        self.classifier().validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// All parameter points, the Cartesian product in name order.
    pub fn sweep(&self) -> Vec<Bindings> {
        let mut points = vec![Bindings::new()];
        for (name, values) in &self.params {
            points = points
                .into_iter()
                .flat_map(|b| {
                    values.values().iter().map(move |&v| {
                        let mut b = b.clone();
                        b.insert(name.clone(), v);
                        b
                    })
                })
                .collect();
        }
        points
    }

    pub fn classifier(&self) -> ClassifierConfig {
        let t = &self.tolerances;
        ClassifierConfig {
            grid_size: self.grid_size,
            max_grid_size: self.max_grid_size,
            schedule: self.schedule.clone(),
            margin: self.margin,
            k_frac: self.k_frac,
            unitary_tol: t.unitary,
            floor: t.invertibility_floor,
            refine_tol: t.refine,
            certificates: self.certificates,
            certificate_tol: CertificateTolerance {
                product: t.product,
                energy: t.energy,
                band: t.energy_band.unwrap_or(self.grid_size / 2),
            },
        }
    }

    /// Explicit setting, else the environment default.
    pub fn resolved_cache_dir(&self) -> Option<PathBuf> {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = AnalysisConfig::from_json(r#"{"symbol": "1"}"#).unwrap();
        assert_eq!(c, AnalysisConfig::new("1"));
        assert!(c.validate().is_ok());
        assert_eq!(c.sweep(), vec![Bindings::new()]);
    }

    #[test]
    fn sweep_is_cartesian_in_name_order() {
        let c = AnalysisConfig::from_json(r#"{"symbol": "a*x+b", "params": {"b": [1, 2], "a": 0.5}}"#).unwrap();
        assert!(c.validate().is_ok());
        let pts = c.sweep();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0]["a"], 0.5);
        assert_eq!((pts[0]["b"], pts[1]["b"]), (1.0, 2.0));
    }

    #[test]
    fn validation_errors() {
        let check = |json: &str| AnalysisConfig::from_json(json).and_then(|c| c.validate());
        assert!(matches!(check(r#"{"symbol": "1", "grid_size": 100}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(check(r#"{"symbol": "1", "schedule": []}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(check(r#"{"symbol": "1", "schedule": [2048]}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(check(r#"{"symbol": "a*x"}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            check(r#"{"symbol": "a*x", "params": {"a": []}}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            check(r#"{"symbol": "x", "params": {"a": 1}}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(check(r#"{"symbol": "sin(x"}"#), Err(ConfigError::Symbol(_))));
        assert!(matches!(check(r#"{"symbol": "1", "bogus": 1}"#), Err(ConfigError::Json(_))));
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = AnalysisConfig::new("(2+sin(x))*exp(i*a*x)");
        c.params.insert("a".into(), ParamValues::Sweep(vec![-0.5, 0.0, 0.5]));
        let back = AnalysisConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
