//! On-disk cache of transplanted Fourier coefficients.
//!
//! Entry layout: magic, `M` and the `M` coefficients as little-endian `f64`
//! pairs, followed by the SHA-256 of everything before it.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use whh_core::dsl::{Bindings, SymbolExpr};
use whh_core::grid::CircleGrid;
use whh_core::hardy::FourierSeries;

const MAGIC: &[u8; 8] = b"WHHCOEF1";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    /// Hash of the canonical symbol text, the bindings (bit patterns) and `M`.
    pub fn new(expr: &SymbolExpr, bindings: &Bindings, m: usize) -> Self {
        let mut h = Sha256::new();
        h.update(expr.canonical().as_bytes());
        h.update([0]);
        for (name, v) in bindings {
            h.update(name.as_bytes());
            h.update(b"=");
            h.update(v.to_bits().to_le_bytes());
            h.update([0]);
        }
        h.update((m as u64).to_le_bytes());
        CacheKey(hex::encode(h.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientCache {
    dir: PathBuf,
}

impl CoefficientCache {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(CoefficientCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.bin", key.as_str()))
    }

    /// Atomic write: temp file in the cache directory, then rename.
    pub fn store(&self, key: &CacheKey, series: &FourierSeries) -> std::io::Result<()> {
        let coeffs = series.as_slice();
        let mut bytes = Vec::with_capacity(16 + 16 * coeffs.len() + 32);
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&(coeffs.len() as u64).to_le_bytes());
        for c in coeffs {
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
        let digest = Sha256::digest(&bytes);
        bytes.extend_from_slice(&digest);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }

    /// `None` on a miss; corrupt entries are reported and treated as misses.
    pub fn load(&self, key: &CacheKey, grid: CircleGrid) -> Option<FourierSeries> {
        let path = self.path(key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cache entry {} unreadable ({e}), recomputing", path.display());
                return None;
            }
        };
        match decode(&bytes, grid) {
            Ok(series) => Some(series),
            Err(why) => {
                log::warn!("cache entry {} is corrupt ({why}), recomputing", path.display());
                None
            }
        }
    }
}

fn decode(bytes: &[u8], grid: CircleGrid) -> Result<FourierSeries, String> {
    let m = grid.len();
    let expected = 16 + 16 * m + 32;
    if bytes.len() != expected {
        return Err(format!("length {} instead of {expected}", bytes.len()));
    }
    let (body, digest) = bytes.split_at(expected - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch".into());
    }
    if &body[..8] != MAGIC {
        return Err("bad magic".into());
    }
    let f = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().expect("8 bytes"));
    if u64::from_le_bytes(body[8..16].try_into().expect("8 bytes")) != m as u64 {
        return Err("grid size mismatch".into());
    }
    let coeffs = (0..m)
        .map(|k| Complex64::new(f(16 + 16 * k), f(24 + 16 * k)))
        .collect();
    FourierSeries::from_vec(grid, coeffs).map_err(|e| e.to_string())
}
