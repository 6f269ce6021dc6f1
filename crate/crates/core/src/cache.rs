//! On-disk cache of Gram and orthonormalization matrices.
//!
//! Each matrix is a `BORBGRAM` file: the 8-byte magic, rows and columns as
//! little-endian u64, then row-major entries as little-endian f64 pairs
//! `(re, im)`. A `<hash>.meta.json` sidecar holds the full key and the Gram
//! error estimate, so hash collisions read as misses.

use crate::error::Result;
use crate::hash::hex;
use crate::model::OrbifoldModel;
use crate::quadrature::QuadratureConfig;
use crate::section_space::{enumerate_basis, space_key, CMatrix, SectionSpace, SpaceKey};
use log::{debug, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const MAGIC: &[u8; 8] = b"BORBGRAM";

pub fn encode_matrix(m: &CMatrix) -> Vec<u8> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(24 + 16 * r * c);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(r as u64).to_le_bytes());
    out.extend_from_slice(&(c as u64).to_le_bytes());
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Decode a `BORBGRAM` buffer; `None` on bad magic, truncation or trailing bytes.
pub fn decode_matrix(bytes: &[u8]) -> Option<CMatrix> {
    if bytes.len() < 24 || &bytes[..8] != MAGIC {
        return None;
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let (r, c) = (usize::try_from(word(8)).ok()?, usize::try_from(word(16)).ok()?);
    let len = r.checked_mul(c)?.checked_mul(16)?.checked_add(24)?;
    if bytes.len() != len {
        return None;
    }
    let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    Some(CMatrix::from_fn(r, c, |i, j| {
        let k = 24 + 16 * (i * c + j);
        Complex64::new(f(k), f(k + 8))
    }))
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    key: SpaceKey,
    gram_error: f64,
}

#[derive(Debug, Clone)]
pub struct SpaceCache {
    dir: PathBuf,
}

impl SpaceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SpaceCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &SpaceKey, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}.{suffix}", hex(key.hash())))
    }

    /// Stored `(gram, ortho, gram_error)` for `key`, or `None` with a
    /// warning when any file is missing a match or unreadable.
    pub fn load(&self, key: &SpaceKey) -> Option<(CMatrix, CMatrix, f64)> {
        let meta_path = self.path(key, "meta.json");
        let meta = fs::read(&meta_path).ok()?;
        let meta: Meta = match serde_json::from_slice(&meta) {
            Ok(m) => m,
            Err(e) => {
                warn!("cache metadata {} unreadable: {e}", meta_path.display());
                return None;
            }
        };
        if &meta.key != key {
            debug!("cache key collision at {}", meta_path.display());
            return None;
        }
        let mut mats = Vec::with_capacity(2);
        for suffix in ["gram.bin", "ortho.bin"] {
            let path = self.path(key, suffix);
            match fs::read(&path).ok().as_deref().and_then(decode_matrix) {
                Some(m) => mats.push(m),
                None => {
                    warn!("cache file {} is missing or corrupt, recomputing", path.display());
                    return None;
                }
            }
        }
        let ortho = mats.pop()?;
        let gram = mats.pop()?;
        Some((gram, ortho, meta.gram_error))
    }

    pub fn store(&self, space: &SectionSpace) -> Result<()> {
        let key = space.key();
        fs::write(self.path(&key, "gram.bin"), encode_matrix(&space.gram))?;
        fs::write(self.path(&key, "ortho.bin"), encode_matrix(&space.ortho_coeffs))?;
        let meta = Meta {
            key: key.clone(),
            gram_error: space.gram_error,
        };
        fs::write(self.path(&key, "meta.json"), serde_json::to_vec(&meta)?)?;
        Ok(())
    }

    /// The space for `(model, p, twist)` at resolution `cfg`, and whether it
    /// came from the cache.
    pub fn get_or_build(
        &self,
        model: Arc<OrbifoldModel>,
        p: u32,
        twist: bool,
        cfg: &QuadratureConfig,
    ) -> Result<(SectionSpace, bool)> {
        let exponents = enumerate_basis(&model, p, twist)?;
        let key = space_key(&model, p, twist, &exponents, cfg);
        if let Some((gram, ortho, err)) = self.load(&key) {
            if let Ok(s) = SectionSpace::from_parts(model.clone(), p, twist, exponents.clone(), gram, ortho, err, cfg) {
                return Ok((s, true));
            }
            warn!("cached matrices for p={p} have the wrong shape, recomputing");
        }
        let space = SectionSpace::with_exponents(model, p, twist, exponents, cfg)?;
        self.store(&space)?;
        Ok((space, false))
    }
}
