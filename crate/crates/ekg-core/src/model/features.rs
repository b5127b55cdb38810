//! Dense float feature matrix with bit-exact binary persistence.
//!
//! On disk a store is an `EKGF` container:
//!
//! ```text
//! magic   4 bytes  "EKGF"
//! version u32 LE   currently 1
//! dim     u32 LE   columns
//! rows    u64 LE   rows
//! norm    u8       1 if rows are L2-normalized
//! data    rows × dim × f32 LE, row-major
//! ```
//!
//! Round-trips are byte-identical; the loader re-validates finiteness and,
//! when the flag is set, unit norms.

use std::io::{Read, Write};
use std::path::Path;

use super::numeric::{l2_norm, l2_normalize, ZERO_NORM_EPS};
use super::CoreError;

pub const EKGF_MAGIC: [u8; 4] = *b"EKGF";
pub const EKGF_VERSION: u32 = 1;

/// Row-major f32 matrix, one row per node or clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    rows: usize,
    data: Vec<f32>,
    normalized: bool,
}

impl FeatureStore {
    /// Builds a store from a flat row-major buffer.
    ///
    /// `normalized` asserts that every non-zero row already has unit norm;
    /// the claim is validated.
    pub fn new(dim: usize, data: Vec<f32>, normalized: bool) -> Result<Self, CoreError> {
        if dim == 0 {
            return Err(CoreError::Format("feature dim must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(CoreError::Format(format!(
                "data length {} is not a multiple of dim {dim}",
                data.len()
            )));
        }
        let store = Self {
            dim,
            rows: data.len() / dim,
            data,
            normalized,
        };
        store.validate()?;
        Ok(store)
    }

    /// Empty store with the given dimensionality.
    pub fn empty(dim: usize) -> Result<Self, CoreError> {
        Self::new(dim, Vec::new(), false)
    }

    /// Builds a store by stacking rows.
    pub fn from_rows(dim: usize, rows: &[Vec<f32>]) -> Result<Self, CoreError> {
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(CoreError::Format(format!(
                    "row {i} has length {}, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data, false)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Returns a copy with every row L2-normalized and the header flag set.
    pub fn normalized_copy(&self) -> Result<Self, CoreError> {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            data.extend_from_slice(&l2_normalize(self.row(i))?);
        }
        Ok(Self {
            dim: self.dim,
            rows: self.rows,
            data,
            normalized: true,
        })
    }

    /// Checks finiteness of every entry and, if flagged normalized, that
    /// every non-zero row has unit norm within 1e-5.
    pub fn validate(&self) -> Result<(), CoreError> {
        for (i, &x) in self.data.iter().enumerate() {
            if !x.is_finite() {
                return Err(CoreError::InvalidVector(format!(
                    "non-finite entry at row {}, col {}",
                    i / self.dim,
                    i % self.dim
                )));
            }
        }
        if self.normalized {
            for r in 0..self.rows {
                let norm = l2_norm(self.row(r));
                if norm >= ZERO_NORM_EPS && (norm - 1.0).abs() > 1e-5 {
                    return Err(CoreError::InvalidVector(format!(
                        "row {r} flagged normalized has norm {norm}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serializes the store into the EKGF byte layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(21 + self.data.len() * 4);
        out.extend_from_slice(&EKGF_MAGIC);
        out.extend_from_slice(&EKGF_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.push(u8::from(self.normalized));
        for &x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    /// Parses an EKGF byte buffer.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CoreError> {
        const HEADER: usize = 4 + 4 + 4 + 8 + 1;
        if bytes.len() < HEADER {
            return Err(CoreError::Format("EKGF header truncated".into()));
        }
        if bytes[0..4] != EKGF_MAGIC {
            return Err(CoreError::Format("bad EKGF magic".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != EKGF_VERSION {
            return Err(CoreError::Format(format!(
                "unsupported EKGF version {version}"
            )));
        }
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let rows = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let normalized = match bytes[20] {
            0 => false,
            1 => true,
            other => {
                return Err(CoreError::Format(format!(
                    "bad normalized flag {other}"
                )))
            }
        };
        if dim == 0 {
            return Err(CoreError::Format("EKGF dim must be positive".into()));
        }
        let expected = rows
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| CoreError::Format("EKGF size overflow".into()))?;
        let payload = &bytes[HEADER..];
        if payload.len() != expected {
            return Err(CoreError::Format(format!(
                "EKGF payload is {} bytes, expected {expected}",
                payload.len()
            )));
        }
        let mut data = Vec::with_capacity(rows * dim);
        for chunk in payload.chunks_exact(4) {
            data.push(f32::from_le_bytes(chunk.try_into().unwrap()));
        }
        let store = Self {
            dim,
            rows,
            data,
            normalized,
        };
        store.validate()?;
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CoreError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}
