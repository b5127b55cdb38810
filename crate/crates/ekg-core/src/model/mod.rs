//! Shared domain types and the numeric primitives everything else builds on.

mod features;
mod graph;
mod numeric;
mod prob;
mod record;

pub use features::{FeatureStore, EKGF_MAGIC, EKGF_VERSION};
pub use graph::{EventGraph, GraphViolation};
pub use numeric::{cosine_sim, dot_f64, l2_normalize, shannon_entropy};
pub use prob::ProbMatrix;
pub use record::{EventKind, EventRecord};

use thiserror::Error;

/// Errors raised by the shared types and numeric primitives.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A vector contained NaN or infinite entries.
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    /// Two vectors that must share a dimension do not.
    #[error("dimension mismatch: left {left}, right {right}")]
    DimMismatch { left: usize, right: usize },
    /// A probability vector had negative mass or did not sum to one.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// A binary payload did not parse as the expected format.
    #[error("format error: {0}")]
    Format(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A graph failed its structural invariants.
    #[error("graph invariant violated: {0}")]
    Invariant(GraphViolation),
}
