//! Spatiotemporal event knowledge-graph engine.
//!
//! The crate mines navigation events out of per-frame classification streams,
//! stores them as a directed multimodal graph, and answers coarse-to-fine
//! retrieval queries whose results feed an attention-based fusion block.
//!
//! Module map:
//! - [`model`] — shared domain types plus the numeric primitives
//!   (normalization, cosine similarity, Shannon entropy).
//! - [`segment`] — frame labeling, representative-frame selection, and
//!   event-clip extraction over precomputed similarity matrices.
//! - [`annotate`] — pluggable two-stage annotation clients, validation of
//!   event/scene records, and corpus assembly.
//! - [`store`] — graph construction, bit-exact persistence, statistics.
//! - [`retrieval`] — exact top-K vector search, causal subgraph expansion,
//!   kind-constrained fine retrieval, tail selection, and the brute-force
//!   scan used as the reference path.
//! - [`fusion`] — instruction augmentation and the knowledge-guided
//!   attention block with analytic gradients.
//! - [`harness`] — synthetic house worlds, event mining from walkthroughs,
//!   and the baseline-vs-knowledge episode benchmark.
//! - [`synth`] — seeded generators for synthetic corpora (benchmarks, tests).

pub mod annotate;
pub mod fusion;
pub mod harness;
pub mod model;
pub mod retrieval;
pub mod segment;
pub mod store;
pub mod synth;
pub mod util;

pub use model::{
    cosine_sim, l2_normalize, shannon_entropy, CoreError, EventGraph, EventKind, EventRecord,
    FeatureStore, ProbMatrix,
};
