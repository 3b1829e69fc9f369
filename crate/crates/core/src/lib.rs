//! # hypervec
//!
//! Bit-packed hyperdimensional computing (HDC) on the CPU.
//!
//! Binary hypervectors are stored as rows of a [`PackedBitMatrix`]: `D` logical
//! bits per row, packed LSB-first into 32-bit words. On top of the packed
//! kernels (XOR binding, rotation, horizontal/vertical popcount summation,
//! tiled transpose, majority binarization) the crate provides:
//!
//! - [`encoding`]: feature discretization, ID/Value codebook generation
//!   (random, scale-random, sandwich) and ID-Level / permutation / appending
//!   encoders.
//! - [`model`]: classical single-pass and online (distance-weighted, batched)
//!   HD classifiers with Hamming or cosine similarity.
//! - [`data`]: CSV ingestion, segment-aware cross-validation splits and
//!   factor subsampling of imbalanced datasets.
//! - [`eval`]: label smoothing, sample/episode metrics and stage timers.
//! - [`reference`]: a deliberately naive byte-per-bit implementation of every
//!   kernel and training path, used as a differential oracle and benchmark
//!   baseline.
//!
//! ```text
//! raw features ──discretize──▶ bins ──encode(ID ⊕ V, majority)──▶ H
//! H (per class) ──vertical sum──▶ accumulators ──majority──▶ class vectors
//! query H ──popcount(H ⊕ M)/D──▶ δ ──argmin──▶ label
//! ```

pub mod data;
pub mod encoding;
pub mod eval;
pub mod hypervector;
pub mod model;
pub mod reference;
mod seed;

pub use data::{Dataset, SplitPlan};
pub use encoding::{BindingStrategy, Codebook, Discretizer, GenerationStrategy};
pub use eval::EvalReport;
pub use hypervector::{BitRow, CountVector, PackedBitMatrix};
pub use model::{HdModel, Metric, ModelConfig, Prediction};
pub use seed::sub_seed;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-binary value {value} at row {row}, column {col}")]
    NonBinary { row: usize, col: usize, value: u8 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("count {count} at position {index} exceeds total {total}")]
    CountExceedsTotal { index: usize, count: u32, total: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("similarity undefined for an all-zero vector")]
    UndefinedSimilarity,

    #[error("{path}: line {line}, column '{column}': {message}")]
    Csv {
        path: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
