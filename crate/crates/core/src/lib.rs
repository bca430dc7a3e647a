//! FARO loss and the FANGS search algorithm for feature allocation matrices.
//!
//! A feature allocation over `n` items is represented by an `n x K` binary
//! matrix `Z`: rows are items, columns are features, and `Z[i][j] = 1` means
//! item `i` possesses feature `j`. Column order and all-zero columns carry no
//! information, so two matrices are equivalent when they agree up to a column
//! permutation and zero-column padding.
//!
//! [`faro::faro_loss`] compares two such matrices: the narrower one is padded
//! with zero columns to a common width, a column-vs-column generalized Hamming
//! cost matrix is built, and the minimum-cost column alignment is found with a
//! Jonker-Volgenant linear assignment solver. [`fangs::fangs`] searches for
//! the binary matrix minimizing the Monte Carlo expected FARO loss over a set
//! of posterior samples, with the draws method, SIFA, and pairwise-similarity
//! scoring available as baselines.
//!
//! ## Loss direction
//!
//! Losses are directional unless `a = b = 1`. Throughout this crate the FIRST
//! argument is the candidate/estimate and the SECOND is the sample (truth):
//! penalty `a` prices an entry asserted by the estimate but absent in the
//! sample, and `b = 2 - a` prices the reverse. Under this convention the
//! FANGS initialization threshold `a/2` is the pointwise expected-loss
//! minimizer: setting an estimate cell to 1 costs `a * (1 - p)` and to 0
//! costs `b * p`, so 1 wins exactly when the proportion `p` exceeds `a/2`.

#![forbid(unsafe_code)]

pub mod fangs;
pub mod faro;
pub mod hamming;
pub mod io;
pub mod lap;
pub mod matrix;
#[doc(hidden)]
pub mod test_fixtures;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use fangs::{SearchConfig, SearchResult};
pub use faro::{expected_loss, faro_loss, FaroResult};
pub use hamming::{cost_matrix, gen_hamming, CostMatrix, LossParams};
pub use lap::{brute_force_lap, solve_lap, Assignment};
pub use matrix::{AdjacencyMatrix, FeatureAllocation, SampleSet};
