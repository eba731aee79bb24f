//! Random linear measurements with subgaussian rows, and what they can do:
//!
//! - sample isotropic subgaussian measurement matrices ([`ensemble`]) with
//!   reproducible counter-based randomness ([`rng`]),
//! - recover sparse vectors exactly by l1 minimization and reconstruct
//!   vectors in convex sets approximately by projected gradient descent
//!   ([`recover`], backed by the dense simplex solver in [`lp`]),
//! - measure the geometric quantities that govern both: Gaussian mean
//!   width, fixed-point radii, and sparse-cap decompositions ([`geometry`]),
//! - audit two-sided isometry on sparse caps and the scaling of the
//!   empirical process sup |Z_f| ([`empirical`]),
//! - certify faces of random polytopes spanned by the measurement columns
//!   and scan for m-neighborliness ([`polytope`]).
//!
//! The [`harness`] module drives seeded experiment sweeps and writes CSV;
//! the `subgauss` binary exposes them as subcommands. Every operation is a
//! pure function of its inputs and an explicit [`rng::RngState`], so any
//! result can be reproduced from the seed recorded in the output header.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod empirical;
pub mod ensemble;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod recover;
pub mod rng;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("enumeration guard exceeded: {0} queries requested, limit {1}")]
    EnumerationGuard(u64, u64),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
