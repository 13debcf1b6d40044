//! Sparse recovery over a box, two ways:
//!
//! * **MCPS²** — minimax-concave penalized shrinkage:
//!   `min ½‖y − Ax‖₂² + λ(d‖x‖₁ − ½‖x‖₂²)` over `x ∈ [−d, d]ⁿ`,
//! * **box-constrained Lasso** —
//!   `min ½‖y − Ax‖₂² + λ‖x‖₁` over the same box,
//!
//! for compressed measurements `y = A·x̃ + η` with `m < n` and a k-sparse
//! ground truth `x̃`. The concave penalty `d‖x‖₁ − ½‖x‖₂²` levels off at
//! magnitude `d`, which weakens the irrepresentability requirement that exact
//! support recovery places on `A` compared to the Lasso.
//!
//! The crate has three layers:
//!
//! * [`problem`] — instance model, seeded random generation, objectives;
//! * [`conditions`] — certificates for exact support recovery: the
//!   irrepresentability constant, Lasso sign/dual conditions, the MCPS²
//!   candidate minimizer with its local- and global-optimality checks, and a
//!   sampling estimator for restricted eigenvalues;
//! * [`solvers`] / [`metrics`] / [`harness`] — ADMM for both objectives, an
//!   exact brute-force oracle for tiny instances, recovery scoring, and a
//!   deterministic Monte Carlo harness that writes CSV/SVG reports.
//!
//! Everything downstream of a seed is deterministic: generation uses a
//! portable ChaCha8 stream, experiment trials derive their seeds from a
//! master seed, and repeated runs byte-reproduce `rows.csv`.

pub mod conditions;
pub mod harness;
pub mod metrics;
pub mod problem;
pub mod solvers;

mod charts;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Rejected configuration or argument (dimensions, ranges, grids).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Support columns numerically rank-deficient: smallest singular value
    /// below 1e-10 times the largest.
    #[error("support columns are rank-deficient (sigma_min = {sigma_min:.3e}, sigma_max = {sigma_max:.3e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    /// λ must stay strictly below σ_min(A_SᵀA_S) for the restricted problem
    /// to remain convex and the candidate-minimizer system solvable.
    #[error("lambda = {lambda} is not below sigma_min(A_S^T A_S) = {sigma_min_sq:.6e}")]
    LambdaTooLarge { lambda: f64, sigma_min_sq: f64 },

    /// Solver-level failure (factorization, unmet guard).
    #[error("solver: {0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    /// A report or data file did not parse back into the expected shape.
    #[error("malformed file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
