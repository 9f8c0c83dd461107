//! Gaussian process regression over negotiation turns.

pub mod bench;
mod fit;
mod kernel;
mod linalg;
mod model;

use thiserror::Error;

pub use fit::{
    fit_hyperparams, log_marginal_likelihood, nelder_mead, LENGTHSCALE_BOUNDS, NOISE_BOUNDS,
    PERIOD_BOUNDS, RQ_ALPHA_BOUNDS,
};
pub use kernel::{Kernel, KernelFamily, DEFAULT_NOISE};
pub use linalg::Cholesky;
pub use model::{gram_matrix, GprModel, Prediction, ScaledGp, JITTER_LADDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GprError {
    #[error("non-finite input")]
    NonFinite,
    #[error("{xs} inputs but {ys} outputs")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("need at least 2 observations, got {0}")]
    TooFewPoints(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("covariance is not positive definite even at maximum jitter")]
    NotPositiveDefinite,
}
