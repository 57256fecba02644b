//! Edgeworth expansions for self-normalized sums.
//!
//! Given i.i.d. symmetric observations `X_1, ..., X_n` with unit variance, the
//! self-normalized sum is `T_n = S_n / V_n` with `S_n = sum X_j` and
//! `V_n^2 = sum X_j^2`. This crate builds the Edgeworth-type approximations of
//! the distribution of `T_n`:
//!
//! * the marginal expansions `Phi + sum_r Q_r(x) n^{-r/2}` (CDF) and
//!   `phi + sum_r q_r(x) n^{-r/2}` (density), driven by the moments
//!   `mu_4, mu_6` of the law;
//! * the conditional expansions `Phi + sum_r P~_r(x)` and `phi + sum_r p~_r(x)`
//!   given the observed magnitudes `|X_j|`, driven by the conditional
//!   cumulant ratios `lambda~_{l,n}`;
//! * the matching characteristic-function expansions.
//!
//! Around the expansions sit the tools used to verify them numerically: a
//! symmetric-law catalog with moment/cumulant machinery
//! ([`distributions`]), closed-form `E[lambda~]` coefficients with Monte Carlo
//! counterparts ([`lambda_moments`]), a `T_n` simulator with mergeable
//! estimators and an exact oracle density for gaussian inputs ([`simulate`]),
//! error metrics and rate fits ([`metrics`]), and the entropy-expansion
//! coefficients `c_l` ([`entropy_coeffs`]).
//!
//! All numerics are in `f64`; quadrature lives in [`special_math`].

#![forbid(unsafe_code)]
// Reference constants (rational-approximation coefficients, frozen oracle
// values) keep their full published precision even where it exceeds f64.
#![allow(clippy::excessive_precision)]

pub mod distributions;
pub mod entropy_coeffs;
pub mod expansion;
pub mod lambda_moments;
pub mod metrics;
pub mod simulate;
pub mod special_math;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Expansion or coefficient order outside the implemented range.
    #[error("unsupported order {order} for {what} (supported: {supported})")]
    UnsupportedOrder { what: &'static str, order: usize, supported: &'static str },

    /// A required moment is missing from the supplied moment sequence.
    #[error("moment mu_{order} required but only moments up to mu_{available} were supplied")]
    MissingMoment { order: usize, available: usize },

    /// Law identifier not in the catalog.
    #[error("unknown law id {id:?} (valid: gaussian, uniform, laplace, gauss_mix)")]
    UnknownLaw { id: String },

    /// Law cannot perform the requested operation (e.g. sampling a
    /// moments-only custom law).
    #[error("law {id:?} does not support {what}")]
    LawUnsupported { id: String, what: &'static str },

    /// Invalid argument (empty input, non-finite value, bad parameter).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Quadrature failed to converge; `best` is the last estimate.
    #[error("quadrature did not converge (best estimate {best:e}, est. error {est_error:e})")]
    QuadratureNonConvergent { best: f64, est_error: f64 },

    /// A hard mathematical invariant was violated at runtime.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
