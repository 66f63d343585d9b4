//! Classical and log-truncated maximum likelihood for one-parameter
//! families.
//!
//! The crate is organised bottom-up:
//!
//! * [`families`]: negative log-likelihoods, score derivatives, Fisher
//!   information, Lipschitz envelopes and samplers.
//! * [`norms`]: θ₁/θ₂ moment-ratio norms from moment oracles.
//! * [`concentration`]: sub-Gaussian and sub-Gamma tail calculators for
//!   functions of independent variables.
//! * [`mle`]: the classical MLE, its bias term and concentration/oracle
//!   bounds.
//! * [`truncated`]: the log-truncated Z-estimator, tuning of β and its
//!   deviation bounds.
//! * [`harness`]: deterministic Monte Carlo experiments validating all of
//!   the above.
//!
//! With the default `parallel` feature, Monte Carlo trials run on rayon;
//! without it they run sequentially. Results are identical either way.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod error;
pub mod families;
pub mod harness;
pub mod mle;
pub mod norms;
pub mod numeric;
pub mod truncated;

pub use error::{Error, Result};
