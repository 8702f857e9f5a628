//! Grammar competition between L1 and L2 speakers.
//!
//! The crate is organised bottom-up:
//!
//! - [`learning`]: linear reward-penalty learning, its L2-biased variant and
//!   the closed-form moment results for single learners.
//! - [`environment`]: penalty probabilities produced by a mixed population
//!   and the reduction of advantages to the `(alpha, D, sigma)` triple.
//! - [`dynamics`]: the generational map, its continuous-time counterpart,
//!   stability of the origin, the bifurcation threshold and sweeps.
//! - [`abm`]: finite stochastic simulations of learners and cohorts.
//! - [`calibration`]: demographic records and interval estimates of the
//!   L2 speaker fraction.

// `!(x > 0.0)` is used deliberately so that NaN fails domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abm;
pub mod calibration;
pub mod dynamics;
pub mod environment;
mod error;
pub mod learning;
pub(crate) mod par;
pub mod stats;

pub use error::{ModelError, Result};
