//! Backward (reverse-time) realizations of stationary linear stochastic models.
//!
//! Given a stable, reachable model driven by normalized white noise, build the
//! all-pass extension that maps its input to a dual input, the reverse-time
//! model producing the same output from that dual input, and the checks that
//! tie them together algebraically and on sample paths.

// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allpass;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod matops;
pub mod model;
pub mod reversal;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
