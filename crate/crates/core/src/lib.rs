//! Stability invariants of polarized projective varieties and their
//! degenerations.
//!
//! * [`laurent`]: exact matrix loops and their `L · t^A · R` normal form.
//! * [`weights`]: weight polynomials, Chow and Futaki invariants of
//!   equivariant degenerations.
//! * [`chow`]: Chow weights from pole orders, moment matrices of cycles,
//!   and the balancing iteration.
//! * [`bergman`]: density of states of circle-invariant metrics on the
//!   sphere and its large-`k` expansion.

pub mod acceptance;
pub mod bergman;
pub mod chow;
pub mod cli;
pub mod error;
pub mod laurent;
pub mod quad;
pub mod rational;
pub mod weights;

pub use error::{Error, Result};
