//! Chow weights from pole orders, moment matrices of curve cycles and the
//! balancing iteration.

mod balance;
pub mod cycle;
pub mod form;
mod moment;

pub use balance::{balance_iterate, BalanceReport};
pub use cycle::{conic_cycle, rational_normal_curve, Component, ProjectiveCycle};
pub use form::{central_fiber, chow_weight, standard_conic, HypersurfaceForm};
pub use moment::{
    check_chow_inequality, conic_inequality, moment_matrix, pairing, pairing_matrix, raw_moments, trace_norm,
    HermitianForm, InequalityReport, MomentEstimate, RawMoments,
};
