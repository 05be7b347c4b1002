//! Diagnostics on iterates and traces: consensus decomposition, distances,
//! empirical rates, envelope verification and the scalar inequalities behind
//! the tuner.

mod appendix;
mod bound;
mod consensus;
mod rate;

pub use appendix::{check_appendix1, check_appendix2, Appendix2Outcome, InequalityCheck};
pub use bound::{verify_bound, BoundReport, BOUND_SLACK};
pub use consensus::{consensus_split, distance_sq, ConsensusSplit};
pub use rate::{fit_rate, fit_rate_window, RateFit};
