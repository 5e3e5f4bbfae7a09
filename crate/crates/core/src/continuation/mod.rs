//! Summation of the voltage series at `α = 1` and stopping rules.

mod convergence;
mod epsilon;
mod pade;

pub use convergence::{check_convergence, detect_nonexistence, max_change, Trend};
pub use epsilon::{AccelState, EpsilonTable};
pub use pade::{pade_matrix_method, RationalApproximant};
