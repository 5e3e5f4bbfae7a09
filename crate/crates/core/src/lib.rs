//! Load flow for radial and weakly meshed distribution feeders.
//!
//! The centerpiece is the holomorphic embedding load flow: voltages are
//! expanded as power series in an embedding parameter, one linear solve per
//! series order, and the series is summed at the target point by diagonal
//! rational approximation. Each order's solve is a shunt-free, constant
//! current load flow, so on distribution feeders it can be done with a
//! single backward/forward sweep ([`solvers::Step4Backend::Sweep`]) or one
//! application of the direct-load-flow matrix ([`solvers::Step4Backend::Dlf`])
//! instead of a sparse LU solve.
//!
//! Baseline methods (backward/forward sweep, direct approach, implicit Z-bus
//! and Newton–Raphson) share the same network model, and [`bench`] measures
//! all of them with a per-step timing breakdown.

pub mod bench;
pub mod continuation;
pub mod dense;
mod error;
pub mod ingest;
pub mod netmodel;
pub mod series;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
