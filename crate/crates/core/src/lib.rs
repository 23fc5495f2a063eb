//! Exact finite-n and asymptotic cumulants of conductance, shot noise and the
//! Wigner delay time for chaotic cavities in the three Dyson classes.

pub mod algebra;
pub mod asymptotics;
pub mod conductance;
pub mod ensembles;
pub mod error;
pub mod jointcsn;
mod lattice;
pub mod montecarlo;
pub mod verify;
pub mod wigner;

pub use algebra::{Rational, TruncatedSeries};
pub use ensembles::{DelayParams, TransportParams};
pub use error::{Error, Result};
