//! signalkit: computing, approximating, and stress-testing optimal signaling
//! schemes in Bayesian zero-sum games and Bayesian network routing games.

pub mod cli;
pub mod graph;
pub mod io;
pub mod lp;
pub mod parallel;
pub mod pclique;
pub mod routing;
pub mod scalar;
pub mod security;
pub mod signaling;
pub mod zerosum;

/// Exact rational scalar used by oracle solvers and gadget identities.
pub type Rational = num_rational::BigRational;
