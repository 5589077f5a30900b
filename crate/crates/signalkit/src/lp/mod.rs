//! Dense linear programming and the central-cut ellipsoid method.

mod ellipsoid;
mod simplex;

pub use ellipsoid::{ellipsoid_feasibility, Cut, EllipsoidError, EllipsoidOutcome, SeparationAnswer};
pub use simplex::{solve_lp, LinearProgram, LpError, LpSolution, LpStatus, RowSense, Sense};

/// Default primal feasibility tolerance for float LPs.
pub const FEAS_TOL: f64 = 1e-9;
/// Default tolerance on the primal/dual objective gap.
pub const DUALITY_TOL: f64 = 1e-7;
