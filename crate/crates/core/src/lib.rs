//! Direct-method solver and analyzer for second-order variational problems
//! `min ∫_a^b L(t, x, xd, xdd) dt` with fixed values and slopes at both ends.

pub mod expr;
pub mod quadrature;
pub mod trajectory;

pub use expr::{EvalPoint, ExprError, LagrangianExpr, Partials};
pub use trajectory::{ArcLengthChart, BoundaryData, Curve, Problem, State, Trajectory, TrajectoryError};
pub mod solver;
pub mod conditions;
pub mod regularity;
pub mod lavrentiev;

pub use solver::{SolveOptions, SolveReport, SolverError};
pub use conditions::{dbr_profile, el_profile, f_partials, ConditionError, ConditionProfile, ReparamPoint};
