//! Exact solving of pure 0-1 integer programs with integer coefficients.
//!
//! [`CoreGuidedSolver`] is the production backend; [`BranchAndBound`] is a
//! plain depth-first search with the same tie-breaking, kept for small
//! models and cross-checks. Both return the optimum that is
//! lexicographically smallest in variable order.

mod hitting;
mod lp;
mod model;
mod propagate;
mod solver;

pub use lp::{export_lp, sanitize_name};
pub use model::{BinVar, IlpModel, LinearConstraint, ModelError, Relation, VarId};
pub use solver::{
    solve, BinarySolver, BranchAndBound, CoreGuidedSolver, Incumbent, SolveError, SolveResult,
    SolveStats, SolverLimits,
};
