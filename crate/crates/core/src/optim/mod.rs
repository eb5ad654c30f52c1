//! Optimisation machinery shared by the case studies.
//!
//! * [`ascend`]: Armijo line-search ascent on the complex circle, on complex
//!   Euclidean space, or on patterned real symmetric matrices;
//! * [`alternating_optimize`]: block-coordinate driver with a monotonicity guard;
//! * [`penalty_solve`]: quadratic-penalty method for inequality constraints;
//! * [`exhaustive_select`] and [`branch_and_bound`]: discrete mode selection.

mod ao;
mod ascent;
pub mod gradcheck;
mod manifold;
mod penalty;
mod selection;

pub use ao::{alternating_optimize, AoOptions, AoReport, Block, BlockViolation};
pub use ascent::{ascend, AscentOptions, SmoothProblem};
pub use manifold::{retract_circle, ComplexCircle, ComplexEuclidean, Manifold, SymmetricMatrices};
pub use penalty::{max_violation, penalty_solve, ConstrainedProblem, PenaltyReport, PenaltySchedule};
pub use selection::{
    branch_and_bound, exhaustive_select, full_tree_nodes, selection_space, BnbOptions, InnerOutcome, SelectionOptions,
    SelectionProblem, SelectionReport, DEFAULT_ENUMERATION_CAP,
};

/// Outcome of a continuous solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<P> {
    pub point: P,
    pub objective: f64,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest relative constraint violation (zero for unconstrained solves).
    pub max_violation: f64,
}
