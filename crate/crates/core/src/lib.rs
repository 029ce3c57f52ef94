//! Assembly-line balancing as a mixed-integer program.
//!
//! [`milp`] is a self-contained solver (two-phase simplex plus best-bound
//! branch-and-bound) generic over [`scalar::Scalar`]. [`line_model`] turns a
//! line description into a MILP and back, [`planning`] holds the analyses
//! around it, [`report_io`] reads scenarios and writes reports, and [`cli`]
//! wires everything into the `linebal` binary.

pub mod cli;
pub mod fixtures;
pub mod line_model;
pub mod milp;
pub mod planning;
pub mod report_io;
pub mod scalar;

use num_rational::BigRational;

pub use line_model::{optimize, BalancingPlan, BalancingScenario, ModelError};
pub use milp::{
    brute_force_milp, solve_lp, solve_milp, LinearConstraint, LpSolution, LpStatus, MilpError, MilpProblem,
    MilpSolution, MilpStatus, Relation, SolveOptions,
};
pub use scalar::Scalar;

pub type MilpProblemF64 = MilpProblem<f64>;
pub type MilpSolutionF64 = MilpSolution<f64>;
pub type MilpProblemF32 = MilpProblem<f32>;
pub type MilpSolutionF32 = MilpSolution<f32>;
pub type ExactMilpProblem = MilpProblem<BigRational>;
pub type ExactMilpSolution = MilpSolution<BigRational>;
