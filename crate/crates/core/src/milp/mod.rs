//! Exact mixed-integer linear programming for small dense models.
//!
//! Problems are always minimizations of the form
//!
//! ```text
//! minimize    c^T x
//! subject to  a_i^T x (<= | >= | =) b_i
//!             l <= x <= u
//!             x_j integral for flagged j
//! ```
//!
//! LP relaxations are solved by a dense two-phase tableau simplex
//! ([`solve_lp`]); integrality is enforced by best-bound branch-and-bound
//! ([`solve_milp`]). [`brute_force_milp`] enumerates the integer lattice and
//! exists as an independent oracle for testing.

mod branch;
mod brute;
mod simplex;

pub use branch::solve_milp;
pub use brute::{brute_force_milp, MAX_LATTICE_POINTS};
pub use simplex::solve_lp;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "le")]
    LessEq,
    #[serde(rename = "ge")]
    GreaterEq,
    #[serde(rename = "eq")]
    Equal,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::LessEq => "<=",
            Relation::GreaterEq => ">=",
            Relation::Equal => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    pub coefficients: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> LinearConstraint<T> {
    pub fn new(coefficients: Vec<T>, relation: Relation, rhs: T) -> Self {
        LinearConstraint { coefficients, relation, rhs }
    }

    pub fn le(coefficients: Vec<T>, rhs: T) -> Self {
        Self::new(coefficients, Relation::LessEq, rhs)
    }

    pub fn ge(coefficients: Vec<T>, rhs: T) -> Self {
        Self::new(coefficients, Relation::GreaterEq, rhs)
    }

    pub fn eq(coefficients: Vec<T>, rhs: T) -> Self {
        Self::new(coefficients, Relation::Equal, rhs)
    }

    pub fn activity(&self, values: &[T]) -> T {
        self.coefficients
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
    }

    /// Amount by which `values` violate this row (zero when satisfied).
    pub fn violation(&self, values: &[T]) -> T {
        let lhs = self.activity(values);
        let zero = T::zero();
        let excess = lhs - self.rhs.clone();
        match self.relation {
            Relation::LessEq => max(excess, zero),
            Relation::GreaterEq => max(-excess, zero),
            Relation::Equal => excess.abs(),
        }
    }
}

/// A minimization MILP. Every vector is indexed by variable.
///
/// `upper_bounds[j] == None` means the variable is unbounded above. Lower
/// bounds must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem<T> {
    pub costs: Vec<T>,
    pub constraints: Vec<LinearConstraint<T>>,
    pub lower_bounds: Vec<T>,
    pub upper_bounds: Vec<Option<T>>,
    pub integral: Vec<bool>,
}

impl<T: Scalar> MilpProblem<T> {
    /// A problem over `costs.len()` continuous, non-negative, unbounded variables.
    pub fn new(costs: Vec<T>) -> Self {
        let n = costs.len();
        MilpProblem {
            costs,
            constraints: Vec::new(),
            lower_bounds: vec![T::zero(); n],
            upper_bounds: vec![None; n],
            integral: vec![false; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn with_constraint(mut self, constraint: LinearConstraint<T>) -> Self {
        self.constraints.push(constraint);
        self
    }

    pub fn with_bounds(mut self, var: usize, lower: T, upper: Option<T>) -> Self {
        self.lower_bounds[var] = lower;
        self.upper_bounds[var] = upper;
        self
    }

    pub fn with_all_integral(mut self) -> Self {
        self.integral.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn objective_value(&self, values: &[T]) -> T {
        self.costs
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (c, x)| acc + c.clone() * x.clone())
    }

    /// Largest violation over all constraints and bounds.
    pub fn max_violation(&self, values: &[T]) -> T {
        let mut worst = T::zero();
        for c in &self.constraints {
            worst = max(worst, c.violation(values));
        }
        for (j, x) in values.iter().enumerate() {
            worst = max(worst, self.lower_bounds[j].clone() - x.clone());
            if let Some(u) = &self.upper_bounds[j] {
                worst = max(worst, x.clone() - u.clone());
            }
        }
        worst
    }

    /// Checks the structural invariants. Called by every solver entry point.
    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.num_vars();
        let invalid = |field: &str, reason: String| MilpError::Invalid { field: field.to_string(), reason };
        if self.lower_bounds.len() != n {
            return Err(invalid("lower_bounds", format!("expected {n} entries, found {}", self.lower_bounds.len())));
        }
        if self.upper_bounds.len() != n {
            return Err(invalid("upper_bounds", format!("expected {n} entries, found {}", self.upper_bounds.len())));
        }
        if self.integral.len() != n {
            return Err(invalid("integral", format!("expected {n} entries, found {}", self.integral.len())));
        }
        if let Some(j) = self.costs.iter().position(|c| !c.is_finite()) {
            return Err(invalid("costs", format!("entry {j} is not finite")));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(invalid(
                    "constraints",
                    format!("row {i} has {} coefficients, expected {n}", c.coefficients.len()),
                ));
            }
            if c.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(invalid("constraints", format!("row {i} has a non-finite coefficient")));
            }
            if !c.rhs.is_finite() {
                return Err(invalid("constraints", format!("row {i} has a non-finite rhs")));
            }
        }
        for j in 0..n {
            let lo = &self.lower_bounds[j];
            if !lo.is_finite() {
                return Err(invalid("lower_bounds", format!("entry {j} is not finite")));
            }
            if let Some(up) = &self.upper_bounds[j] {
                if !up.is_finite() {
                    return Err(invalid("upper_bounds", format!("entry {j} is not finite; use no bound instead")));
                }
                if lo > up {
                    return Err(invalid("upper_bounds", format!("entry {j} lies below its lower bound")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    pub max_nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { feasibility_tol: 1e-7, integrality_tol: 1e-6, max_nodes: 100_000 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), MilpError> {
        let bad = |field: &str, reason: &str| {
            Err(MilpError::Invalid { field: field.to_string(), reason: reason.to_string() })
        };
        if !(self.feasibility_tol > 0.0 && self.feasibility_tol.is_finite()) {
            return bad("feasibility_tol", "must be strictly positive");
        }
        if !(self.integrality_tol > 0.0 && self.integrality_tol < 0.5) {
            return bad("integrality_tol", "must lie in (0, 0.5)");
        }
        if self.max_nodes == 0 {
            return bad("max_nodes", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    NodeLimit,
}

impl fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::NodeLimit => "node limit",
        })
    }
}

/// Result of an LP relaxation. `values` and `objective` are only populated
/// when `status` is [`LpStatus::Optimal`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub values: Vec<T>,
    pub objective: Option<T>,
}

impl<T> LpSolution<T> {
    pub(crate) fn without_point(status: LpStatus) -> Self {
        LpSolution { status, values: Vec::new(), objective: None }
    }
}

/// Result of a MILP solve. With [`MilpStatus::NodeLimit`] the values hold the
/// best incumbent, if one was found.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution<T> {
    pub status: MilpStatus,
    pub values: Vec<T>,
    pub objective: Option<T>,
    pub nodes_explored: u64,
    /// Objective of the root LP relaxation. `None` when no relaxation was
    /// solved (brute force) or the root was infeasible.
    pub root_lp_bound: Option<T>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("invalid problem field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("LP relaxation is unbounded; integer optimum cannot be certified")]
    UnboundedRelaxation,
    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),
    #[error("integer lattice has {size} points, above the limit of {limit}")]
    LatticeTooLarge { size: u128, limit: u128 },
}

pub(crate) fn max<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_the_offending_field() {
        let mut p = MilpProblem::new(vec![1.0, 2.0]);
        p.lower_bounds.pop();
        match p.validate() {
            Err(MilpError::Invalid { field, .. }) => assert_eq!(field, "lower_bounds"),
            other => panic!("unexpected {other:?}"),
        }

        let p: MilpProblem<f64> = MilpProblem::new(vec![1.0, f64::NAN]);
        assert!(matches!(p.validate(), Err(MilpError::Invalid { field, .. }) if field == "costs"));

        let p: MilpProblem<f64> = MilpProblem::new(vec![1.0]).with_constraint(LinearConstraint::le(vec![1.0, 1.0], 3.0));
        assert!(matches!(p.validate(), Err(MilpError::Invalid { field, .. }) if field == "constraints"));

        let p: MilpProblem<f64> = MilpProblem::new(vec![1.0]).with_bounds(0, 2.0, Some(1.0));
        assert!(matches!(p.validate(), Err(MilpError::Invalid { field, .. }) if field == "upper_bounds"));

        let p: MilpProblem<f64> = MilpProblem::new(vec![1.0]).with_bounds(0, f64::NEG_INFINITY, None);
        assert!(matches!(p.validate(), Err(MilpError::Invalid { field, .. }) if field == "lower_bounds"));
    }

    #[test]
    fn options_reject_nonpositive_tolerances() {
        let o = SolveOptions { feasibility_tol: 0.0, ..Default::default() };
        assert!(o.validate().is_err());
        let o = SolveOptions { max_nodes: 0, ..Default::default() };
        assert!(o.validate().is_err());
        assert!(SolveOptions::default().validate().is_ok());
    }

    #[test]
    fn violation_measures_each_relation() {
        let x = [1.0, 2.0];
        assert_eq!(LinearConstraint::le(vec![1.0, 1.0], 2.0).violation(&x), 1.0);
        assert_eq!(LinearConstraint::ge(vec![1.0, 1.0], 4.0).violation(&x), 1.0);
        assert_eq!(LinearConstraint::eq(vec![1.0, 1.0], 3.0).violation(&x), 0.0);
    }
}
