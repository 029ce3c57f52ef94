//! Best-bound branch-and-bound over the simplex relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::solve_with_bounds;
use super::{LpSolution, LpStatus, MilpError, MilpProblem, MilpSolution, MilpStatus, SolveOptions};
use crate::scalar::Scalar;

/// Relative margin an incumbent must beat to be replaced, and below which a
/// node bound is considered no better than the incumbent.
const IMPROVEMENT_TOL: f64 = 1e-9;

struct Node<T> {
    bound: T,
    seq: u64,
    lower: Vec<T>,
    upper: Vec<Option<T>>,
    values: Vec<T>,
}

// BinaryHeap is a max-heap: the "greatest" node is the one with the smallest
// bound, then the smallest sequence number.
impl<T: Scalar> Ord for Node<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<T: Scalar> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Node<T> {}

struct Incumbent<T> {
    values: Vec<T>,
    objective: T,
}

struct Search<'a, T> {
    problem: &'a MilpProblem<T>,
    options: &'a SolveOptions,
    int_tol: T,
    nodes_explored: u64,
    next_seq: u64,
    incumbent: Option<Incumbent<T>>,
    queue: BinaryHeap<Node<T>>,
}

impl<T: Scalar> Search<'_, T> {
    fn margin(&self, reference: &T) -> T {
        let scale = if reference.abs() > T::one() { reference.abs() } else { T::one() };
        T::tolerance(IMPROVEMENT_TOL) * scale
    }

    /// True when a subtree bounded below by `bound` cannot beat the incumbent.
    fn dominated(&self, bound: &T) -> bool {
        match &self.incumbent {
            Some(inc) => bound.clone() >= inc.objective.clone() - self.margin(&inc.objective),
            None => false,
        }
    }

    /// Most fractional integral variable, lowest index on ties.
    fn branching_variable(&self, values: &[T]) -> Option<usize> {
        let half = T::one() / (T::one() + T::one());
        let mut best: Option<(usize, T)> = None;
        for (j, v) in values.iter().enumerate() {
            if !self.problem.integral[j] {
                continue;
            }
            let frac = v.clone() - v.floor();
            let dist = if frac > half { T::one() - frac } else { frac };
            if dist <= self.int_tol {
                continue;
            }
            if best.as_ref().is_none_or(|(_, d)| dist > *d) {
                best = Some((j, dist));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Solves the relaxation for a node's bounds and files the outcome:
    /// discarded, new incumbent, or queued for branching.
    fn evaluate(&mut self, lower: Vec<T>, upper: Vec<Option<T>>) -> Result<(), MilpError> {
        let lp = solve_with_bounds(self.problem, &lower, &upper, self.options)?;
        self.file(lower, upper, lp)
    }

    fn file(&mut self, lower: Vec<T>, upper: Vec<Option<T>>, lp: LpSolution<T>) -> Result<(), MilpError> {
        self.nodes_explored += 1;
        match lp.status {
            LpStatus::Infeasible => return Ok(()),
            LpStatus::Unbounded => return Err(MilpError::UnboundedRelaxation),
            LpStatus::Optimal => {}
        }
        let bound = lp.objective.expect("optimal relaxation carries an objective");
        if self.dominated(&bound) {
            return Ok(());
        }
        if self.branching_variable(&lp.values).is_none() {
            let values: Vec<T> = lp
                .values
                .iter()
                .zip(&self.problem.integral)
                .map(|(v, &int)| if int { v.round() } else { v.clone() })
                .collect();
            let objective = self.problem.objective_value(&values);
            let improves = match &self.incumbent {
                None => true,
                Some(inc) => objective < inc.objective.clone() - self.margin(&inc.objective),
            };
            if improves {
                self.incumbent = Some(Incumbent { values, objective });
            }
        } else {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.queue.push(Node { bound, seq, lower, upper, values: lp.values });
        }
        Ok(())
    }

    fn node_limit_reached(&self) -> bool {
        self.nodes_explored >= self.options.max_nodes as u64
    }
}

/// Solves a minimization MILP to proven optimality.
///
/// Nodes are chosen by best bound with FIFO tie-breaking; branching picks the
/// most fractional integral variable (lowest index on ties) and evaluates the
/// floor child before the ceiling child. Every integral variable must have
/// finite bounds.
pub fn solve_milp<T: Scalar>(problem: &MilpProblem<T>, options: &SolveOptions) -> Result<MilpSolution<T>, MilpError> {
    problem.validate()?;
    options.validate()?;
    for (j, &int) in problem.integral.iter().enumerate() {
        if int && problem.upper_bounds[j].is_none() {
            return Err(MilpError::Invalid {
                field: "upper_bounds".to_string(),
                reason: format!("integral variable {j} needs a finite upper bound"),
            });
        }
    }

    let mut search = Search {
        problem,
        options,
        int_tol: T::tolerance(options.integrality_tol),
        nodes_explored: 0,
        next_seq: 0,
        incumbent: None,
        queue: BinaryHeap::new(),
    };

    let root = solve_with_bounds(problem, &problem.lower_bounds, &problem.upper_bounds, options)?;
    match root.status {
        LpStatus::Unbounded => return Err(MilpError::UnboundedRelaxation),
        LpStatus::Infeasible => {
            return Ok(MilpSolution {
                status: MilpStatus::Infeasible,
                values: Vec::new(),
                objective: None,
                nodes_explored: 1,
                root_lp_bound: None,
            })
        }
        LpStatus::Optimal => {}
    }
    let root_bound = root.objective.clone();
    search.file(problem.lower_bounds.clone(), problem.upper_bounds.clone(), root)?;

    let mut hit_limit = false;
    'search: while let Some(node) = search.queue.pop() {
        if search.dominated(&node.bound) {
            continue;
        }
        let j = search
            .branching_variable(&node.values)
            .expect("queued nodes always have a fractional variable");
        let value = node.values[j].clone();

        let mut floor_upper = node.upper.clone();
        floor_upper[j] = Some(value.floor());
        let mut ceil_lower = node.lower.clone();
        ceil_lower[j] = value.ceil();

        for (lower, upper) in [(node.lower.clone(), floor_upper), (ceil_lower, node.upper)] {
            if search.node_limit_reached() {
                hit_limit = true;
                break 'search;
            }
            search.evaluate(lower, upper)?;
        }
    }

    let nodes_explored = search.nodes_explored;
    let status = match (&search.incumbent, hit_limit) {
        (_, true) => MilpStatus::NodeLimit,
        (Some(_), false) => MilpStatus::Optimal,
        (None, false) => MilpStatus::Infeasible,
    };
    let (values, objective) = match search.incumbent {
        Some(inc) => (inc.values, Some(inc.objective)),
        None => (Vec::new(), None),
    };
    Ok(MilpSolution { status, values, objective, nodes_explored, root_lp_bound: root_bound })
}
