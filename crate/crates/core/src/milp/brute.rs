//! Exhaustive lattice enumeration, used as a test oracle.

use super::{MilpError, MilpProblem, MilpSolution, MilpStatus, SolveOptions};
use crate::scalar::Scalar;

pub const MAX_LATTICE_POINTS: u128 = 10_000_000;

/// Finds the exact optimum of a pure-integer problem by visiting every point
/// of its bounding box. Shares no code with the simplex path.
///
/// Points are visited in lexicographic order (last variable fastest) and a
/// point only replaces the incumbent when strictly better.
pub fn brute_force_milp<T: Scalar>(problem: &MilpProblem<T>, options: &SolveOptions) -> Result<MilpSolution<T>, MilpError> {
    problem.validate()?;
    options.validate()?;
    let n = problem.num_vars();

    let mut ranges = Vec::with_capacity(n);
    for j in 0..n {
        if !problem.integral[j] {
            return Err(MilpError::Invalid {
                field: "integral".to_string(),
                reason: format!("variable {j} is continuous; lattice enumeration needs all-integer problems"),
            });
        }
        let upper = problem.upper_bounds[j].as_ref().ok_or_else(|| MilpError::Invalid {
            field: "upper_bounds".to_string(),
            reason: format!("variable {j} has no upper bound"),
        })?;
        let lo = problem.lower_bounds[j].ceil().to_i64();
        let hi = upper.floor().to_i64();
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(MilpError::Invalid {
                field: "upper_bounds".to_string(),
                reason: format!("variable {j} has bounds outside the i64 range"),
            });
        };
        ranges.push((lo, hi));
    }

    let size = ranges
        .iter()
        .map(|&(lo, hi)| if hi < lo { 0u128 } else { (hi - lo) as u128 + 1 })
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX);
    if size > MAX_LATTICE_POINTS {
        return Err(MilpError::LatticeTooLarge { size, limit: MAX_LATTICE_POINTS });
    }

    let tol = T::tolerance(options.feasibility_tol);
    let mut best: Option<(Vec<T>, T)> = None;
    let mut visited = 0u64;

    if size > 0 {
        let mut point: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
        'lattice: loop {
            visited += 1;
            let values: Vec<T> = point.iter().map(|&v| T::from_i64_exact(v)).collect();
            let feasible = problem.constraints.iter().all(|c| c.violation(&values) <= tol);
            if feasible {
                let objective = problem.objective_value(&values);
                if best.as_ref().is_none_or(|(_, b)| objective < *b) {
                    best = Some((values, objective));
                }
            }
            let mut k = n;
            loop {
                if k == 0 {
                    break 'lattice;
                }
                k -= 1;
                if point[k] < ranges[k].1 {
                    point[k] += 1;
                    continue 'lattice;
                }
                point[k] = ranges[k].0;
            }
        }
    }

    let (status, values, objective) = match best {
        Some((v, o)) => (MilpStatus::Optimal, v, Some(o)),
        None => (MilpStatus::Infeasible, Vec::new(), None),
    };
    Ok(MilpSolution { status, values, objective, nodes_explored: visited, root_lp_bound: None })
}
