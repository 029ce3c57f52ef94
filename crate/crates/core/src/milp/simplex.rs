//! Dense two-phase tableau simplex.
//!
//! Variables are shifted onto their lower bounds and finite upper bounds become
//! explicit `<=` rows, so the tableau only ever sees `y >= 0`. Pricing is
//! Dantzig (most negative reduced cost) until the number of degenerate pivots
//! exceeds `3 * (rows + columns)`, after which Bland's rule takes over for the
//! rest of the phase.

use super::{LpSolution, LpStatus, MilpError, MilpProblem, Relation, SolveOptions};
use crate::scalar::Scalar;

pub fn solve_lp<T: Scalar>(problem: &MilpProblem<T>, options: &SolveOptions) -> Result<LpSolution<T>, MilpError> {
    problem.validate()?;
    options.validate()?;
    solve_with_bounds(problem, &problem.lower_bounds, &problem.upper_bounds, options)
}

struct Row<T> {
    coefficients: Vec<T>,
    relation: Relation,
    rhs: T,
}

/// Solves the relaxation of `problem` with its bounds replaced by `lower` and
/// `upper`. The problem itself must already be validated.
pub(crate) fn solve_with_bounds<T: Scalar>(
    problem: &MilpProblem<T>,
    lower: &[T],
    upper: &[Option<T>],
    options: &SolveOptions,
) -> Result<LpSolution<T>, MilpError> {
    let n = problem.num_vars();
    let feas = T::tolerance(options.feasibility_tol);

    for j in 0..n {
        if let Some(u) = &upper[j] {
            if *u < lower[j] {
                return Ok(LpSolution::without_point(LpStatus::Infeasible));
            }
        }
    }

    let mut rows = Vec::with_capacity(problem.constraints.len() + n);
    for c in &problem.constraints {
        let shift = c.coefficients.iter().zip(lower).fold(T::zero(), |acc, (a, l)| acc + a.clone() * l.clone());
        let rhs = c.rhs.clone() - shift;
        if c.coefficients.iter().all(|a| a.is_zero()) {
            let satisfied = match c.relation {
                Relation::LessEq => rhs >= -feas.clone(),
                Relation::GreaterEq => rhs <= feas.clone(),
                Relation::Equal => rhs.abs() <= feas,
            };
            if !satisfied {
                return Ok(LpSolution::without_point(LpStatus::Infeasible));
            }
            continue;
        }
        rows.push(Row { coefficients: c.coefficients.clone(), relation: c.relation, rhs });
    }
    for j in 0..n {
        if let Some(u) = &upper[j] {
            let mut coefficients = vec![T::zero(); n];
            coefficients[j] = T::one();
            rows.push(Row { coefficients, relation: Relation::LessEq, rhs: u.clone() - lower[j].clone() });
        }
    }
    for row in &mut rows {
        if row.rhs.is_negative() {
            row.coefficients.iter_mut().for_each(|a| *a = -a.clone());
            row.rhs = -row.rhs.clone();
            row.relation = match row.relation {
                Relation::LessEq => Relation::GreaterEq,
                Relation::GreaterEq => Relation::LessEq,
                Relation::Equal => Relation::Equal,
            };
        }
    }

    let mut tableau = Tableau::build(&rows, n);
    let eps = T::pivot_epsilon();

    if tableau.first_artificial < tableau.ncols {
        tableau.load_phase_one_costs();
        // Phase one is bounded below by zero, so it can only end optimal.
        tableau.run(&eps)?;
        let infeasibility = -tableau.cost[tableau.ncols].clone();
        if infeasibility > feas {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        tableau.drive_out_artificials(&eps);
    }

    tableau.load_phase_two_costs(&problem.costs);
    if !tableau.run(&eps)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut values: Vec<T> = lower.to_vec();
    for (i, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            values[b] = values[b].clone() + tableau.rows[i][tableau.ncols].clone();
        }
    }
    let objective = problem.objective_value(&values);
    Ok(LpSolution { status: LpStatus::Optimal, values, objective: Some(objective) })
}

struct Tableau<T> {
    /// Each row holds `ncols` coefficients followed by the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs; the trailing entry is the negated objective.
    cost: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
    first_artificial: usize,
    blocked: Vec<bool>,
}

impl<T: Scalar> Tableau<T> {
    fn build(rows: &[Row<T>], n: usize) -> Self {
        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.relation != Relation::Equal).count();
        let art_count = rows.iter().filter(|r| r.relation != Relation::LessEq).count();
        let first_artificial = n + slack_count;
        let ncols = first_artificial + art_count;

        let mut data = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, first_artificial);
        for row in rows {
            let mut line = vec![T::zero(); ncols + 1];
            line[..n].clone_from_slice(&row.coefficients);
            line[ncols] = row.rhs.clone();
            match row.relation {
                Relation::LessEq => {
                    line[next_slack] = T::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::GreaterEq => {
                    line[next_slack] = -T::one();
                    next_slack += 1;
                    line[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Equal => {
                    line[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            data.push(line);
        }
        Tableau {
            rows: data,
            cost: vec![T::zero(); ncols + 1],
            basis,
            ncols,
            first_artificial,
            blocked: vec![false; ncols],
        }
    }

    fn load_phase_one_costs(&mut self) {
        self.cost = vec![T::zero(); self.ncols + 1];
        for (i, &b) in self.basis.iter().enumerate() {
            if b >= self.first_artificial {
                for (k, v) in self.rows[i].iter().enumerate() {
                    if k < self.first_artificial || k == self.ncols {
                        self.cost[k] = self.cost[k].clone() - v.clone();
                    }
                }
            }
        }
    }

    fn load_phase_two_costs(&mut self, costs: &[T]) {
        for j in self.first_artificial..self.ncols {
            self.blocked[j] = true;
        }
        self.cost = vec![T::zero(); self.ncols + 1];
        self.cost[..costs.len()].clone_from_slice(costs);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (k, v) in self.rows[i].iter().enumerate() {
                self.cost[k] = self.cost[k].clone() - cb.clone() * v.clone();
            }
        }
    }

    /// Pivots artificial variables out of the basis after phase one. Rows
    /// where that is impossible are linearly dependent and are dropped.
    fn drive_out_artificials(&mut self, eps: &T) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > *eps);
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rows[r][c] = T::one();
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            row[c] = T::zero();
        }
        let f = self.cost[c].clone();
        if !f.is_zero() {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            self.cost[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Runs primal simplex iterations. Returns `false` when unbounded.
    fn run(&mut self, eps: &T) -> Result<bool, MilpError> {
        let size = self.rows.len() + self.ncols;
        let degenerate_limit = 3 * size;
        let iteration_limit = 50_000 + 100 * size;
        let mut degenerate = 0usize;
        let mut bland = false;
        let neg_eps = -eps.clone();

        for _ in 0..iteration_limit {
            let candidates = (0..self.ncols).filter(|&j| !self.blocked[j] && self.cost[j] < neg_eps);
            let entering = if bland {
                candidates.into_iter().next()
            } else {
                let mut best: Option<usize> = None;
                for j in candidates {
                    if best.is_none_or(|b| self.cost[j] < self.cost[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(e) = entering else {
                return Ok(true);
            };

            let mut leaving: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[e];
                if *a <= *eps {
                    continue;
                }
                let rhs = &row[self.ncols];
                let ratio = if rhs.is_negative() { T::zero() } else { rhs.clone() / a.clone() };
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let diff = ratio.clone() - br.clone();
                        if diff < neg_eps || (diff.abs() <= *eps && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leaving else {
                return Ok(false);
            };
            if ratio <= *eps {
                degenerate += 1;
                if degenerate > degenerate_limit {
                    bland = true;
                }
            }
            self.pivot(r, e);
        }
        Err(MilpError::IterationLimit(iteration_limit))
    }
}
