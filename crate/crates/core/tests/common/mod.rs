#![allow(dead_code)]

use linebal::line_model::{BalancingScenario, ConsumptionMatrix, ResourceSpec, TaskSpec};
use linebal::milp::{LinearConstraint, MilpProblem, Relation};
use rand::Rng;

/// Pure-integer problem with at most 5 variables, bounds within 0..=10 and
/// small integer data.
pub fn random_milp(rng: &mut impl Rng) -> MilpProblem<f64> {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(0..=4);
    let costs = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let mut problem = MilpProblem::new(costs).with_all_integral();
    let mut anchor = Vec::with_capacity(n);
    for j in 0..n {
        let lo = rng.gen_range(0..=3);
        let hi = lo + rng.gen_range(0..=10 - lo);
        anchor.push(rng.gen_range(lo..=hi) as f64);
        problem = problem.with_bounds(j, lo as f64, Some(hi as f64));
    }
    // Most rows are built to hold at a random lattice point; the rest get an
    // arbitrary right-hand side and may make the problem infeasible.
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-4..=6) as f64).collect();
        let at_anchor: f64 = coeffs.iter().zip(&anchor).map(|(a, x)| a * x).sum();
        let slack = rng.gen_range(0..=6) as f64;
        let (relation, rhs) = match rng.gen_range(0..10) {
            0..=3 => (Relation::LessEq, at_anchor + slack),
            4..=7 => (Relation::GreaterEq, at_anchor - slack),
            8 => (Relation::Equal, at_anchor),
            _ => (Relation::GreaterEq, rng.gen_range(-5..=40) as f64),
        };
        problem = problem.with_constraint(LinearConstraint::new(coeffs, relation, rhs));
    }
    problem
}

/// Line with at most 8 tasks and 3 resources; each task uses one resource or
/// none, with whole-second cycle times.
pub fn random_line(rng: &mut impl Rng) -> BalancingScenario {
    let n_tasks = rng.gen_range(1..=8);
    let n_res = rng.gen_range(1..=3);
    let resources: Vec<ResourceSpec> = (0..n_res)
        .map(|r| {
            ResourceSpec::new(format!("R{r}"), rng.gen_range(0..=3)).with_daily_capacity(rng.gen_range(50..=400) as f64)
        })
        .collect();
    let mut consumption = ConsumptionMatrix::new();
    let tasks = (0..n_tasks)
        .map(|p| {
            let id = format!("P{p}");
            if rng.gen_bool(0.9) {
                let r = rng.gen_range(0..n_res);
                consumption.set(id.clone(), format!("R{r}"), rng.gen_range(1..=60) as f64);
            }
            let online = rng.gen_range(0..=100) as f64 / 1000.0;
            let offline = rng.gen_range(0..=100) as f64 / 1000.0;
            TaskSpec::new(id, rng.gen_range(0..=50), online, offline)
        })
        .collect();
    BalancingScenario::new(tasks, resources, consumption).expect("generated scenario is valid")
}

/// Largest bound, integrality or constraint violation of `values`, computed
/// without going through the library's own constraint helpers.
pub fn independent_violation(problem: &MilpProblem<f64>, values: &[f64]) -> f64 {
    assert_eq!(values.len(), problem.costs.len(), "point has the wrong dimension");
    let mut worst: f64 = 0.0;
    for (j, &x) in values.iter().enumerate() {
        worst = worst.max(problem.lower_bounds[j] - x);
        if let Some(u) = problem.upper_bounds[j] {
            worst = worst.max(x - u);
        }
        if problem.integral[j] {
            worst = worst.max((x - x.round()).abs());
        }
    }
    for c in &problem.constraints {
        let mut lhs = 0.0;
        for (a, x) in c.coefficients.iter().zip(values) {
            lhs += a * x;
        }
        let gap = match c.relation {
            Relation::LessEq => lhs - c.rhs,
            Relation::GreaterEq => c.rhs - lhs,
            Relation::Equal => (lhs - c.rhs).abs(),
        };
        worst = worst.max(gap);
    }
    worst
}
