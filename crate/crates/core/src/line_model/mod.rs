//! Tasks, resources and the online/offline balancing model.
//!
//! Each task `p` is split into pieces made on the balanced line (`online`,
//! consuming resource seconds) and pieces made off the line (`offline`, no
//! resource use). The model minimizes
//!
//! ```text
//! sum_p  online_rate_p * I_p + offline_rate_p * O_p
//! s.t.   I_p + O_p >= demand_p                  for every task
//!        sum_p seconds[p][r] * I_p <= budget_r   for every resource
//! ```

mod knapsack;

pub use knapsack::{knapsack_oracle, MAX_KNAPSACK_WIDTH};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{self, LinearConstraint, MilpError, MilpProblem, MilpSolution, MilpStatus, SolveOptions};

/// One shift of 8 hours.
pub const DEFAULT_DAILY_CAPACITY_SEC: f64 = 28_800.0;

const TOTAL_COST_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("scenario has no tasks")]
    NoTasks,
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("consumption entry references unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },
    #[error("invalid value for `{field}` of `{id}`: {reason}")]
    InvalidValue { id: String, field: &'static str, reason: String },
    #[error("solver stopped without proving optimality: {0}")]
    NotOptimal(MilpStatus),
    #[error("solution has {found} values, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("recomputed total cost {recomputed} differs from solver objective {objective}")]
    CostMismatch { recomputed: f64, objective: f64 },
    #[error("task `{task}` uses {count} resources; this analysis needs exactly one")]
    NotSingleResource { task: String, count: usize },
    #[error("{0}")]
    OracleDomain(String),
    #[error(transparent)]
    Solver(#[from] MilpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub description: String,
    /// Pieces required.
    pub demand: u64,
    /// RMB per piece made on the line.
    pub online_cost_rate: f64,
    /// RMB per piece made off the line.
    pub offline_cost_rate: f64,
}

impl TaskSpec {
    pub fn new(id: impl Into<String>, demand: u64, online_cost_rate: f64, offline_cost_rate: f64) -> Self {
        TaskSpec { id: id.into(), description: String::new(), demand, online_cost_rate, offline_cost_rate }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

/// Converts a labour rate in RMB per second into RMB per piece.
pub fn per_piece_rate(rate_per_second: f64, cycle_time_sec: f64) -> f64 {
    rate_per_second * cycle_time_sec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSpec {
    pub id: String,
    pub available_machines: u64,
    /// Seconds one machine works per day.
    pub daily_capacity_per_machine: f64,
}

impl ResourceSpec {
    pub fn new(id: impl Into<String>, available_machines: u64) -> Self {
        ResourceSpec { id: id.into(), available_machines, daily_capacity_per_machine: DEFAULT_DAILY_CAPACITY_SEC }
    }

    pub fn with_daily_capacity(mut self, seconds: f64) -> Self {
        self.daily_capacity_per_machine = seconds;
        self
    }

    /// Total daily seconds available across all machines.
    pub fn budget(&self) -> f64 {
        self.available_machines as f64 * self.daily_capacity_per_machine
    }
}

/// Seconds of each resource consumed per piece of each task. Missing entries
/// are zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionMatrix {
    entries: BTreeMap<(String, String), f64>,
}

impl ConsumptionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, task: impl Into<String>, resource: impl Into<String>, seconds: f64) {
        self.entries.insert((task.into(), resource.into()), seconds);
    }

    pub fn with(mut self, task: impl Into<String>, resource: impl Into<String>, seconds: f64) -> Self {
        self.set(task, resource, seconds);
        self
    }

    pub fn get(&self, task: &str, resource: &str) -> f64 {
        self.entries.get(&(task.to_string(), resource.to_string())).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((t, r), s)| (t.as_str(), r.as_str(), *s))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A validated set of tasks, resources and consumption times. Task order is
/// the variable order of the generated MILP.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancingScenario {
    tasks: Vec<TaskSpec>,
    resources: Vec<ResourceSpec>,
    consumption: ConsumptionMatrix,
    /// Dense copy of `consumption`, indexed `[task][resource]`.
    seconds: Vec<Vec<f64>>,
}

impl BalancingScenario {
    pub fn new(
        tasks: Vec<TaskSpec>,
        resources: Vec<ResourceSpec>,
        consumption: ConsumptionMatrix,
    ) -> Result<Self, ModelError> {
        if tasks.is_empty() {
            return Err(ModelError::NoTasks);
        }
        let mut task_index = HashMap::new();
        for (i, t) in tasks.iter().enumerate() {
            if task_index.insert(t.id.as_str(), i).is_some() {
                return Err(ModelError::DuplicateId { kind: "task", id: t.id.clone() });
            }
            for (field, rate) in [("online_cost_rate", t.online_cost_rate), ("offline_cost_rate", t.offline_cost_rate)] {
                if !(rate.is_finite() && rate >= 0.0) {
                    return Err(ModelError::InvalidValue {
                        id: t.id.clone(),
                        field,
                        reason: format!("{rate} is not a finite non-negative rate"),
                    });
                }
            }
        }
        let mut resource_index = HashMap::new();
        for (i, r) in resources.iter().enumerate() {
            if resource_index.insert(r.id.as_str(), i).is_some() {
                return Err(ModelError::DuplicateId { kind: "resource", id: r.id.clone() });
            }
            let cap = r.daily_capacity_per_machine;
            if !(cap.is_finite() && cap > 0.0) {
                return Err(ModelError::InvalidValue {
                    id: r.id.clone(),
                    field: "daily_capacity_per_machine",
                    reason: format!("{cap} is not a positive number of seconds"),
                });
            }
            if !r.budget().is_finite() {
                return Err(ModelError::InvalidValue {
                    id: r.id.clone(),
                    field: "available_machines",
                    reason: "budget overflows".to_string(),
                });
            }
        }
        let mut seconds = vec![vec![0.0; resources.len()]; tasks.len()];
        for (task, resource, s) in consumption.iter() {
            let p = *task_index
                .get(task)
                .ok_or_else(|| ModelError::UnknownId { kind: "task", id: task.to_string() })?;
            let r = *resource_index
                .get(resource)
                .ok_or_else(|| ModelError::UnknownId { kind: "resource", id: resource.to_string() })?;
            if !(s.is_finite() && s >= 0.0) {
                return Err(ModelError::InvalidValue {
                    id: format!("{task}/{resource}"),
                    field: "seconds",
                    reason: format!("{s} is not a finite non-negative time"),
                });
            }
            seconds[p][r] = s;
        }
        Ok(BalancingScenario { tasks, resources, consumption, seconds })
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn resources(&self) -> &[ResourceSpec] {
        &self.resources
    }

    pub fn consumption(&self) -> &ConsumptionMatrix {
        &self.consumption
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    /// Seconds of resource `r` used by one piece of task `p` (by index).
    pub fn seconds(&self, p: usize, r: usize) -> f64 {
        self.seconds[p][r]
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn resource_index(&self, id: &str) -> Option<usize> {
        self.resources.iter().position(|r| r.id == id)
    }

    /// Indices of resources task `p` consumes.
    pub fn resources_of(&self, p: usize) -> Vec<usize> {
        (0..self.resources.len()).filter(|&r| self.seconds[p][r] > 0.0).collect()
    }

    /// The unique resource of task `p`, for analyses that assume one resource
    /// per task.
    pub fn single_resource(&self, p: usize) -> Result<usize, ModelError> {
        match self.resources_of(p).as_slice() {
            [r] => Ok(*r),
            other => Err(ModelError::NotSingleResource { task: self.tasks[p].id.clone(), count: other.len() }),
        }
    }

    /// Total seconds per piece across all resources.
    pub fn cycle_time(&self, p: usize) -> f64 {
        self.seconds[p].iter().sum()
    }

    /// Splits the scenario back into its parts; see [`BalancingScenario::new`].
    pub fn into_parts(self) -> (Vec<TaskSpec>, Vec<ResourceSpec>, ConsumptionMatrix) {
        (self.tasks, self.resources, self.consumption)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanRow {
    pub task_id: String,
    pub online_qty: u64,
    pub offline_qty: u64,
    pub row_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceUsage {
    pub resource_id: String,
    pub used_seconds: f64,
    pub budget_seconds: f64,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancingPlan {
    pub rows: Vec<PlanRow>,
    pub total_cost: f64,
    pub resource_usage: Vec<ResourceUsage>,
}

impl BalancingPlan {
    /// Builds a plan from per-task quantities, computing costs and resource use.
    pub fn from_quantities(scenario: &BalancingScenario, online: &[u64], offline: &[u64]) -> Self {
        let rows: Vec<PlanRow> = scenario
            .tasks
            .iter()
            .zip(online.iter().zip(offline))
            .map(|(t, (&on, &off))| PlanRow {
                task_id: t.id.clone(),
                online_qty: on,
                offline_qty: off,
                row_cost: t.online_cost_rate * on as f64 + t.offline_cost_rate * off as f64,
            })
            .collect();
        let total_cost = rows.iter().map(|r| r.row_cost).sum();
        let resource_usage = scenario
            .resources
            .iter()
            .enumerate()
            .map(|(r, res)| {
                let used_seconds: f64 = online.iter().enumerate().map(|(p, &on)| scenario.seconds[p][r] * on as f64).sum();
                let budget_seconds = res.budget();
                let utilization = if budget_seconds > 0.0 { used_seconds / budget_seconds } else { 0.0 };
                ResourceUsage { resource_id: res.id.clone(), used_seconds, budget_seconds, utilization }
            })
            .collect();
        BalancingPlan { rows, total_cost, resource_usage }
    }

    pub fn total_offline(&self) -> u64 {
        self.rows.iter().map(|r| r.offline_qty).sum()
    }

    pub fn row(&self, task_id: &str) -> Option<&PlanRow> {
        self.rows.iter().find(|r| r.task_id == task_id)
    }
}

/// Largest online quantity task `p` could ever reach: its demand, or fewer
/// when a single resource budget cannot hold that many pieces.
fn online_cap(scenario: &BalancingScenario, p: usize) -> u64 {
    let demand = scenario.tasks[p].demand;
    scenario
        .resources_of(p)
        .into_iter()
        .map(|r| {
            let fit = scenario.resources[r].budget() / scenario.seconds[p][r];
            // Tolerate round-off just below an exact integer.
            (fit + 1e-9).floor() as u64
        })
        .fold(demand, u64::min)
}

/// Translates a scenario into its MILP.
///
/// Variables are `I_1..I_n` then `O_1..O_n`, all integral with lower bound 0.
/// Rows are the `n` demand rows (`>=`) followed by one capacity row (`<=`) for
/// each resource that at least one task consumes.
pub fn build_milp(scenario: &BalancingScenario) -> Result<MilpProblem<f64>, ModelError> {
    let n = scenario.num_tasks();
    if scenario.resources.is_empty() && !scenario.consumption.is_empty() {
        return Err(ModelError::UnknownId {
            kind: "resource",
            id: scenario.consumption.iter().next().map(|(_, r, _)| r.to_string()).unwrap_or_default(),
        });
    }

    let mut costs = Vec::with_capacity(2 * n);
    costs.extend(scenario.tasks.iter().map(|t| t.online_cost_rate));
    costs.extend(scenario.tasks.iter().map(|t| t.offline_cost_rate));
    let mut problem = MilpProblem::new(costs).with_all_integral();

    for (p, task) in scenario.tasks.iter().enumerate() {
        problem.upper_bounds[p] = Some(online_cap(scenario, p) as f64);
        problem.upper_bounds[n + p] = Some(task.demand as f64);
        let mut row = vec![0.0; 2 * n];
        row[p] = 1.0;
        row[n + p] = 1.0;
        problem.constraints.push(LinearConstraint::ge(row, task.demand as f64));
    }
    for (r, resource) in scenario.resources.iter().enumerate() {
        let mut row = vec![0.0; 2 * n];
        for (p, slot) in row.iter_mut().take(n).enumerate() {
            *slot = scenario.seconds[p][r];
        }
        if row.iter().all(|&a| a == 0.0) {
            continue;
        }
        problem.constraints.push(LinearConstraint::le(row, resource.budget()));
    }
    Ok(problem)
}

/// Interprets an optimal MILP solution as a balancing plan.
pub fn decode_plan(scenario: &BalancingScenario, solution: &MilpSolution<f64>) -> Result<BalancingPlan, ModelError> {
    if solution.status != MilpStatus::Optimal {
        return Err(ModelError::NotOptimal(solution.status));
    }
    let n = scenario.num_tasks();
    if solution.values.len() != 2 * n {
        return Err(ModelError::DimensionMismatch { expected: 2 * n, found: solution.values.len() });
    }
    let snap = |v: f64| v.round().max(0.0) as u64;
    let online: Vec<u64> = solution.values[..n].iter().map(|&v| snap(v)).collect();
    let offline: Vec<u64> = solution.values[n..].iter().map(|&v| snap(v)).collect();
    let plan = BalancingPlan::from_quantities(scenario, &online, &offline);
    let objective = solution.objective.expect("optimal solutions carry an objective");
    if (plan.total_cost - objective).abs() > TOTAL_COST_TOL {
        return Err(ModelError::CostMismatch { recomputed: plan.total_cost, objective });
    }
    Ok(plan)
}

/// An optimized plan together with the raw solver output.
#[derive(Debug, Clone)]
pub struct Optimized {
    pub plan: BalancingPlan,
    pub solution: MilpSolution<f64>,
}

/// Builds, solves and decodes in one step.
pub fn optimize(scenario: &BalancingScenario, options: &SolveOptions) -> Result<Optimized, ModelError> {
    let problem = build_milp(scenario)?;
    let solution = milp::solve_milp(&problem, options)?;
    let plan = decode_plan(scenario, &solution)?;
    Ok(Optimized { plan, solution })
}
