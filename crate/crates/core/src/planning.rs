//! Analyses built around the optimizer: capacity requirements, pre-balance
//! throughput, cost sheets, savings and what-if re-solves.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::line_model::{
    optimize, BalancingPlan, BalancingScenario, ModelError, DEFAULT_DAILY_CAPACITY_SEC,
};
use crate::milp::SolveOptions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanningError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("layout has no station count for task `{0}`")]
    MissingStations(String),
    #[error("layout station count for task `{0}` must be at least 1")]
    ZeroStations(String),
    #[error("layout workday must be a positive number of seconds, got {0}")]
    BadWorkday(f64),
    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },
    #[error("invalid override `{text}`: {reason}")]
    BadOverride { text: String, reason: String },
    #[error("baseline cost must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("plan row {index} is for `{found}`, scenario expects `{expected}`")]
    TaskMismatch { index: usize, expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityPlanRow {
    pub task_id: String,
    pub resource_id: String,
    pub cycle_time: f64,
    pub loading: f64,
    pub requested_machines: f64,
    pub available_machines: u64,
    /// Available minus requested; negative means a shortage.
    pub shortage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityPlan {
    pub rows: Vec<CapacityPlanRow>,
}

/// Per-task workstation counts for a line layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutSpec {
    pub workday: f64,
    pub stations: BTreeMap<String, u64>,
}

impl LayoutSpec {
    pub fn new(stations: BTreeMap<String, u64>) -> Self {
        LayoutSpec { workday: DEFAULT_DAILY_CAPACITY_SEC, stations }
    }

    pub fn with_workday(mut self, seconds: f64) -> Self {
        self.workday = seconds;
        self
    }

    fn stations_for(&self, task: &str) -> Result<u64, PlanningError> {
        match self.stations.get(task) {
            None => Err(PlanningError::MissingStations(task.to_string())),
            Some(0) => Err(PlanningError::ZeroStations(task.to_string())),
            Some(&k) => Ok(k),
        }
    }

    pub fn validate(&self, scenario: &BalancingScenario) -> Result<(), PlanningError> {
        if !(self.workday.is_finite() && self.workday > 0.0) {
            return Err(PlanningError::BadWorkday(self.workday));
        }
        for t in scenario.tasks() {
            self.stations_for(&t.id)?;
        }
        if let Some(id) = self.stations.keys().find(|id| scenario.task_index(id).is_none()) {
            return Err(PlanningError::UnknownId { kind: "task", id: id.clone() });
        }
        Ok(())
    }
}

/// Translates demand into machine requirements, one row per task.
///
/// Availability comes from the layout's station counts when a layout is
/// given, otherwise from the machine count of the task's resource.
pub fn capacity_requirement_plan(
    scenario: &BalancingScenario,
    layout: Option<&LayoutSpec>,
) -> Result<CapacityPlan, PlanningError> {
    if let Some(layout) = layout {
        layout.validate(scenario)?;
    }
    let mut rows = Vec::with_capacity(scenario.num_tasks());
    for (p, task) in scenario.tasks().iter().enumerate() {
        let r = scenario.single_resource(p)?;
        let resource = &scenario.resources()[r];
        let cycle_time = scenario.seconds(p, r);
        let loading = cycle_time * task.demand as f64;
        let requested_machines = loading / resource.daily_capacity_per_machine;
        let available_machines = match layout {
            Some(l) => l.stations_for(&task.id)?,
            None => resource.available_machines,
        };
        rows.push(CapacityPlanRow {
            task_id: task.id.clone(),
            resource_id: resource.id.clone(),
            cycle_time,
            loading,
            requested_machines,
            available_machines,
            shortage: available_machines as f64 - requested_machines,
        });
    }
    Ok(CapacityPlan { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WipFlag {
    Overstock,
    LessStock,
}

impl WipFlag {
    pub fn label(self) -> &'static str {
        match self {
            WipFlag::Overstock => "Overstock of WIP",
            WipFlag::LessStock => "Less Stock of WIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputRow {
    pub task_id: String,
    pub cycle_time: f64,
    pub stations: u64,
    pub effective_cycle: f64,
    /// `None` when the task takes no time, i.e. output is unbounded.
    pub daily_output: Option<u64>,
    pub wip_flag: WipFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub rows: Vec<ThroughputRow>,
    /// Output of the bottleneck task; `None` if no task takes any time.
    pub line_throughput: Option<u64>,
}

/// Pieces a task can finish in one workday on `stations` parallel stations.
fn daily_output(workday: f64, cycle_time: f64, stations: u64) -> Option<u64> {
    if cycle_time <= 0.0 {
        return None;
    }
    let exact = workday * stations as f64 / cycle_time;
    let nearest = exact.round();
    // Absorb round-off on exact multiples, e.g. 28800 * 3 / 120.
    let whole = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { exact.floor() };
    Some(whole as u64)
}

/// Daily output of each task on the current layout, before any balancing.
pub fn throughput_analysis(scenario: &BalancingScenario, layout: &LayoutSpec) -> Result<ThroughputReport, PlanningError> {
    layout.validate(scenario)?;
    let rows: Vec<ThroughputRow> = scenario
        .tasks()
        .iter()
        .enumerate()
        .map(|(p, task)| {
            let stations = layout.stations_for(&task.id)?;
            let cycle_time = scenario.cycle_time(p);
            let daily_output = daily_output(layout.workday, cycle_time, stations);
            let wip_flag = match daily_output {
                Some(out) if out < task.demand => WipFlag::LessStock,
                _ => WipFlag::Overstock,
            };
            Ok(ThroughputRow {
                task_id: task.id.clone(),
                cycle_time,
                stations,
                effective_cycle: cycle_time / stations as f64,
                daily_output,
                wip_flag,
            })
        })
        .collect::<Result<_, PlanningError>>()?;
    let line_throughput = rows.iter().filter_map(|r| r.daily_output).min();
    Ok(ThroughputReport { rows, line_throughput })
}

/// Every piece made offline.
pub fn all_offline_baseline(scenario: &BalancingScenario) -> BalancingPlan {
    let online = vec![0; scenario.num_tasks()];
    let offline: Vec<u64> = scenario.tasks().iter().map(|t| t.demand).collect();
    BalancingPlan::from_quantities(scenario, &online, &offline)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSheetRow {
    pub task_id: String,
    pub online_qty: u64,
    pub online_rate: f64,
    pub offline_qty: u64,
    pub offline_rate: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSheet {
    pub title: String,
    pub rows: Vec<CostSheetRow>,
    pub total: f64,
}

/// Per-task cost lines for a plan, recomputed from quantities and the
/// scenario's rates.
pub fn cost_sheet(plan: &BalancingPlan, scenario: &BalancingScenario) -> Result<CostSheet, PlanningError> {
    if plan.rows.len() != scenario.num_tasks() && !plan.rows.is_empty() {
        return Err(PlanningError::TaskMismatch {
            index: plan.rows.len().min(scenario.num_tasks()),
            expected: format!("{} rows", scenario.num_tasks()),
            found: format!("{} rows", plan.rows.len()),
        });
    }
    let mut rows = Vec::with_capacity(plan.rows.len());
    for (index, (row, task)) in plan.rows.iter().zip(scenario.tasks()).enumerate() {
        if row.task_id != task.id {
            return Err(PlanningError::TaskMismatch { index, expected: task.id.clone(), found: row.task_id.clone() });
        }
        let total = row.online_qty as f64 * task.online_cost_rate + row.offline_qty as f64 * task.offline_cost_rate;
        rows.push(CostSheetRow {
            task_id: task.id.clone(),
            online_qty: row.online_qty,
            online_rate: task.online_cost_rate,
            offline_qty: row.offline_qty,
            offline_rate: task.offline_cost_rate,
            total,
        });
    }
    let total = rows.iter().map(|r| r.total).sum();
    Ok(CostSheet { title: "Production Cost Sheet".to_string(), rows, total })
}

/// Percentage saved going from `old_cost` to `new_cost`; positive when the
/// new cost is lower.
pub fn cost_saving(old_cost: f64, new_cost: f64) -> Result<f64, PlanningError> {
    if old_cost.is_nan() || old_cost <= 0.0 {
        return Err(PlanningError::NonPositiveBaseline(old_cost));
    }
    Ok((old_cost - new_cost) / old_cost * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub baseline_label: String,
    pub optimized_label: String,
    pub baseline_cost: f64,
    pub optimized_cost: f64,
    /// `None` when the baseline costs nothing.
    pub saving_percent: Option<f64>,
}

impl ComparisonReport {
    pub fn new(baseline_label: &str, baseline_cost: f64, optimized_label: &str, optimized_cost: f64) -> Self {
        ComparisonReport {
            baseline_label: baseline_label.to_string(),
            optimized_label: optimized_label.to_string(),
            baseline_cost,
            optimized_cost,
            saving_percent: cost_saving(baseline_cost, optimized_cost).ok(),
        }
    }
}

/// All-offline baseline against the optimized plan.
pub fn compare(scenario: &BalancingScenario, options: &SolveOptions) -> Result<ComparisonReport, PlanningError> {
    let baseline = all_offline_baseline(scenario);
    let optimized = optimize(scenario, options)?;
    Ok(ComparisonReport::new("all offline", baseline.total_cost, "optimized", optimized.plan.total_cost))
}

/// One parameter change for a what-if run.
#[derive(Debug, Clone, PartialEq)]
pub enum Override {
    TaskDemand { task: String, demand: u64 },
    TaskOnlineRate { task: String, rate: f64 },
    TaskOfflineRate { task: String, rate: f64 },
    ResourceMachines { resource: String, machines: u64 },
    ResourceCapacity { resource: String, seconds: f64 },
}

impl FromStr for Override {
    type Err = PlanningError;

    /// Parses `task.<id>.<field>=<value>` or `resource.<id>.<field>=<value>`.
    /// Task fields: `demand`, `online_rate`, `offline_rate`. Resource fields:
    /// `machines`, `capacity`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| PlanningError::BadOverride { text: text.to_string(), reason: reason.to_string() };
        let (key, value) = text.split_once('=').ok_or_else(|| bad("expected KEY=VALUE"))?;
        let value = value.trim();
        let (root, rest) = key.split_once('.').ok_or_else(|| bad("key must start with `task.` or `resource.`"))?;
        let (id, field) = rest.rsplit_once('.').ok_or_else(|| bad("key must be ROOT.ID.FIELD"))?;
        if id.is_empty() {
            return Err(bad("empty id"));
        }
        let id = id.to_string();
        let count = || value.parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
        let real = || match value.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(bad("expected a non-negative decimal")),
        };
        match (root, field) {
            ("task", "demand") => Ok(Override::TaskDemand { task: id, demand: count()? }),
            ("task", "online_rate") => Ok(Override::TaskOnlineRate { task: id, rate: real()? }),
            ("task", "offline_rate") => Ok(Override::TaskOfflineRate { task: id, rate: real()? }),
            ("resource", "machines") => Ok(Override::ResourceMachines { resource: id, machines: count()? }),
            ("resource", "capacity") => Ok(Override::ResourceCapacity { resource: id, seconds: real()? }),
            ("task", _) | ("resource", _) => Err(bad("unknown field")),
            _ => Err(bad("key must start with `task.` or `resource.`")),
        }
    }
}

/// Returns a copy of `scenario` with the overrides applied.
pub fn apply_overrides(scenario: &BalancingScenario, overrides: &[Override]) -> Result<BalancingScenario, PlanningError> {
    let (mut tasks, mut resources, consumption) = scenario.clone().into_parts();
    for o in overrides {
        match o {
            Override::TaskDemand { task, .. } | Override::TaskOnlineRate { task, .. } | Override::TaskOfflineRate { task, .. } => {
                let t = tasks
                    .iter_mut()
                    .find(|t| &t.id == task)
                    .ok_or_else(|| PlanningError::UnknownId { kind: "task", id: task.clone() })?;
                match o {
                    Override::TaskDemand { demand, .. } => t.demand = *demand,
                    Override::TaskOnlineRate { rate, .. } => t.online_cost_rate = *rate,
                    Override::TaskOfflineRate { rate, .. } => t.offline_cost_rate = *rate,
                    _ => unreachable!(),
                }
            }
            Override::ResourceMachines { resource, .. } | Override::ResourceCapacity { resource, .. } => {
                let r = resources
                    .iter_mut()
                    .find(|r| &r.id == resource)
                    .ok_or_else(|| PlanningError::UnknownId { kind: "resource", id: resource.clone() })?;
                match o {
                    Override::ResourceMachines { machines, .. } => r.available_machines = *machines,
                    Override::ResourceCapacity { seconds, .. } => r.daily_capacity_per_machine = *seconds,
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(BalancingScenario::new(tasks, resources, consumption)?)
}

#[derive(Debug, Clone)]
pub struct WhatIf {
    pub report: ComparisonReport,
    pub scenario: BalancingScenario,
    pub baseline_plan: BalancingPlan,
    pub plan: BalancingPlan,
}

/// Re-solves with `overrides` applied and compares against the optimum of the
/// unchanged scenario.
pub fn whatif(scenario: &BalancingScenario, overrides: &[Override], options: &SolveOptions) -> Result<WhatIf, PlanningError> {
    let changed = apply_overrides(scenario, overrides)?;
    let baseline = optimize(scenario, options)?;
    let updated = optimize(&changed, options)?;
    let report = ComparisonReport::new("current optimum", baseline.plan.total_cost, "what-if optimum", updated.plan.total_cost);
    Ok(WhatIf { report, scenario: changed, baseline_plan: baseline.plan, plan: updated.plan })
}
