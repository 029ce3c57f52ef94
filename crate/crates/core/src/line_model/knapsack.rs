//! Independent optimum for scenarios where every task uses one resource.
//!
//! With non-negative rates some optimum makes exactly the demand, so moving a
//! piece online saves `offline_rate - online_rate` and costs its cycle seconds
//! on one resource. Resources are then independent bounded knapsacks, solved
//! here by dynamic programming over whole seconds. No simplex involved.

use super::{BalancingPlan, BalancingScenario, ModelError};

/// Largest capacity (in seconds) the table is allowed to span.
pub const MAX_KNAPSACK_WIDTH: u64 = 10_000_000;

fn integral_seconds(value: f64, what: &str) -> Result<u64, ModelError> {
    let rounded = value.round();
    if (value - rounded).abs() > 1e-9 || rounded < 0.0 {
        return Err(ModelError::OracleDomain(format!("{what} = {value} is not a whole number of seconds")));
    }
    Ok(rounded as u64)
}

/// Binary-split item: `count` pieces of one task taken together.
struct Chunk {
    task: usize,
    count: u64,
    weight: usize,
    value: f64,
}

pub fn knapsack_oracle(scenario: &BalancingScenario) -> Result<BalancingPlan, ModelError> {
    let n = scenario.num_tasks();
    let tasks = scenario.tasks();
    let mut online = vec![0u64; n];
    let mut by_resource: Vec<Vec<usize>> = vec![Vec::new(); scenario.resources().len()];

    for (p, task) in tasks.iter().enumerate() {
        let used = scenario.resources_of(p);
        let gain = task.offline_cost_rate - task.online_cost_rate;
        match used.as_slice() {
            [] => {
                if gain > 0.0 {
                    online[p] = task.demand;
                }
            }
            [r] => {
                if gain > 0.0 {
                    by_resource[*r].push(p);
                }
            }
            many => return Err(ModelError::NotSingleResource { task: task.id.clone(), count: many.len() }),
        }
    }

    for (r, members) in by_resource.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let resource = &scenario.resources()[r];
        let budget = integral_seconds(resource.budget(), &format!("budget of `{}`", resource.id))?;

        let mut chunks = Vec::new();
        let mut full_load = 0u64;
        for &p in members {
            let weight = integral_seconds(scenario.seconds(p, r), &format!("time of `{}`", tasks[p].id))?;
            let demand = tasks[p].demand;
            full_load = full_load.saturating_add(weight.saturating_mul(demand));
            let gain = tasks[p].offline_cost_rate - tasks[p].online_cost_rate;
            let mut left = demand;
            let mut size = 1u64;
            while left > 0 {
                let count = size.min(left);
                chunks.push(Chunk { task: p, count, weight: (weight * count) as usize, value: gain * count as f64 });
                left -= count;
                size *= 2;
            }
        }

        let width = budget.min(full_load);
        if width > MAX_KNAPSACK_WIDTH {
            return Err(ModelError::OracleDomain(format!(
                "resource `{}` needs a table of {} seconds, above the limit of {MAX_KNAPSACK_WIDTH}",
                resource.id, width
            )));
        }
        let width = width as usize;

        // best[c]: largest saving using at most c seconds.
        let mut best = vec![0.0f64; width + 1];
        let mut taken = vec![vec![false; width + 1]; chunks.len()];
        for (k, chunk) in chunks.iter().enumerate() {
            if chunk.weight > width {
                continue;
            }
            for c in (chunk.weight..=width).rev() {
                let candidate = best[c - chunk.weight] + chunk.value;
                if candidate > best[c] {
                    best[c] = candidate;
                    taken[k][c] = true;
                }
            }
        }
        let mut c = width;
        for (k, chunk) in chunks.iter().enumerate().rev() {
            if taken[k][c] {
                online[chunk.task] += chunk.count;
                c -= chunk.weight;
            }
        }
    }

    let offline: Vec<u64> = tasks.iter().zip(&online).map(|(t, &on)| t.demand - on).collect();
    Ok(BalancingPlan::from_quantities(scenario, &online, &offline))
}
