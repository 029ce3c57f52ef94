//! Acceptance suite for the style A case study and the solver oracles.
//!
//! Runs without the libtest harness so that every criterion prints exactly one
//! PASS/FAIL line. The process exits non-zero if any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use linebal::fixtures::{style_a, style_a_dir};
use linebal::line_model::{build_milp, knapsack_oracle, optimize, BalancingPlan, BalancingScenario};
use linebal::milp::{brute_force_milp, solve_milp, MilpProblem, MilpSolution, MilpStatus, SolveOptions};
use linebal::planning::{all_offline_baseline, capacity_requirement_plan, cost_saving, throughput_analysis, LayoutSpec};
use linebal::report_io::{fixed, load_bundle, parse_bundle, scenario_to_texts, write_scenario, ScenarioFiles};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Capacity requirement plan as printed: task, loading (s), requested
/// machines (2 dp), available machines, shortage (1 dp).
const CAPACITY_TABLE: [(&str, f64, f64, u64, f64); 19] = [
    ("T19", 27_000.0, 0.94, 1, 0.1),
    ("T20", 36_000.0, 1.25, 1, -0.3),
    ("T21", 54_000.0, 1.88, 2, 0.1),
    ("T22", 36_000.0, 1.25, 1, -0.3),
    ("T23", 22_500.0, 0.78, 1, 0.2),
    ("T24", 18_000.0, 0.63, 1, 0.4),
    ("T25", 45_000.0, 1.56, 2, 0.4),
    ("T35", 54_000.0, 1.88, 2, 0.1),
    ("T36", 54_000.0, 1.88, 2, 0.1),
    ("T37", 108_000.0, 3.75, 3, -0.8),
    ("T38", 36_000.0, 1.25, 1, -0.3),
    ("T39", 72_000.0, 2.50, 2, -0.5),
    ("T40", 99_000.0, 3.44, 3, -0.4),
    ("T41", 27_000.0, 0.94, 1, 0.1),
    ("T42", 54_000.0, 1.88, 2, 0.1),
    ("T43", 72_000.0, 2.50, 2, -0.5),
    ("T44", 72_000.0, 2.50, 2, -0.5),
    ("T45", 63_000.0, 2.19, 2, -0.2),
    ("T46", 31_500.0, 1.09, 1, -0.1),
];

/// Pre-balance production analysis as printed: task, stations, effective
/// cycle (1 dp), daily output.
const THROUGHPUT_TABLE: [(&str, u64, f64, u64); 19] = [
    ("T19", 1, 30.0, 960),
    ("T20", 1, 40.0, 720),
    ("T21", 2, 30.0, 960),
    ("T22", 1, 40.0, 720),
    ("T23", 1, 25.0, 1152),
    ("T24", 1, 20.0, 1440),
    ("T25", 2, 25.0, 1152),
    ("T35", 2, 30.0, 960),
    ("T36", 2, 30.0, 960),
    ("T37", 3, 40.0, 720),
    ("T38", 1, 40.0, 720),
    ("T39", 2, 40.0, 720),
    ("T40", 3, 36.7, 785),
    ("T41", 1, 30.0, 960),
    ("T42", 2, 30.0, 960),
    ("T43", 2, 40.0, 720),
    ("T44", 2, 40.0, 720),
    ("T45", 2, 35.0, 823),
    ("T46", 1, 35.0, 823),
];

/// Rows where the printed output is 823 but 28800 / 35 floors to 822.
const FLOOR_DEVIATIONS: [(&str, u64); 2] = [("T45", 822), ("T46", 822)];

/// Printed online quantities that differ from the full 900.
const EXPECTED_ONLINE: [(&str, u64); 5] = [("T20", 720), ("T37", 577), ("T40", 785), ("T44", 720), ("T46", 822)];

const PAPER_OPTIMUM: f64 = 241.57;
const OPTIMUM_TOL: f64 = 0.01;
const PAPER_BASELINE: f64 = 598.5;
/// Round-off allowed between the f64 baseline total and its exact value.
const BASELINE_ROUNDOFF: f64 = 1e-9;
const PAPER_SAVING: f64 = 59.6;
const SAVING_TOL: f64 = 0.1;
const REQUESTED_TOL: f64 = 0.005;
const OBJECTIVE_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-6;
const FEASIBILITY_TOL: f64 = 1e-7;
const TOTAL_OFFLINE: u64 = 876;
const LINE_THROUGHPUT: u64 = 720;
const RANDOM_MILPS: usize = 200;
const RANDOM_LINES: usize = 50;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, ok: String) -> Self {
        if failures.is_empty() {
            Outcome { passed: true, detail: ok }
        } else {
            Outcome { passed: false, detail: failures.join("; ") }
        }
    }
}

/// Every optimal solve made by the suite, for the bound and feasibility check.
#[derive(Default)]
struct Solved {
    instances: Vec<(String, MilpProblem<f64>, MilpSolution<f64>)>,
}

/// Parses a plain decimal such as `0.035` into an exact rational.
fn decimal(text: &str) -> BigRational {
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits: BigInt = format!("{whole}{frac}").parse().expect("decimal digits");
    BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
}

/// All-offline cost recomputed in exact arithmetic from the decimal rates.
fn exact_offline_total(scenario: &BalancingScenario) -> BigRational {
    scenario
        .tasks()
        .iter()
        .map(|t| decimal(&t.offline_cost_rate.to_string()) * BigRational::from_integer(BigInt::from(t.demand)))
        .sum()
}

/// False for NaN as well as for values outside the band.
fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn load() -> (BalancingScenario, LayoutSpec) {
    let loaded = style_a().expect("bundled style A fixture loads");
    (loaded.scenario, loaded.layout.expect("style A fixture has a layout"))
}

fn capacity_plan() -> Outcome {
    let (scenario, layout) = load();
    let plan = match capacity_requirement_plan(&scenario, Some(&layout)) {
        Ok(p) => p,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let mut failures = Vec::new();
    if plan.rows.len() != CAPACITY_TABLE.len() {
        failures.push(format!("{} rows, expected {}", plan.rows.len(), CAPACITY_TABLE.len()));
    }
    for (row, &(task, loading, requested, available, shortage)) in plan.rows.iter().zip(&CAPACITY_TABLE) {
        if row.task_id != task {
            failures.push(format!("row {} is {task} in the table", row.task_id));
            continue;
        }
        if row.loading != loading {
            failures.push(format!("{task} loading {} != {loading}", row.loading));
        }
        // Compared in thousandths so that a half-way value such as 0.625
        // against 0.63 sits exactly on the tolerance.
        let gap = ((row.requested_machines - requested) * 1e3).abs();
        if (gap * 1e6).round() / 1e6 > REQUESTED_TOL * 1e3 || fixed(row.requested_machines, 2) != fixed(requested, 2) {
            failures.push(format!("{task} requested {} vs {requested}", row.requested_machines));
        }
        if row.available_machines != available {
            failures.push(format!("{task} available {} vs {available}", row.available_machines));
        }
        if (row.shortage < 0.0) != (shortage < 0.0) {
            failures.push(format!("{task} shortage sign {} vs {shortage}", row.shortage));
        }
    }
    let short = plan.rows.iter().filter(|r| r.shortage < 0.0).count();
    Outcome::new(failures, format!("19 rows; loading exact, requested within 0.005 and rendering as printed, {short} shortage rows as printed"))
}

fn throughput() -> Outcome {
    let (scenario, layout) = load();
    let report = match throughput_analysis(&scenario, &layout) {
        Ok(r) => r,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let mut failures = Vec::new();
    let mut deviations = Vec::new();
    for (row, &(task, stations, effective, printed)) in report.rows.iter().zip(&THROUGHPUT_TABLE) {
        if row.task_id != task || row.stations != stations {
            failures.push(format!("{} with {} stations vs {task} with {stations}", row.task_id, row.stations));
            continue;
        }
        if fixed(row.effective_cycle, 1) != fixed(effective, 1) {
            failures.push(format!("{task} effective cycle {}", row.effective_cycle));
        }
        let expected = FLOOR_DEVIATIONS.iter().find(|(t, _)| *t == task).map(|&(_, v)| v).unwrap_or(printed);
        if row.daily_output != Some(expected) {
            failures.push(format!("{task} daily output {:?} vs {expected}", row.daily_output));
        } else if expected != printed {
            deviations.push(format!("{task} {expected} (printed {printed})"));
        }
    }
    if report.line_throughput != Some(LINE_THROUGHPUT) {
        failures.push(format!("line throughput {:?} vs {LINE_THROUGHPUT}", report.line_throughput));
    }
    Outcome::new(
        failures,
        format!("17 rows as printed, floor deviation on {}; line throughput 720", deviations.join(", ")),
    )
}

fn optimization(solved: &mut Solved) -> Outcome {
    let (scenario, _) = load();
    let options = SolveOptions::default();
    let started = Instant::now();
    let result = optimize(&scenario, &options);
    let elapsed = started.elapsed();
    let optimized = match result {
        Ok(o) => o,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let mut failures = Vec::new();
    let objective = optimized.solution.objective.unwrap_or(f64::NAN);
    if optimized.solution.status != MilpStatus::Optimal {
        failures.push(format!("status {}", optimized.solution.status));
    }
    if !within(objective, PAPER_OPTIMUM, OPTIMUM_TOL) {
        failures.push(format!("objective {objective} outside {PAPER_OPTIMUM} +/- {OPTIMUM_TOL}"));
    }
    if fixed(objective, 1) != "241.6" {
        failures.push(format!("objective renders {}", fixed(objective, 1)));
    }
    let baseline = all_offline_baseline(&scenario).total_cost;
    let exact_baseline = exact_offline_total(&scenario);
    if exact_baseline != decimal(&PAPER_BASELINE.to_string()) {
        failures.push(format!("exact baseline {exact_baseline} != {PAPER_BASELINE}"));
    }
    if !within(baseline, PAPER_BASELINE, BASELINE_ROUNDOFF) || fixed(baseline, 1) != "598.5" {
        failures.push(format!("baseline {baseline} vs {PAPER_BASELINE}"));
    }
    let saving = cost_saving(baseline, optimized.plan.total_cost).unwrap_or(f64::NAN);
    if !within(saving, PAPER_SAVING, SAVING_TOL) {
        failures.push(format!("saving {saving}% outside {PAPER_SAVING} +/- {SAVING_TOL}"));
    }
    if elapsed.as_secs_f64() >= 1.0 {
        failures.push(format!("solve took {elapsed:?}"));
    }
    let problem = build_milp(&scenario).expect("style A model builds");
    solved.instances.push(("style A".to_string(), problem, optimized.solution.clone()));
    Outcome::new(
        failures,
        format!(
            "Optimal {objective:.6} (renders {}), baseline {PAPER_BASELINE} exact in rationals (f64 sum {baseline}), saving {}%, {} nodes in {:.1} ms",
            fixed(objective, 1),
            fixed(saving, 1),
            optimized.solution.nodes_explored,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn quantity_pattern() -> Outcome {
    let (scenario, _) = load();
    let optimized = match optimize(&scenario, &SolveOptions::default()) {
        Ok(o) => o,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let plan = &optimized.plan;
    let expected_online = |task: &str| EXPECTED_ONLINE.iter().find(|(t, _)| *t == task).map(|&(_, q)| q).unwrap_or(900);
    let mismatches: Vec<String> = plan
        .rows
        .iter()
        .filter(|r| r.online_qty != expected_online(&r.task_id) || r.offline_qty != 900 - expected_online(&r.task_id))
        .map(|r| format!("{} {}/{}", r.task_id, r.online_qty, r.offline_qty))
        .collect();

    let online: Vec<u64> = scenario.tasks().iter().map(|t| expected_online(&t.id)).collect();
    let offline: Vec<u64> = online.iter().map(|q| 900 - q).collect();
    let printed = BalancingPlan::from_quantities(&scenario, &online, &offline);
    let problem = build_milp(&scenario).expect("style A model builds");
    let mut point: Vec<f64> = plan.rows.iter().map(|r| r.online_qty as f64).collect();
    point.extend(plan.rows.iter().map(|r| r.offline_qty as f64));

    let mut failures = Vec::new();
    if (plan.total_cost - printed.total_cost).abs() > OBJECTIVE_TOL {
        failures.push(format!("objective {} vs printed pattern {}", plan.total_cost, printed.total_cost));
    }
    let violation = common::independent_violation(&problem, &point);
    if violation > FEASIBILITY_TOL {
        failures.push(format!("plan violates the model by {violation}"));
    }
    if plan.total_offline() != TOTAL_OFFLINE {
        failures.push(format!("total offline {} vs {TOTAL_OFFLINE}", plan.total_offline()));
    }
    let pattern = if mismatches.is_empty() {
        "pattern matches T20 720/180, T37 577/323, T40 785/115, T44 720/180, T46 822/78, others 900/0".to_string()
    } else {
        format!("PATTERN MISMATCH (alternative optimum): {}", mismatches.join(", "))
    };
    if !failures.is_empty() {
        failures.push(pattern.clone());
    }
    Outcome::new(failures, format!("{pattern}; total offline {}", plan.total_offline()))
}

fn oracle_equivalence(solved: &mut Solved) -> Outcome {
    let options = SolveOptions::default();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0001);
    let (mut optimal, mut infeasible) = (0, 0);
    for k in 0..RANDOM_MILPS {
        let problem = common::random_milp(&mut rng);
        let (fast, slow) = match (solve_milp(&problem, &options), brute_force_milp(&problem, &options)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                failures.push(format!("milp #{k}: {:?} / {:?}", a.err(), b.err()));
                continue;
            }
        };
        if fast.status != slow.status {
            failures.push(format!("milp #{k}: status {} vs oracle {}", fast.status, slow.status));
            continue;
        }
        match fast.status {
            MilpStatus::Optimal => {
                optimal += 1;
                let (a, b) = (fast.objective.unwrap(), slow.objective.unwrap());
                if (a - b).abs() > OBJECTIVE_TOL {
                    failures.push(format!("milp #{k}: objective {a} vs oracle {b}"));
                }
                solved.instances.push((format!("random milp #{k}"), problem, fast));
            }
            _ => infeasible += 1,
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0002);
    for k in 0..RANDOM_LINES {
        let scenario = common::random_line(&mut rng);
        match (optimize(&scenario, &options), knapsack_oracle(&scenario)) {
            (Ok(o), Ok(plan)) => {
                if (o.plan.total_cost - plan.total_cost).abs() > OBJECTIVE_TOL {
                    failures.push(format!("line #{k}: cost {} vs oracle {}", o.plan.total_cost, plan.total_cost));
                }
                let problem = build_milp(&scenario).expect("random line builds");
                solved.instances.push((format!("random line #{k}"), problem, o.solution));
            }
            (a, b) => failures.push(format!("line #{k}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    Outcome::new(
        failures,
        format!(
            "{RANDOM_MILPS} MILPs agree with lattice enumeration ({optimal} optimal, {infeasible} infeasible); \
             {RANDOM_LINES} lines agree with the knapsack DP"
        ),
    )
}

fn bound_and_feasibility(solved: &Solved) -> Outcome {
    let mut failures = Vec::new();
    let mut worst_violation: f64 = 0.0;
    for (name, problem, solution) in &solved.instances {
        let objective = solution.objective.unwrap_or(f64::NAN);
        match solution.root_lp_bound {
            Some(bound) if bound <= objective + BOUND_TOL => {}
            other => failures.push(format!("{name}: root bound {other:?} vs objective {objective}")),
        }
        let violation = common::independent_violation(problem, &solution.values);
        worst_violation = worst_violation.max(violation);
        if violation > FEASIBILITY_TOL {
            failures.push(format!("{name}: violation {violation}"));
        }
    }
    if solved.instances.is_empty() {
        failures.push("no solved instances collected".to_string());
    }
    Outcome::new(
        failures,
        format!(
            "{} optimal instances; root bound <= objective + 1e-6, worst violation {worst_violation:e}",
            solved.instances.len()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = style_a_dir();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_linebal"))
            .arg("optimize")
            .arg("--process-sheet")
            .arg(dir.join("process_sheet.csv"))
            .arg("--resources")
            .arg(dir.join("resources.csv"))
            .arg("--scenario")
            .arg(dir.join("scenario.json"))
            .args(["--format", "json"])
            .output()
    };
    let mut failures = Vec::new();
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            if !a.status.success() || !b.status.success() {
                failures.push(format!("exit codes {:?} / {:?}", a.status.code(), b.status.code()));
            }
            if a.stdout != b.stdout || a.stdout.is_empty() {
                failures.push("optimize --format json output differs between runs".to_string());
            }
            match serde_json::from_slice::<serde_json::Value>(&a.stdout) {
                Ok(doc) if doc["summary"]["rendered"]["total_cost"] == "241.6" => {}
                Ok(doc) => failures.push(format!("rendered total {}", doc["summary"]["rendered"]["total_cost"])),
                Err(e) => failures.push(format!("output is not JSON: {e}")),
            }
        }
        (a, b) => failures.push(format!("could not run binary: {:?} / {:?}", a.err(), b.err())),
    }

    let original = style_a().expect("bundled style A fixture loads");
    match scenario_to_texts(&original.scenario, original.layout.as_ref()) {
        Ok(t) => match parse_bundle(("sheet", &t.process_sheet), ("resources", &t.resources), ("config", &t.config)) {
            Ok(again) if again == original => {}
            Ok(_) => failures.push("in-memory round trip changed the scenario".to_string()),
            Err(e) => failures.push(format!("re-parse failed: {e}")),
        },
        Err(e) => failures.push(format!("emit failed: {e}")),
    }
    let tmp = tempfile::tempdir().expect("temporary directory");
    match write_scenario(&original.scenario, original.layout.as_ref(), tmp.path()).and_then(|f| load_bundle(&f)) {
        Ok(again) if again == original => {}
        Ok(_) => failures.push("file round trip changed the scenario".to_string()),
        Err(e) => failures.push(format!("file round trip failed: {e}")),
    }
    if load_bundle(&ScenarioFiles::in_dir(&dir)).ok().as_ref() != Some(&original) {
        failures.push("on-disk fixture differs from the bundled copy".to_string());
    }
    Outcome::new(failures, "two optimize --format json runs byte-identical; scenario round-trips field-for-field".to_string())
}

fn main() -> ExitCode {
    let mut solved = Solved::default();
    let started = Instant::now();
    let outcomes = [
        ("capacity plan reproduction", capacity_plan()),
        ("throughput reproduction", throughput()),
        ("optimization reproduction", optimization(&mut solved)),
        ("quantity pattern", quantity_pattern()),
        ("solver-oracle equivalence", oracle_equivalence(&mut solved)),
        ("bound and feasibility", bound_and_feasibility(&solved)),
        ("determinism", determinism()),
    ];
    let mut all = true;
    for (i, (name, outcome)) in outcomes.iter().enumerate() {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {} [{verdict}] {name}: {}", i + 1, outcome.detail);
        all &= outcome.passed;
    }
    println!("acceptance: {} in {:.2} s", if all { "all criteria pass" } else { "FAILURES" }, started.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
