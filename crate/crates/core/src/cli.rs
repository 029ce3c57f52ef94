//! The `linebal` command line.
//!
//! Exit codes: 0 success, 1 usage/validation/parse/I-O error, 2 the solver
//! did not prove optimality (node or iteration limit, infeasible or unbounded
//! problem).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::line_model::{optimize, ModelError};
use crate::milp::{solve_milp, MilpError, MilpStatus, SolveOptions};
use crate::planning::{
    all_offline_baseline, capacity_requirement_plan, compare, cost_sheet, throughput_analysis, whatif, Override,
    PlanningError,
};
use crate::report_io::{load_bundle, load_problem, render_report, write_atomic, Format, IoError, LoadedScenario, Report, ScenarioFiles};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_OPTIMAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "linebal", version, about = "Assembly-line balancing with an exact MILP solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Process sheet CSV: task,description,resource,cycle_time_sec
    #[arg(long, value_name = "PATH")]
    pub process_sheet: PathBuf,
    /// Resources CSV: resource,available_machines,daily_capacity_sec
    #[arg(long, value_name = "PATH")]
    pub resources: PathBuf,
    /// Scenario JSON: demand, rates and optional layout
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Branch-and-bound node budget
    #[arg(long, value_name = "N")]
    pub max_nodes: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        let mut options = SolveOptions::default();
        if let Some(n) = self.max_nodes {
            options.max_nodes = n;
        }
        options
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Machines required per task against availability
    CapacityPlan {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Daily output per task on the current layout
    Throughput {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cost sheet of the optimal online/offline plan
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Cost sheet with every piece made offline
    Baseline {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// All-offline baseline against the optimum
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Re-solve with parameter overrides
    Whatif {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Override such as `task.T37.demand=800` or `resource.Manual.machines=13`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Solve a generic MILP given as JSON
    Solve {
        /// Problem JSON: costs, constraints, lower, upper, integral
        #[arg(long, value_name = "PATH")]
        problem: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn solver_code(e: &MilpError) -> i32 {
    match e {
        MilpError::Invalid { .. } | MilpError::LatticeTooLarge { .. } => EXIT_INVALID,
        MilpError::UnboundedRelaxation | MilpError::IterationLimit(_) => EXIT_NOT_OPTIMAL,
    }
}

fn model_code(e: &ModelError) -> i32 {
    match e {
        ModelError::NotOptimal(_) => EXIT_NOT_OPTIMAL,
        ModelError::Solver(s) => solver_code(s),
        _ => EXIT_INVALID,
    }
}

fn planning_code(e: &PlanningError) -> i32 {
    match e {
        PlanningError::Model(m) => model_code(m),
        _ => EXIT_INVALID,
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match &e {
            IoError::Model(m) => model_code(m),
            IoError::Planning(p) => planning_code(p),
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure { code: model_code(&e), message: e.to_string() }
    }
}

impl From<PlanningError> for Failure {
    fn from(e: PlanningError) -> Self {
        Failure { code: planning_code(&e), message: e.to_string() }
    }
}

impl From<MilpError> for Failure {
    fn from(e: MilpError) -> Self {
        Failure { code: solver_code(&e), message: e.to_string() }
    }
}

fn load(args: &ScenarioArgs) -> Result<LoadedScenario, Failure> {
    let files = ScenarioFiles {
        process_sheet: args.process_sheet.clone(),
        resources: args.resources.clone(),
        scenario_config: args.scenario.clone(),
    };
    Ok(load_bundle(&files)?)
}

fn emit(report: &dyn Report, output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = render_report(report, output.format);
    match &output.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Failure::from(IoError::io("<stdout>", e)))?,
    }
    Ok(())
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::CapacityPlan { scenario, output } => {
            let loaded = load(scenario)?;
            let plan = capacity_requirement_plan(&loaded.scenario, loaded.layout.as_ref())?;
            emit(&plan, output, stdout)?;
        }
        Command::Throughput { scenario, output } => {
            let loaded = load(scenario)?;
            let layout = loaded.layout.as_ref().ok_or_else(|| Failure {
                code: EXIT_INVALID,
                message: format!("{}: throughput needs a `stations` map in the scenario", scenario.scenario.display()),
            })?;
            emit(&throughput_analysis(&loaded.scenario, layout)?, output, stdout)?;
        }
        Command::Optimize { scenario, output, solver } => {
            let loaded = load(scenario)?;
            let optimized = optimize(&loaded.scenario, &solver.options())?;
            let mut sheet = cost_sheet(&optimized.plan, &loaded.scenario)?;
            sheet.title = "Optimized Production Cost Sheet".to_string();
            emit(&sheet, output, stdout)?;
        }
        Command::Baseline { scenario, output } => {
            let loaded = load(scenario)?;
            let plan = all_offline_baseline(&loaded.scenario);
            let mut sheet = cost_sheet(&plan, &loaded.scenario)?;
            sheet.title = "All Offline Production Cost Sheet".to_string();
            emit(&sheet, output, stdout)?;
        }
        Command::Compare { scenario, output, solver } => {
            let loaded = load(scenario)?;
            emit(&compare(&loaded.scenario, &solver.options())?, output, stdout)?;
        }
        Command::Whatif { scenario, output, solver, set } => {
            let overrides = set.iter().map(|s| s.parse::<Override>()).collect::<Result<Vec<_>, _>>()?;
            let loaded = load(scenario)?;
            emit(&whatif(&loaded.scenario, &overrides, &solver.options())?.report, output, stdout)?;
        }
        Command::Solve { problem, output, solver } => {
            let problem = load_problem(problem)?;
            let solution = solve_milp(&problem, &solver.options())?;
            emit(&solution, output, stdout)?;
            if solution.status != MilpStatus::Optimal {
                return Ok(EXIT_NOT_OPTIMAL);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
/// Reports go to `stdout` (or `--out`), diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
