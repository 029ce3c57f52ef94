use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use super::emit::write_atomic;
use super::IoError;
use crate::line_model::{BalancingScenario, ConsumptionMatrix, ResourceSpec, TaskSpec};
use crate::planning::LayoutSpec;

const PROCESS_COLUMNS: [&str; 4] = ["task", "description", "resource", "cycle_time_sec"];
const RESOURCE_COLUMNS: [&str; 3] = ["resource", "available_machines", "daily_capacity_sec"];

pub const PROCESS_SHEET_FILE: &str = "process_sheet.csv";
pub const RESOURCES_FILE: &str = "resources.csv";
pub const SCENARIO_FILE: &str = "scenario.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioFiles {
    pub process_sheet: PathBuf,
    pub resources: PathBuf,
    pub scenario_config: PathBuf,
}

impl ScenarioFiles {
    /// The three files under their conventional names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        ScenarioFiles {
            process_sheet: dir.join(PROCESS_SHEET_FILE),
            resources: dir.join(RESOURCES_FILE),
            scenario_config: dir.join(SCENARIO_FILE),
        }
    }
}

/// A scenario plus the optional line layout carried by its config.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: BalancingScenario,
    pub layout: Option<LayoutSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskRates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    online: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offline: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    demand: BTreeMap<String, u64>,
    online_rate: f64,
    offline_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rates_per_task: Option<BTreeMap<String, TaskRates>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workday_sec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stations: Option<BTreeMap<String, u64>>,
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub fn load_scenario(files: &ScenarioFiles) -> Result<BalancingScenario, IoError> {
    Ok(load_bundle(files)?.scenario)
}

pub fn load_bundle(files: &ScenarioFiles) -> Result<LoadedScenario, IoError> {
    let process = read(&files.process_sheet)?;
    let resources = read(&files.resources)?;
    let config = read(&files.scenario_config)?;
    parse_bundle(
        (&files.process_sheet.display().to_string(), &process),
        (&files.resources.display().to_string(), &resources),
        (&files.scenario_config.display().to_string(), &config),
    )
}

struct Record {
    line: u64,
    fields: HashMap<String, String>,
}

fn read_csv(file: &str, text: &str, required: &[&str]) -> Result<Vec<Record>, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| IoError::parse(file, Some(1), None, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    for col in required {
        if !headers.iter().any(|h| h == col) {
            return Err(IoError::parse(file, Some(1), Some(col), "missing column"));
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            IoError::parse(file, line, None, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fields = headers.iter().cloned().zip(record.iter().map(str::to_string)).collect();
        out.push(Record { line, fields });
    }
    Ok(out)
}

impl Record {
    fn text<'a>(&'a self, file: &str, col: &str) -> Result<&'a str, IoError> {
        self.fields
            .get(col)
            .map(String::as_str)
            .ok_or_else(|| IoError::parse(file, Some(self.line), Some(col), "missing field"))
    }

    fn id(&self, file: &str, col: &str) -> Result<String, IoError> {
        let v = self.text(file, col)?;
        if v.is_empty() {
            return Err(IoError::parse(file, Some(self.line), Some(col), "empty id"));
        }
        Ok(v.to_string())
    }

    fn non_negative(&self, file: &str, col: &str) -> Result<f64, IoError> {
        let raw = self.text(file, col)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| IoError::parse(file, Some(self.line), Some(col), format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(IoError::parse(file, Some(self.line), Some(col), format!("`{raw}` is not finite")));
        }
        if v < 0.0 {
            return Err(IoError::parse(file, Some(self.line), Some(col), format!("negative value {raw}")));
        }
        Ok(v)
    }

    fn count(&self, file: &str, col: &str) -> Result<u64, IoError> {
        let raw = self.text(file, col)?;
        if raw.starts_with('-') {
            return Err(IoError::parse(file, Some(self.line), Some(col), format!("negative value {raw}")));
        }
        raw.parse()
            .map_err(|_| IoError::parse(file, Some(self.line), Some(col), format!("`{raw}` is not a whole number")))
    }
}

/// Parses a scenario from in-memory texts. Each argument is `(name, contents)`;
/// names only appear in error messages.
pub fn parse_bundle(
    process_sheet: (&str, &str),
    resources: (&str, &str),
    config: (&str, &str),
) -> Result<LoadedScenario, IoError> {
    let (rfile, rtext) = resources;
    let mut resource_specs = Vec::new();
    let mut resource_ids = HashSet::new();
    for rec in read_csv(rfile, rtext, &RESOURCE_COLUMNS)? {
        let id = rec.id(rfile, "resource")?;
        if !resource_ids.insert(id.clone()) {
            return Err(IoError::parse(rfile, Some(rec.line), Some("resource"), format!("duplicate id `{id}`")));
        }
        let machines = rec.count(rfile, "available_machines")?;
        let capacity = rec.non_negative(rfile, "daily_capacity_sec")?;
        if capacity == 0.0 {
            return Err(IoError::parse(rfile, Some(rec.line), Some("daily_capacity_sec"), "must be positive"));
        }
        resource_specs.push(ResourceSpec::new(id, machines).with_daily_capacity(capacity));
    }

    let (cfile, ctext) = config;
    let config: ScenarioConfig = serde_json::from_str(ctext)
        .map_err(|e| IoError::parse(cfile, Some(e.line() as u64), None, e.to_string()))?;

    let (pfile, ptext) = process_sheet;
    let mut task_ids = HashSet::new();
    let mut rows = Vec::new();
    for rec in read_csv(pfile, ptext, &PROCESS_COLUMNS)? {
        let id = rec.id(pfile, "task")?;
        if !task_ids.insert(id.clone()) {
            return Err(IoError::parse(pfile, Some(rec.line), Some("task"), format!("duplicate id `{id}`")));
        }
        let resource = rec.text(pfile, "resource")?.to_string();
        if !resource.is_empty() && !resource_ids.contains(&resource) {
            return Err(IoError::parse(
                pfile,
                Some(rec.line),
                Some("resource"),
                format!("dangling reference to unknown resource `{resource}`"),
            ));
        }
        let seconds = rec.non_negative(pfile, "cycle_time_sec")?;
        if resource.is_empty() && seconds != 0.0 {
            return Err(IoError::parse(pfile, Some(rec.line), Some("resource"), "cycle time given without a resource"));
        }
        rows.push((id, rec.text(pfile, "description")?.to_string(), resource, seconds));
    }
    if rows.is_empty() {
        return Err(IoError::parse(pfile, None, None, "no tasks"));
    }

    let unknown_task = |section: &str, id: &str| {
        IoError::parse(cfile, None, Some(&format!("{section}.{id}")), format!("unknown task `{id}`"))
    };
    for id in config.demand.keys().filter(|k| k.as_str() != "default") {
        if !task_ids.contains(id) {
            return Err(unknown_task("demand", id));
        }
    }
    let rate = |field: &str, v: f64| {
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(IoError::parse(cfile, None, Some(field), format!("{v} is not a non-negative rate")))
        }
    };
    let online_rate = rate("online_rate", config.online_rate)?;
    let offline_rate = rate("offline_rate", config.offline_rate)?;
    let per_task = config.rates_per_task.unwrap_or_default();
    for id in per_task.keys() {
        if !task_ids.contains(id) {
            return Err(unknown_task("rates_per_task", id));
        }
    }

    let mut tasks = Vec::with_capacity(rows.len());
    let mut consumption = ConsumptionMatrix::new();
    for (id, description, resource, seconds) in rows {
        let demand = config
            .demand
            .get(&id)
            .or_else(|| config.demand.get("default"))
            .copied()
            .ok_or_else(|| IoError::parse(cfile, None, Some("demand"), format!("no demand for task `{id}` and no default")))?;
        let (mut on, mut off) = (online_rate, offline_rate);
        if let Some(r) = per_task.get(&id) {
            if let Some(v) = r.online {
                on = rate(&format!("rates_per_task.{id}.online"), v)?;
            }
            if let Some(v) = r.offline {
                off = rate(&format!("rates_per_task.{id}.offline"), v)?;
            }
        }
        if !resource.is_empty() {
            consumption.set(id.clone(), resource, seconds);
        }
        tasks.push(TaskSpec::new(id, demand, on, off).with_description(description));
    }
    let scenario = BalancingScenario::new(tasks, resource_specs, consumption)?;

    let layout = match (config.stations, config.workday_sec) {
        (Some(stations), workday) => {
            for id in stations.keys() {
                if !task_ids.contains(id) {
                    return Err(unknown_task("stations", id));
                }
            }
            let mut layout = LayoutSpec::new(stations);
            if let Some(w) = workday {
                layout = layout.with_workday(w);
            }
            layout.validate(&scenario)?;
            Some(layout)
        }
        (None, _) => None,
    };
    Ok(LoadedScenario { scenario, layout })
}

/// The three file bodies describing a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioTexts {
    pub process_sheet: String,
    pub resources: String,
    pub config: String,
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, IoError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io_err = |e: csv::Error| IoError::Unrepresentable(e.to_string());
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Unrepresentable(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Serializes a scenario into the loader's formats. Per-task rates that match
/// the first task's rates are folded into the global rates.
pub fn scenario_to_texts(scenario: &BalancingScenario, layout: Option<&LayoutSpec>) -> Result<ScenarioTexts, IoError> {
    let mut process_rows = Vec::new();
    for task in scenario.tasks() {
        let used: Vec<(&str, f64)> =
            scenario.consumption().iter().filter(|(t, _, _)| *t == task.id).map(|(_, r, s)| (r, s)).collect();
        let (resource, seconds) = match used.as_slice() {
            [] => ("", 0.0),
            [(r, s)] => (*r, *s),
            _ => {
                return Err(IoError::Unrepresentable(format!(
                    "task `{}` uses several resources; the process sheet holds one per task",
                    task.id
                )))
            }
        };
        process_rows.push(vec![task.id.clone(), task.description.clone(), resource.to_string(), seconds.to_string()]);
    }
    let process_sheet = csv_text(&PROCESS_COLUMNS, process_rows)?;

    let resource_rows = scenario
        .resources()
        .iter()
        .map(|r| vec![r.id.clone(), r.available_machines.to_string(), r.daily_capacity_per_machine.to_string()])
        .collect();
    let resources = csv_text(&RESOURCE_COLUMNS, resource_rows)?;

    let first = &scenario.tasks()[0];
    let mut rates_per_task = BTreeMap::new();
    for t in scenario.tasks() {
        let online = (t.online_cost_rate != first.online_cost_rate).then_some(t.online_cost_rate);
        let offline = (t.offline_cost_rate != first.offline_cost_rate).then_some(t.offline_cost_rate);
        if online.is_some() || offline.is_some() {
            rates_per_task.insert(t.id.clone(), TaskRates { online, offline });
        }
    }
    let config = ScenarioConfig {
        demand: scenario.tasks().iter().map(|t| (t.id.clone(), t.demand)).collect(),
        online_rate: first.online_cost_rate,
        offline_rate: first.offline_cost_rate,
        rates_per_task: (!rates_per_task.is_empty()).then_some(rates_per_task),
        workday_sec: layout.map(|l| l.workday),
        stations: layout.map(|l| l.stations.clone()),
    };
    // Keep the config's key order fixed regardless of map implementation.
    let value = serde_json::to_value(&config).map_err(|e| IoError::Unrepresentable(e.to_string()))?;
    let ordered: Map<String, Json> = match value {
        Json::Object(m) => m,
        _ => unreachable!("config serializes to an object"),
    };
    let mut config = serde_json::to_string_pretty(&ordered).map_err(|e| IoError::Unrepresentable(e.to_string()))?;
    config.push('\n');
    Ok(ScenarioTexts { process_sheet, resources, config })
}

/// Writes the scenario's three files into `dir` under their conventional names.
pub fn write_scenario(scenario: &BalancingScenario, layout: Option<&LayoutSpec>, dir: &Path) -> Result<ScenarioFiles, IoError> {
    let texts = scenario_to_texts(scenario, layout)?;
    let files = ScenarioFiles::in_dir(dir);
    write_atomic(&files.process_sheet, texts.process_sheet.as_bytes())?;
    write_atomic(&files.resources, texts.resources.as_bytes())?;
    write_atomic(&files.scenario_config, texts.config.as_bytes())?;
    Ok(files)
}
