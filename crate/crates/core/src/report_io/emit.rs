use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};

use super::IoError;
use crate::milp::MilpSolution;
use crate::planning::{CapacityPlan, ComparisonReport, CostSheet, ThroughputReport};

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text, csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

/// Full-precision value behind a cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Int(u64),
    Num(f64),
    Missing,
}

/// A value and its presentation string.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub value: Value,
    pub rendered: String,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        let s = s.into();
        Cell { rendered: s.clone(), value: Value::Text(s) }
    }

    pub fn int(n: u64) -> Self {
        Cell { value: Value::Int(n), rendered: n.to_string() }
    }

    /// A number shown at `dp` decimal places.
    pub fn num(x: f64, dp: usize) -> Self {
        Cell { value: Value::Num(x), rendered: fixed(x, dp) }
    }

    /// A number shown in its shortest exact form.
    pub fn plain(x: f64) -> Self {
        Cell { value: Value::Num(x), rendered: plain(x) }
    }

    pub fn missing(rendered: impl Into<String>) -> Self {
        Cell { value: Value::Missing, rendered: rendered.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub key: String,
    pub label: String,
    pub align: Align,
}

impl Column {
    fn new(key: &str, label: &str, align: Align) -> Self {
        Column { key: key.to_string(), label: label.to_string(), align }
    }
}

/// Generic tabular form every report is rendered from.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub report: String,
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary lines as `(key, label, cell)`.
    pub footer: Vec<(String, String, Cell)>,
}

pub trait Report {
    fn to_table(&self) -> Table;
}

/// Rounds half away from zero to `dp` places and formats with exactly `dp`
/// decimals. Negative zero prints without a sign.
pub fn fixed(x: f64, dp: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let scale = 10f64.powi(dp as i32);
    let mut r = (x * scale).round() / scale;
    if r == 0.0 {
        r = 0.0;
    }
    format!("{r:.dp$}")
}

fn plain(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        x.to_string()
    }
}

fn footer(key: &str, label: &str, cell: Cell) -> (String, String, Cell) {
    (key.to_string(), label.to_string(), cell)
}

impl Report for CapacityPlan {
    fn to_table(&self) -> Table {
        use Align::*;
        let columns = vec![
            Column::new("task", "Task", Left),
            Column::new("resource", "Resource", Left),
            Column::new("cycle_time", "Cycle Time", Right),
            Column::new("loading", "Loading (sec)", Right),
            Column::new("requested_machines", "Request no. of M/C (set)", Right),
            Column::new("available_machines", "Available no. of M/C (set)", Right),
            Column::new("shortage", "Shortage no. of M/C (set)", Right),
        ];
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::text(&r.task_id),
                    Cell::text(&r.resource_id),
                    Cell::plain(r.cycle_time),
                    Cell::plain(r.loading),
                    Cell::num(r.requested_machines, 2),
                    Cell::int(r.available_machines),
                    Cell::num(r.shortage, 1),
                ]
            })
            .collect();
        Table {
            report: "capacity_plan".to_string(),
            title: "Capacity Requirement Plan".to_string(),
            columns,
            rows,
            footer: vec![],
        }
    }
}

impl Report for ThroughputReport {
    fn to_table(&self) -> Table {
        use Align::*;
        let columns = vec![
            Column::new("task", "Task", Left),
            Column::new("cycle_time", "Cycle Time (sec/pc)", Right),
            Column::new("stations", "Number of workstation", Right),
            Column::new("effective_cycle", "Cycle Time after counted workstation (sec/pc)", Right),
            Column::new("daily_output", "Daily Output (pcs/day)", Right),
            Column::new("remark", "Remark", Left),
        ];
        let output = |o: Option<u64>| o.map(Cell::int).unwrap_or_else(|| Cell::missing("unbounded"));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::text(&r.task_id),
                    Cell::plain(r.cycle_time),
                    Cell::int(r.stations),
                    Cell::num(r.effective_cycle, 1),
                    output(r.daily_output),
                    Cell::text(r.wip_flag.label()),
                ]
            })
            .collect();
        Table {
            report: "throughput".to_string(),
            title: "Production Analysis".to_string(),
            columns,
            rows,
            footer: vec![footer("line_throughput", "Through-put (pcs/day)", output(self.line_throughput))],
        }
    }
}

impl Report for CostSheet {
    fn to_table(&self) -> Table {
        use Align::*;
        let columns = vec![
            Column::new("task", "Task", Left),
            Column::new("online_qty", "Online Qty (pcs)", Right),
            Column::new("online_rate", "Online Cost Rate (RMB/pc)", Right),
            Column::new("offline_qty", "Offline Qty (pcs)", Right),
            Column::new("offline_rate", "Offline Cost Rate (RMB/pc)", Right),
            Column::new("total", "Total Cost (RMB)", Right),
        ];
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::text(&r.task_id),
                    Cell::int(r.online_qty),
                    Cell::plain(r.online_rate),
                    Cell::int(r.offline_qty),
                    Cell::plain(r.offline_rate),
                    Cell::num(r.total, 1),
                ]
            })
            .collect();
        Table {
            report: "cost_sheet".to_string(),
            title: self.title.clone(),
            columns,
            rows,
            footer: vec![footer("total_cost", "Total Cost (RMB)", Cell::num(self.total, 1))],
        }
    }
}

impl Report for ComparisonReport {
    fn to_table(&self) -> Table {
        let columns = vec![Column::new("plan", "Plan", Align::Left), Column::new("total_cost", "Total Cost (RMB)", Align::Right)];
        let rows = vec![
            vec![Cell::text(&self.baseline_label), Cell::num(self.baseline_cost, 1)],
            vec![Cell::text(&self.optimized_label), Cell::num(self.optimized_cost, 1)],
        ];
        let saving = match self.saving_percent {
            Some(p) => Cell { value: Value::Num(p), rendered: format!("{}%", fixed(p, 1)) },
            None => Cell::missing("n/a"),
        };
        Table {
            report: "comparison".to_string(),
            title: "Cost Comparison".to_string(),
            columns,
            rows,
            footer: vec![
                footer("baseline_cost", "Baseline Cost (RMB)", Cell::num(self.baseline_cost, 1)),
                footer("optimized_cost", "Optimized Cost (RMB)", Cell::num(self.optimized_cost, 1)),
                footer("saving_percent", "Cost Saving", saving),
            ],
        }
    }
}

impl Report for MilpSolution<f64> {
    fn to_table(&self) -> Table {
        let columns = vec![Column::new("var", "Variable", Align::Left), Column::new("value", "Value", Align::Right)];
        let rows = self.values.iter().enumerate().map(|(j, &v)| vec![Cell::text(format!("x{j}")), Cell::plain(v)]).collect();
        let opt = |v: Option<f64>| v.map(Cell::plain).unwrap_or_else(|| Cell::missing("-"));
        Table {
            report: "milp_solution".to_string(),
            title: "MILP Solution".to_string(),
            columns,
            rows,
            footer: vec![
                footer("status", "Status", Cell::text(self.status.to_string())),
                footer("objective", "Objective", opt(self.objective)),
                footer("root_lp_bound", "Root LP Bound", opt(self.root_lp_bound)),
                footer("nodes_explored", "Nodes Explored", Cell::int(self.nodes_explored)),
            ],
        }
    }
}

fn render_text(table: &Table) -> String {
    let widths: Vec<usize> = table
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| table.rows.iter().map(|r| r[j].rendered.chars().count()).fold(c.label.chars().count(), usize::max))
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&table.columns)
            .zip(&widths)
            .map(|((s, c), &w)| match c.align {
                Align::Left => format!("{s:<w$}"),
                Align::Right => format!("{s:>w$}"),
            })
            .collect();
        let mut l = padded.join("  ").trim_end().to_string();
        l.push('\n');
        l
    };
    let mut out = format!("{}\n", table.title);
    out += &line(table.columns.iter().map(|c| c.label.as_str()).collect());
    out += &line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for row in &table.rows {
        out += &line(row.iter().map(|c| c.rendered.as_str()).collect());
    }
    for (_, label, cell) in &table.footer {
        out += &format!("{label}: {}\n", cell.rendered);
    }
    out
}

fn render_csv(table: &Table) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let width = table.columns.len();
    let result: csv::Result<()> = (|| {
        w.write_record(table.columns.iter().map(|c| c.label.as_str()))?;
        for row in &table.rows {
            w.write_record(row.iter().map(|c| c.rendered.as_str()))?;
        }
        for (_, label, cell) in &table.footer {
            let mut record = vec![format!("{label}:")];
            record.resize(width.max(2) - 1, String::new());
            record.push(cell.rendered.clone());
            w.write_record(&record)?;
        }
        Ok(())
    })();
    result.expect("writing csv to memory cannot fail");
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

fn json_value(v: &Value) -> Json {
    match v {
        Value::Text(s) => Json::String(s.clone()),
        Value::Int(n) => Json::Number((*n).into()),
        Value::Num(x) => Number::from_f64(*x).map(Json::Number).unwrap_or(Json::Null),
        Value::Missing => Json::Null,
    }
}

fn json_object<'a>(entries: impl Iterator<Item = (&'a str, &'a Cell)>) -> Json {
    let mut values = Map::new();
    let mut rendered = Map::new();
    for (key, cell) in entries {
        values.insert(key.to_string(), json_value(&cell.value));
        rendered.insert(key.to_string(), Json::String(cell.rendered.clone()));
    }
    values.insert("rendered".to_string(), Json::Object(rendered));
    Json::Object(values)
}

fn render_json(table: &Table) -> String {
    let rows: Vec<Json> = table
        .rows
        .iter()
        .map(|row| json_object(table.columns.iter().map(|c| c.key.as_str()).zip(row)))
        .collect();
    let mut doc = Map::new();
    doc.insert("report".to_string(), Json::String(table.report.clone()));
    doc.insert("title".to_string(), Json::String(table.title.clone()));
    doc.insert("rows".to_string(), Json::Array(rows));
    doc.insert("summary".to_string(), json_object(table.footer.iter().map(|(k, _, c)| (k.as_str(), c))));
    let mut s = serde_json::to_string_pretty(&Json::Object(doc)).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn render_report(report: &dyn Report, format: Format) -> String {
    let table = report.to_table();
    match format {
        Format::Text => render_text(&table),
        Format::Csv => render_csv(&table),
        Format::Json => render_json(&table),
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into
/// place. On error `path` is left untouched.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| IoError::io(path, e))?;
    tmp.write_all(bytes).and_then(|_| tmp.flush()).map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{CapacityPlanRow, CostSheetRow};

    #[test]
    fn fixed_rounds_half_away_from_zero() {
        assert_eq!(fixed(0.0625, 1), "0.1");
        assert_eq!(fixed(-0.75, 1), "-0.8");
        assert_eq!(fixed(0.625, 2), "0.63");
        assert_eq!(fixed(241.572, 1), "241.6");
        assert_eq!(fixed(-0.04, 1), "0.0");
        assert_eq!(fixed(-0.09375, 1), "-0.1");
        assert_eq!(fixed(2.5, 0), "3");
        assert_eq!(fixed(3.4375, 2), "3.44");
    }

    fn sheet() -> CostSheet {
        CostSheet {
            title: "Sheet".to_string(),
            rows: vec![CostSheetRow {
                task_id: "T37".to_string(),
                online_qty: 577,
                online_rate: 0.013,
                offline_qty: 323,
                offline_rate: 0.035,
                total: 577.0 * 0.013 + 323.0 * 0.035,
            }],
            total: 241.572,
        }
    }

    #[test]
    fn text_is_aligned_with_footer() {
        let text = render_report(&sheet(), Format::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Sheet");
        assert!(lines[1].starts_with("Task  Online Qty (pcs)"));
        assert!(lines[3].ends_with("18.8"));
        assert_eq!(lines[4], "Total Cost (RMB): 241.6");
        assert_eq!(lines[1].len(), lines[2].len());
    }

    #[test]
    fn json_has_full_precision_and_rendered() {
        let doc: Json = serde_json::from_str(&render_report(&sheet(), Format::Json)).unwrap();
        assert_eq!(doc["report"], "cost_sheet");
        assert_eq!(doc["summary"]["total_cost"], 241.572);
        assert_eq!(doc["summary"]["rendered"]["total_cost"], "241.6");
        assert_eq!(doc["rows"][0]["online_qty"], 577);
        assert_eq!(doc["rows"][0]["rendered"]["total"], "18.8");
    }

    #[test]
    fn csv_quotes_commas_and_empty_is_header_only() {
        let plan = CapacityPlan {
            rows: vec![CapacityPlanRow {
                task_id: "T1".to_string(),
                resource_id: "Sewing, single".to_string(),
                cycle_time: 30.0,
                loading: 27_000.0,
                requested_machines: 0.9375,
                available_machines: 1,
                shortage: 0.0625,
            }],
        };
        let csv = render_report(&plan, Format::Csv);
        assert_eq!(csv.lines().nth(1).unwrap(), "T1,\"Sewing, single\",30,27000,0.94,1,0.1");
        let empty = render_report(&CapacityPlan { rows: vec![] }, Format::Csv);
        assert_eq!(empty.lines().count(), 1);
    }

    #[test]
    fn comparison_renders_percent() {
        let r = ComparisonReport::new("all offline", 598.5, "optimized", 241.572);
        let text = render_report(&r, Format::Text);
        assert!(text.contains("Cost Saving: 59.6%"), "{text}");
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/out.txt"), b"x").is_err());
    }
}
