use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::IoError;
use crate::milp::{LinearConstraint, MilpProblem, Relation};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    coeffs: Vec<f64>,
    rel: Relation,
    rhs: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    costs: Vec<f64>,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
    lower: Option<Vec<f64>>,
    /// `null` entries mean no upper bound.
    upper: Option<Vec<Option<f64>>>,
    integral: Option<Vec<bool>>,
}

/// Parses the generic MILP JSON format:
/// `{"costs": [..], "constraints": [{"coeffs": [..], "rel": "le"|"ge"|"eq", "rhs": x}],
///   "lower": [..], "upper": [x | null, ..], "integral": [bool, ..]}`.
/// Omitted bounds default to `0..inf`, omitted `integral` to all continuous.
pub fn parse_problem(name: &str, text: &str) -> Result<MilpProblem<f64>, IoError> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| IoError::parse(name, Some(e.line() as u64), None, e.to_string()))?;
    let mut problem = MilpProblem::new(file.costs);
    problem.constraints =
        file.constraints.into_iter().map(|c| LinearConstraint::new(c.coeffs, c.rel, c.rhs)).collect();
    if let Some(lower) = file.lower {
        problem.lower_bounds = lower;
    }
    if let Some(upper) = file.upper {
        problem.upper_bounds = upper;
    }
    if let Some(integral) = file.integral {
        problem.integral = integral;
    }
    problem.validate().map_err(|e| IoError::parse(name, None, None, e.to_string()))?;
    Ok(problem)
}

pub fn load_problem(path: &Path) -> Result<MilpProblem<f64>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_problem(&path.display().to_string(), &text)
}
