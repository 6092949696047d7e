//! Machine-readable run reports.
//!
//! Reports serialize to a single JSON document with keys in sorted order and
//! every float rounded to 12 significant digits, so identical runs produce
//! identical bytes apart from `wall_time`.

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::admm::{SolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::oracle::OracleResult;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The reported solve; for a sweep, the best run.
    pub solve: SolveResult,
    pub oracle: Option<OracleReport>,
    pub metrics: Option<Metrics>,
    pub config: ConfigEcho,
    /// One entry per sweep run, sorted by seed then rho. Empty for a single run.
    pub sweep: Vec<SweepEntry>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    #[serde(flatten)]
    pub result: OracleResult,
    /// `(solve − oracle) / oracle`, or the absolute difference when the
    /// optimum is zero. `None` if the oracle found no feasible labelling.
    pub gap: Option<f64>,
}

impl OracleReport {
    pub fn new(result: OracleResult, objective: f64) -> Self {
        let gap = result.best_objective.map(|best| {
            let diff = objective - best;
            if best > 0.0 {
                diff / best
            } else {
                diff
            }
        });
        Self { result, gap }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub nmi: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Where the points came from: a file path or a blob specification.
    pub source: String,
    pub constraints: Option<String>,
    pub solver: SolverConfig,
    pub oracle_limit: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub seed: u64,
    pub rho: f64,
    pub objective: f64,
    pub feasible: bool,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
}

impl SweepEntry {
    pub fn of(seed: u64, rho: f64, r: &SolveResult) -> Self {
        Self {
            seed,
            rho,
            objective: r.objective,
            feasible: r.feasible(),
            converged: r.converged,
            diverged: r.diverged,
            iterations: r.iterations,
        }
    }
}

/// Rounds to `SIGNIFICANT_DIGITS` significant digits.
pub fn round_significant(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .unwrap_or(v)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num.as_f64().map(round_significant).and_then(Number::from_f64) {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Validation(format!("report JSON: {e}"))
}

impl RunReport {
    fn canonical_value(&self) -> Result<Value> {
        let mut value = serde_json::to_value(self).map_err(json_error)?;
        round_value(&mut value);
        Ok(value)
    }

    /// Applies the float rounding of the serialized form, so that
    /// `from_json(to_json(r)) == r` holds for the result.
    pub fn normalized(&self) -> Result<Self> {
        serde_json::from_value(self.canonical_value()?).map_err(json_error)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.canonical_value()?).map_err(json_error)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }
}
