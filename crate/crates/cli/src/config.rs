//! Generation requests read from JSON.

use std::fs;
use std::path::Path;

use patrol_core::values::parse_rational;
use patrol_core::ValueVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Dyadic,
    Golden,
    Matching,
    Iid,
}

impl Strategy {
    /// Whether values must be exact rationals.
    pub fn exact(self) -> bool {
        self != Strategy::Iid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixtureMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub strategy: Strategy,
    pub values: Vec<Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub mixture_mode: Option<MixtureMode>,
    #[serde(default)]
    pub samples: Option<usize>,
}

/// Target values, exact unless the strategy tolerates floats.
#[derive(Clone, Debug)]
pub enum Values {
    Exact(ValueVector),
    Float(Vec<f64>),
}

impl Values {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Values::Exact(v) => v.to_f64(),
            Values::Float(v) => v.clone(),
        }
    }

    /// Canonical text form: `a/b` for exact values, shortest decimal otherwise.
    pub fn labels(&self) -> Vec<String> {
        match self {
            Values::Exact(v) => v.iter().map(|x| x.to_string()).collect(),
            Values::Float(v) => v.iter().map(|x| x.to_string()).collect(),
        }
    }
}

/// Float tolerance on the sum of i.i.d. values.
const FLOAT_SUM_TOLERANCE: f64 = 1e-9;

fn check_float_values(values: &[f64]) -> CliResult<()> {
    let bad = |msg: String| Err(CliError::Input(msg));
    if values.is_empty() {
        return bad("no values given".into());
    }
    if let Some(x) = values.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return bad(format!("value {x} must be positive"));
    }
    if let Some(x) = values.iter().find(|x| **x > 0.5 + FLOAT_SUM_TOLERANCE) {
        return bad(format!("value {x} exceeds 1/2"));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > FLOAT_SUM_TOLERANCE {
        return bad(format!("values sum to {total}, not 1"));
    }
    Ok(())
}

/// Parses values given as JSON strings or, for strategies that allow it, numbers.
pub fn parse_values(strategy: Strategy, raw: &[Value]) -> CliResult<Values> {
    if strategy.exact() {
        let texts = raw
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                other => Err(CliError::Input(format!(
                    "value {other} must be a rational string such as \"1/3\" for this strategy"
                ))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok(Values::Exact(ValueVector::parse(&texts)?));
    }
    let floats = raw
        .iter()
        .map(|v| match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| CliError::Input(format!("bad number {n}"))),
            Value::String(s) => parse_rational(s)
                .ok()
                .and_then(|r| num_traits::ToPrimitive::to_f64(&r))
                .or_else(|| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Input(format!("cannot parse value {s:?}"))),
            other => Err(CliError::Input(format!(
                "value {other} is neither a number nor a string"
            ))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    check_float_values(&floats)?;
    Ok(Values::Float(floats))
}

pub fn load(path: &Path) -> CliResult<Config> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
}
