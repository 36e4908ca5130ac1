//! Run configuration documents.
//!
//! A configuration names an analysis, carries an analysis-specific
//! `scenario` node, and fixes the seed, trial count and output. Parsing is
//! two-stage so every schema error carries the path of the offending field.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binary::BinaryScenario;
use crate::budget::BudgetScenario;
use crate::correlated::CorrelatedScenario;
use crate::dist::Distribution;
use crate::error::Error;
use crate::forensics::ForensicsSpec;
use crate::game::{RefinementSpec, SymmetricGameSpec, TwoBuyerSpec};
use crate::refinement::DataSource;

pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Analysis {
    SignalValue,
    Bound,
    Sosd,
    BudgetSweep,
    Correlated,
    TwoBuyerGame,
    PurchaseEquilibria,
    NoPureEq,
    RefinementThreshold,
    MultiSignal,
    Forensics,
    Verify,
}

impl Analysis {
    pub const ALL: [Analysis; 12] = [
        Analysis::SignalValue,
        Analysis::Bound,
        Analysis::Sosd,
        Analysis::BudgetSweep,
        Analysis::Correlated,
        Analysis::TwoBuyerGame,
        Analysis::PurchaseEquilibria,
        Analysis::NoPureEq,
        Analysis::RefinementThreshold,
        Analysis::MultiSignal,
        Analysis::Forensics,
        Analysis::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::SignalValue => "signal-value",
            Analysis::Bound => "bound",
            Analysis::Sosd => "sosd",
            Analysis::BudgetSweep => "budget-sweep",
            Analysis::Correlated => "correlated",
            Analysis::TwoBuyerGame => "two-buyer-game",
            Analysis::PurchaseEquilibria => "purchase-equilibria",
            Analysis::NoPureEq => "no-pure-eq",
            Analysis::RefinementThreshold => "refinement-threshold",
            Analysis::MultiSignal => "multi-signal",
            Analysis::Forensics => "forensics",
            Analysis::Verify => "verify",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Analysis::ALL.iter().map(|a| a.name()).collect();
                format!(
                    "unknown analysis {s:?}; expected one of {}",
                    names.join(", ")
                )
            })
    }
}

impl Serialize for Analysis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}; expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalValueNode {
    pub binary: BinaryScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundNode {
    pub binary: BinaryScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosdNode {
    pub dominant: DataSource,
    pub dominated: DataSource,
    pub price_laws: Vec<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSweepNode {
    pub budget: BudgetScenario,
    /// Explicit budgets; otherwise `points` budgets on `[0, scale * spend(v̄)]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedNode {
    pub correlated: CorrelatedScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoPureEqNode {
    #[serde(default = "default_cost")]
    pub data_cost: f64,
    #[serde(default = "default_known_fraction")]
    pub known_fraction: f64,
}

fn default_cost() -> f64 {
    0.01
}

fn default_known_fraction() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementNode {
    pub refinement: RefinementSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisection_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiSignalNode {
    pub binary: BinaryScenario,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForensicsNode {
    pub forensics: ForensicsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyNode {
    /// Names of checks to run; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scenario {
    SignalValue(SignalValueNode),
    Bound(BoundNode),
    Sosd(SosdNode),
    BudgetSweep(BudgetSweepNode),
    Correlated(CorrelatedNode),
    TwoBuyerGame(TwoBuyerSpec),
    PurchaseEquilibria(SymmetricGameSpec),
    NoPureEq(NoPureEqNode),
    RefinementThreshold(RefinementNode),
    MultiSignal(MultiSignalNode),
    Forensics(ForensicsNode),
    Verify(VerifyNode),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub analysis: Analysis,
    pub scenario: Scenario,
    pub output: OutputSpec,
    pub seed: u64,
    pub trials: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    analysis: String,
    #[serde(default)]
    scenario: Value,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_trials")]
    trials: u64,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

/// Failure of a run, mapped to a process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 1,
            RunError::Schema { .. } => 2,
            RunError::Numerical(_) => 3,
        }
    }

    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn path_error<E: fmt::Display>(prefix: &str, e: serde_path_to_error::Error<E>) -> RunError {
    let path = e.path().to_string();
    let field = match (prefix.is_empty(), path.as_str()) {
        (true, ".") => "config".to_string(),
        (true, _) => path,
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{path}"),
    };
    RunError::schema(field, e.into_inner().to_string())
}

fn node<T: DeserializeOwned>(v: Value) -> Result<T, RunError> {
    let v = if v.is_null() {
        Value::Object(Default::default())
    } else {
        v
    };
    serde_path_to_error::deserialize(v).map_err(|e| path_error("scenario", e))
}

pub fn parse_scenario(analysis: Analysis, v: Value) -> Result<Scenario, RunError> {
    Ok(match analysis {
        Analysis::SignalValue => Scenario::SignalValue(node(v)?),
        Analysis::Bound => Scenario::Bound(node(v)?),
        Analysis::Sosd => Scenario::Sosd(node(v)?),
        Analysis::BudgetSweep => Scenario::BudgetSweep(node(v)?),
        Analysis::Correlated => Scenario::Correlated(node(v)?),
        Analysis::TwoBuyerGame => Scenario::TwoBuyerGame(node::<TwoBuyerSpec>(v)?.normalized()),
        Analysis::PurchaseEquilibria => Scenario::PurchaseEquilibria(node(v)?),
        Analysis::NoPureEq => Scenario::NoPureEq(node(v)?),
        Analysis::RefinementThreshold => Scenario::RefinementThreshold(node(v)?),
        Analysis::MultiSignal => Scenario::MultiSignal(node(v)?),
        Analysis::Forensics => Scenario::Forensics(node(v)?),
        Analysis::Verify => Scenario::Verify(node(v)?),
    })
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, RunError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let (line, column) = (inner.line(), inner.column());
        let mut err = path_error("", e);
        if let RunError::Schema { message, .. } = &mut err {
            if line > 0 && !message.contains("line") {
                message.push_str(&format!(" at line {line} column {column}"));
            }
        }
        err
    })?;
    let analysis: Analysis = raw
        .analysis
        .parse()
        .map_err(|m| RunError::schema("analysis", m))?;
    if raw.trials == 0 {
        return Err(RunError::schema("trials", "must be at least 1"));
    }
    Ok(RunConfig {
        analysis,
        scenario: parse_scenario(analysis, raw.scenario)?,
        output: raw.output,
        seed: raw.seed,
        trials: raw.trials,
    })
}

impl RunConfig {
    /// Canonical JSON form; parsing it yields an equal configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}
