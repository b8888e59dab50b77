//! Scenario files.
//!
//! A scenario is a TOML document with four tables:
//!
//! ```toml
//! [model]            # zoo name and parameters, or a coefficient table
//! name = "switching_ou"
//! params = { beta = [1.0, 2.0] }
//!
//! [sim]              # horizon, step, truncation level, seed, scheme, replicas
//! horizon = 1.0
//! dt = 1e-3
//! seed = 20240917
//! scheme = "frozen_rate"
//! replicas = 10000
//!
//! [task]             # keys read by the chosen subcommand
//! x = [0.5]
//!
//! [output]           # where files go
//! dir = "out"
//! ```
//!
//! Unknown keys are rejected in every table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use switchdiff::engine::{SchemeKind, SimConfig};
use switchdiff::estimators::{Anchor, TestFunction};
use switchdiff::models::{zoo, ModelSpec, Params};

use crate::error::CliError;

/// Seed used when a scenario names none.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Absent only for sweeps that generate their own models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Zoo model name.
    pub name: String,
    #[serde(default)]
    pub params: Params,
    /// CSV with columns `regime,beta,a,s`: per-regime linear drift
    /// `-beta x + a` and diffusion `s I`. Overrides the same keys of a
    /// `switching_ou` model; relative paths resolve against the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub horizon: f64,
    pub dt: f64,
    /// Truncation level K.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub seed: u64,
    pub scheme: SchemeKind,
    pub replicas: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { horizon: 1.0, dt: 1e-3, k: None, seed: DEFAULT_SEED, scheme: SchemeKind::FrozenRate, replicas: 10_000 }
    }
}

impl SimSection {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.horizon, self.dt, self.seed).with_scheme(self.scheme).with_truncation(self.k)
    }
}

/// A bounded test function by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: f64 },
    /// `1{x_1 > 0}`.
    IndicatorX1Pos,
    /// The regime index, bounded by `max`.
    Regime { max: f64 },
    Gaussian { a: f64, centre: Vec<f64>, weights: Vec<f64> },
    TanhRidge { s: f64, direction: Vec<f64>, weights: Vec<f64> },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction, CliError> {
        let nonempty = |w: &Vec<f64>| {
            if w.is_empty() {
                Err(CliError::Config("test function weights must be non-empty".into()))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            FunctionSpec::Constant { value } => TestFunction::constant(*value),
            FunctionSpec::IndicatorX1Pos => TestFunction::positive_first_coordinate(),
            FunctionSpec::Regime { max } => TestFunction::new("regime", *max, |_, k| k as f64),
            FunctionSpec::Gaussian { a, centre, weights } => {
                nonempty(weights)?;
                TestFunction::gaussian_bump(*a, centre.clone(), weights.clone())
            }
            FunctionSpec::TanhRidge { s, direction, weights } => {
                nonempty(weights)?;
                TestFunction::tanh_ridge(*s, direction.clone(), weights.clone())
            }
        })
    }
}

/// Subcommand parameters. Each subcommand documents which keys it reads;
/// every key is optional here and defaulted by the subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// Starting regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Time grid or list of horizons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Starting regimes for the holding and marginal checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<usize>>,
    /// Levels K for the holding check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
    /// Number of randomized cases, for the sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    /// Burkholder-Davis-Gundy constant for the moment bounds (default 3).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bdg: Option<f64>,
    /// Positivity floor for the log-Harnack check (default 1e-6).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// JSON-lines report file name inside `dir`.
    pub reports: String,
    /// Trajectory CSV for `simulate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
    /// Binary trajectory log for `simulate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_bin: Option<String>,
    /// Plot-ready CSV table derived from the reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_csv: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), reports: "reports.jsonl".into(), trajectory_csv: None, trajectory_bin: None, plot_csv: None }
    }
}

/// Command-line overrides applied before hashing.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub dt: Option<f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn render(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(model) = cfg.model.as_mut() {
            if let Some(table) = model.table.as_ref().filter(|t| t.is_relative()) {
                let base = path.parent().unwrap_or(Path::new("."));
                model.table = Some(base.join(table));
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(s) = o.seed {
            self.sim.seed = s;
        }
        if let Some(n) = o.replicas {
            self.sim.replicas = n;
        }
        if let Some(dt) = o.dt {
            self.sim.dt = dt;
        }
    }

    /// Hex SHA-256 of the rendered configuration.
    pub fn hash(&self) -> Result<(String, [u8; 32]), CliError> {
        let digest: [u8; 32] = Sha256::digest(self.render()?.as_bytes()).into();
        let hex = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok((hex, digest))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sim.replicas == 0 {
            return Err(CliError::Config("sim.replicas must be positive".into()));
        }
        if self.sim.seed > i64::MAX as u64 {
            return Err(CliError::Config(format!("sim.seed must fit a TOML integer, got {}", self.sim.seed)));
        }
        self.sim.sim_config().validate().map_err(|e| CliError::Config(e.to_string()))
    }

    /// The model, with the coefficient table merged in when present.
    pub fn build_model(&self) -> Result<ModelSpec, CliError> {
        let model = self.model.as_ref().ok_or_else(|| CliError::Config("this subcommand needs a [model] table".into()))?;
        let mut params = model.params.clone();
        if let Some(path) = &model.table {
            if model.name != "switching_ou" {
                return Err(CliError::Config("a coefficient table needs model.name = \"switching_ou\"".into()));
            }
            for (k, v) in read_coefficient_table(path)? {
                params.insert(k, v);
            }
        }
        zoo(&model.name, &params).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRow {
    regime: usize,
    beta: f64,
    a: f64,
    s: f64,
}

fn read_coefficient_table(path: &Path) -> Result<BTreeMap<String, serde_json::Value>, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Config(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let mut rows: Vec<TableRow> = reader.deserialize().collect::<Result<_, _>>().map_err(|e| bad(&e))?;
    rows.sort_by_key(|r| r.regime);
    if rows.is_empty() || rows.iter().enumerate().any(|(k, r)| r.regime != k + 1) {
        return Err(bad(&"regimes must be exactly 1..n"));
    }
    let column = |f: fn(&TableRow) -> f64| serde_json::json!(rows.iter().map(f).collect::<Vec<_>>());
    Ok(BTreeMap::from([
        ("beta".to_string(), column(|r| r.beta)),
        ("a".to_string(), column(|r| r.a)),
        ("s".to_string(), column(|r| r.s)),
    ]))
}
