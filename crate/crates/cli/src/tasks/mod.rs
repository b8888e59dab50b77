//! Subcommands, registered by name.

mod checks;
mod simulate;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde_json::Value;
use switchdiff::engine::{SimConfig, Trajectory};
use switchdiff::estimators::BoundReport;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Everything a subcommand sees.
pub struct Context {
    pub cfg: ScenarioConfig,
    pub sim: SimConfig,
    pub config_hash: String,
    pub config_digest: [u8; 32],
}

#[derive(Debug, Default)]
pub struct TaskOutput {
    pub records: Vec<Value>,
    pub pass: bool,
    pub summary: String,
    pub trajectory: Option<Trajectory>,
    /// Some estimate lost more than the tolerated share of replicas.
    pub aborted: bool,
}

impl TaskOutput {
    pub(crate) fn from_reports(reports: &[BoundReport], summary: String) -> Self {
        Self {
            records: reports.iter().map(|r| serde_json::to_value(r.record()).expect("record")).collect(),
            pass: reports.iter().all(|r| r.pass),
            aborted: reports.iter().any(|r| r.lhs.flagged()),
            summary,
            trajectory: None,
        }
    }
}

pub trait Task: Send + Sync {
    fn name(&self) -> &'static str;
    /// `[task]` keys this subcommand reads; any other key is an error.
    fn keys(&self) -> &'static [&'static str];
    /// Checker name of the records that feed the plot table.
    fn family(&self) -> &'static str;
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError>;
}

fn registry() -> &'static BTreeMap<&'static str, Arc<dyn Task>> {
    static REG: OnceLock<BTreeMap<&'static str, Arc<dyn Task>>> = OnceLock::new();
    REG.get_or_init(|| {
        let entries: Vec<Arc<dyn Task>> = vec![
            Arc::new(simulate::Simulate),
            Arc::new(checks::Lemma21),
            Arc::new(checks::Moments),
            Arc::new(checks::Holding),
            Arc::new(checks::Harnack),
            Arc::new(checks::Feller),
            Arc::new(checks::ChainMarginal),
            Arc::new(checks::TruncationCheck),
        ];
        entries.into_iter().map(|t| (t.name(), t)).collect()
    })
}

pub fn task(name: &str) -> Result<Arc<dyn Task>, CliError> {
    registry().get(name).cloned().ok_or_else(|| {
        CliError::Config(format!("unknown subcommand `{name}`; expected one of {}", task_names().join(", ")))
    })
}

pub fn task_names() -> Vec<&'static str> {
    registry().keys().copied().collect()
}

/// Reject `[task]` keys the subcommand does not read.
pub fn check_task_keys(t: &dyn Task, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let value = serde_json::to_value(&cfg.task).map_err(|e| CliError::Config(e.to_string()))?;
    let present = value.as_object().map(|m| m.keys().cloned().collect::<Vec<_>>()).unwrap_or_default();
    match present.iter().find(|k| !t.keys().contains(&k.as_str())) {
        Some(k) => Err(CliError::Config(format!(
            "`{}` does not read task.{k}; accepted keys: {}",
            t.name(),
            t.keys().join(", ")
        ))),
        None => Ok(()),
    }
}
