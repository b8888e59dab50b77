use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::mc::McEstimate;

pub type ReportParams = BTreeMap<String, Value>;

/// One checked inequality.
///
/// `margin >= 0` is the pass condition. For upper bounds on an estimated
/// quantity the margin is `rhs - (lhs + 3 stderr)`; checkers with a
/// different one-sided test document their own margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub checker: String,
    pub model: String,
    pub params: ReportParams,
    pub lhs: McEstimate,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub margin: f64,
    pub pass: bool,
    /// A failure that is still within four standard errors.
    pub statistical: bool,
}

impl BoundReport {
    pub fn new(checker: &str, model: &str, params: ReportParams, lhs: McEstimate, rhs: f64, rhs_stderr: f64, margin: f64) -> Self {
        let pass = margin >= 0.0;
        Self {
            checker: checker.into(),
            model: model.into(),
            params,
            lhs,
            rhs,
            rhs_stderr,
            margin,
            pass,
            statistical: false,
        }
    }

    /// Upper bound `lhs <= rhs` at three standard errors.
    pub fn upper(checker: &str, model: &str, params: ReportParams, lhs: McEstimate, rhs: f64) -> Self {
        let margin = rhs - (lhs.mean + 3.0 * lhs.stderr);
        let mut r = Self::new(checker, model, params, lhs, rhs, 0.0, margin);
        r.statistical = !r.pass && lhs.mean + 4.0 * lhs.stderr >= rhs - 4.0 * lhs.stderr;
        r
    }

    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            checker: self.checker.clone(),
            model: self.model.clone(),
            params: self.params.clone(),
            lhs: self.lhs.mean,
            rhs: self.rhs,
            stderr: self.lhs.stderr,
            rhs_stderr: self.rhs_stderr,
            margin: self.margin,
            pass: self.pass,
            statistical: self.statistical,
            n_replicas: self.lhs.n_replicas,
            n_aborted: self.lhs.n_aborted,
        }
    }

    pub fn json_line(&self) -> String {
        self.record().json_line()
    }
}

/// The flat JSON-lines form of a report.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ReportRecord {
    pub checker: String,
    pub model: String,
    pub params: ReportParams,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub rhs_stderr: f64,
    pub margin: f64,
    pub pass: bool,
    pub statistical: bool,
    pub n_replicas: usize,
    pub n_aborted: usize,
}

impl ReportRecord {
    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("report records serialize")
    }
}

/// Build a parameter map from `(key, value)` pairs.
pub fn report_params<const N: usize>(entries: [(&str, Value); N]) -> ReportParams {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
