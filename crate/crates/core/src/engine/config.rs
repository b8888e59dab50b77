use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Which path scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Rates frozen over each Euler step, at most one switch per step.
    FrozenRate,
    /// Exact jump skeleton first, diffusion second. State-independent rates only.
    EventDrivenExact,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::FrozenRate => "frozen_rate",
            SchemeKind::EventDrivenExact => "event_driven_exact",
        }
    }
}

/// How much of a path to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordMode {
    /// Every grid point and event.
    Full,
    /// Endpoint, running maxima, markers and the jump log only.
    #[default]
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    /// Truncation level K; also the level of the recorded exit time.
    pub truncation: Option<usize>,
    pub seed: u64,
    pub scheme: SchemeKind,
    pub record: RecordMode,
    /// End the path at the first regime switch.
    #[serde(default)]
    pub stop_at_first_switch: bool,
}

impl SimConfig {
    pub fn new(horizon: f64, dt: f64, seed: u64) -> Self {
        Self { horizon, dt, truncation: None, seed, scheme: SchemeKind::FrozenRate, record: RecordMode::Summary, stop_at_first_switch: false }
    }

    pub fn with_scheme(mut self, scheme: SchemeKind) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_truncation(mut self, k: Option<usize>) -> Self {
        self.truncation = k;
        self
    }

    pub fn with_record(mut self, record: RecordMode) -> Self {
        self.record = record;
        self
    }

    pub fn stopping_at_first_switch(mut self, flag: bool) -> Self {
        self.stop_at_first_switch = flag;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(ModelError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(ModelError::InvalidArgument(format!("horizon must be finite and >= 0, got {}", self.horizon)));
        }
        if self.truncation == Some(0) {
            return Err(ModelError::InvalidArgument("truncation level K must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of Euler steps covering `[t0, horizon]`; the last one may be short.
    pub fn steps_from(&self, t0: f64) -> usize {
        let span = (self.horizon - t0).max(0.0);
        let n = (span / self.dt).ceil() as usize;
        // Guard against a sliver step caused by rounding in span / dt.
        if n > 0 && span - (n - 1) as f64 * self.dt <= 1e-12 * self.dt {
            n - 1
        } else {
            n
        }
    }
}
