use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::config::{SchemeKind, SimConfig};
use super::integrator::{integrate, sample_skeleton, Switching};
use super::trajectory::Trajectory;
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::NoiseStream;
use crate::Regime;

/// A path simulation scheme.
pub trait Scheme: Send + Sync {
    fn kind(&self) -> SchemeKind;

    /// Simulate on `[t0, cfg.horizon]` starting from `(x0, i0)`; `replica`
    /// selects the noise addresses.
    #[allow(clippy::too_many_arguments)]
    fn simulate_from(
        &self,
        m: &ModelSpec,
        t0: f64,
        x0: &[f64],
        i0: Regime,
        cfg: &SimConfig,
        noise: &NoiseStream,
        replica: u64,
    ) -> Result<Trajectory, SimError>;
}

/// Rates frozen at the start of each step; an exponential clock decides a
/// switch inside the step, whose target is picked from the row block at the
/// Euler-advanced switch point.
pub struct FrozenRate;

impl Scheme for FrozenRate {
    fn kind(&self) -> SchemeKind {
        SchemeKind::FrozenRate
    }

    fn simulate_from(
        &self,
        m: &ModelSpec,
        t0: f64,
        x0: &[f64],
        i0: Regime,
        cfg: &SimConfig,
        noise: &NoiseStream,
        replica: u64,
    ) -> Result<Trajectory, SimError> {
        integrate(m, cfg, noise, replica, t0, x0, i0, Switching::Frozen)
    }
}

/// The whole jump skeleton first, then the frozen-regime diffusion between
/// consecutive switch times. Switch times carry no discretization error.
pub struct EventDriven;

impl Scheme for EventDriven {
    fn kind(&self) -> SchemeKind {
        SchemeKind::EventDrivenExact
    }

    fn simulate_from(
        &self,
        m: &ModelSpec,
        t0: f64,
        x0: &[f64],
        i0: Regime,
        cfg: &SimConfig,
        noise: &NoiseStream,
        replica: u64,
    ) -> Result<Trajectory, SimError> {
        cfg.validate()?;
        if x0.len() != m.dim {
            return Err(ModelError::DimensionMismatch { expected: m.dim, got: x0.len() }.into());
        }
        let skeleton = sample_skeleton(&m.q, x0, t0, i0, cfg.horizon, noise, replica)?;
        integrate(m, cfg, noise, replica, t0, x0, i0, Switching::Scheduled(&skeleton))
    }
}

fn registry() -> &'static BTreeMap<&'static str, Arc<dyn Scheme>> {
    static REG: OnceLock<BTreeMap<&'static str, Arc<dyn Scheme>>> = OnceLock::new();
    REG.get_or_init(|| {
        let entries: [Arc<dyn Scheme>; 2] = [Arc::new(FrozenRate), Arc::new(EventDriven)];
        entries.into_iter().map(|s| (s.kind().name(), s)).collect()
    })
}

pub fn scheme(kind: SchemeKind) -> Arc<dyn Scheme> {
    registry()[kind.name()].clone()
}

pub fn scheme_by_name(name: &str) -> Result<Arc<dyn Scheme>, ModelError> {
    registry().get(name).cloned().ok_or_else(|| ModelError::Unknown { kind: "scheme", name: name.into() })
}

pub fn scheme_names() -> Vec<&'static str> {
    registry().keys().copied().collect()
}

/// The frozen-rate scheme from `(0, x0, i0)`.
pub fn simulate_path(
    m: &ModelSpec,
    x0: &[f64],
    i0: Regime,
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
) -> Result<Trajectory, SimError> {
    FrozenRate.simulate_from(m, 0.0, x0, i0, cfg, noise, replica)
}

/// The event-driven scheme from `(0, x0, i0)`; rates must be state independent.
pub fn simulate_state_independent(
    m: &ModelSpec,
    x0: &[f64],
    i0: Regime,
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
) -> Result<Trajectory, SimError> {
    EventDriven.simulate_from(m, 0.0, x0, i0, cfg, noise, replica)
}

/// The diffusion with the regime held at `i` on `[t0, cfg.horizon]`.
pub fn simulate_frozen_regime(
    m: &ModelSpec,
    t0: f64,
    x0: &[f64],
    i: Regime,
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
) -> Result<Trajectory, SimError> {
    integrate(m, cfg, noise, replica, t0, x0, i, Switching::Scheduled(&[]))
}

/// The K-truncated process: cutoff-scaled coefficients, folded rates,
/// frozen-rate scheme, exit time at level K recorded.
pub fn simulate_truncated(
    m: &ModelSpec,
    x0: &[f64],
    i0: Regime,
    k: usize,
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
) -> Result<Trajectory, SimError> {
    if crate::regime_graph::norm(x0) + i0 as f64 >= k as f64 {
        return Err(ModelError::InvalidArgument(format!("|x0| + i0 must be below K = {k}")).into());
    }
    let truncated = m.truncated(k)?;
    let cfg = cfg.clone().with_truncation(Some(k));
    FrozenRate.simulate_from(&truncated, 0.0, x0, i0, &cfg, noise, replica)
}

/// Run the configured scheme, truncating first when `cfg.truncation` is set.
pub fn simulate(
    m: &ModelSpec,
    x0: &[f64],
    i0: Regime,
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
) -> Result<Trajectory, SimError> {
    match cfg.truncation {
        Some(k) => simulate_truncated(m, x0, i0, k, cfg, noise, replica),
        None => scheme(cfg.scheme).simulate_from(m, 0.0, x0, i0, cfg, noise, replica),
    }
}
