use super::mc::{partition_outcomes, replicate, McEstimate};
use super::report::{report_params, BoundReport};
use super::require;
use crate::engine::{simulate, SimConfig};
use crate::error::{ModelError, SimError};
use crate::models::{Assumption, ModelSpec};
use crate::noise::NoiseStream;
use crate::numeric::adaptive_simpson;
use crate::regime_graph::norm;
use crate::Regime;

/// Default Burkholder-Davis-Gundy constant. Any valid L^1 constant works;
/// the bound grows with it, so a larger value only loosens the check.
pub const DEFAULT_BDG_CONSTANT: f64 = 3.0;

/// `int_0^t c(s) ds` for the growth envelope of `m`.
pub fn growth_integral(m: &ModelSpec, t: f64) -> Result<f64, ModelError> {
    let c = m.growth.as_ref().ok_or(ModelError::MissingMetadata("growth envelope c(t)"))?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(adaptive_simpson(|s| c(s), 0.0, t, 1e-10 * t))
}

/// `(4/3 |x|^2 + 4 i^2) exp((4 + 4/3 C1^2) int_0^T c + 8 kappa^2 (alpha^2 + beta^2 + 2)(T + 1) T)`.
pub fn moment_bound_rhs(m: &ModelSpec, x: &[f64], i: Regime, horizon: f64, bdg: f64) -> Result<f64, ModelError> {
    let q = &m.q;
    let kappa = q.bandwidth as f64;
    let (alpha, beta) = (q.linear_bound_alpha, q.linear_bound_beta);
    let x2 = norm(x).powi(2);
    let i = i as f64;
    let rate = (4.0 + 4.0 / 3.0 * bdg * bdg) * growth_integral(m, horizon)?
        + 8.0 * kappa * kappa * (alpha * alpha + beta * beta + 2.0) * (horizon + 1.0) * horizon;
    Ok((4.0 / 3.0 * x2 + 4.0 * i * i) * rate.exp())
}

/// Second moment of the running maxima, `E[sup |X|^2 + sup L^2]` on
/// `[0, T]`, against its closed-form bound.
pub fn moment_bound_check(
    m: &ModelSpec,
    x: &[f64],
    i: Regime,
    horizon: f64,
    n: usize,
    cfg: &SimConfig,
    bdg: f64,
) -> Result<BoundReport, SimError> {
    require(m, &[Assumption::Banded, Assumption::LinearGrowth, Assumption::LinearRateBound], horizon)?;
    let rhs = moment_bound_rhs(m, x, i, horizon, bdg)?;
    let cfg = cfg.clone().with_horizon(horizon);
    let noise = NoiseStream::new(cfg.seed);
    let outcomes = replicate(n, |r| {
        let p = simulate(m, x, i, &cfg, &noise, r)?;
        Ok(p.sup_norm * p.sup_norm + (p.sup_regime * p.sup_regime) as f64)
    });
    let (values, aborted) = partition_outcomes(outcomes)?;
    let lhs = McEstimate::from_samples(&values, aborted);
    let params = report_params([
        ("x", serde_json::json!(x)),
        ("i", i.into()),
        ("T", horizon.into()),
        ("dt", cfg.dt.into()),
        ("bdg", bdg.into()),
        ("seed", cfg.seed.into()),
    ]);
    Ok(BoundReport::upper("moments", &m.id, params, lhs, rhs))
}
