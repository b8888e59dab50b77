use super::mc::{partition_outcomes, replicate, McEstimate};
use super::report::{report_params, BoundReport};
use crate::engine::{sample_skeleton, simulate_path, SimConfig};
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::NoiseStream;
use crate::numeric::wilson_interval;
use crate::Regime;

/// Sigma level of the one-sided tests (99.7%).
pub const CONFIDENCE_Z: f64 = 3.0;

/// `exp(-(min(kappa, k - 1) + kappa) alpha K t)`.
pub fn holding_lower_bound(kappa: usize, alpha: f64, k: Regime, level: usize, t: f64) -> f64 {
    let steps = kappa.min(k - 1) + kappa;
    (-(steps as f64) * alpha * level as f64 * t).exp()
}

/// First switch times from `(x, k)` on `[0, horizon]`, `None` for no switch.
fn first_switch_times(m: &ModelSpec, x: &[f64], k: Regime, horizon: f64, n: usize, cfg: &SimConfig) -> Result<(Vec<Option<f64>>, usize), SimError> {
    let noise = NoiseStream::new(cfg.seed);
    let outcomes = if m.q.state_independent {
        replicate(n, |r| {
            let sk = sample_skeleton(&m.q, x, 0.0, k, horizon, &noise, r)?;
            Ok(sk.first().map(|j| j.time))
        })
    } else {
        let cfg = cfg.clone().with_horizon(horizon).stopping_at_first_switch(true);
        replicate(n, |r| Ok(simulate_path(m, x, k, &cfg, &noise, r)?.eta))
    };
    partition_outcomes(outcomes)
}

/// `P(eta >= t)` from `(x, k)` on a time grid, each against
/// [`holding_lower_bound`] through a Wilson lower confidence limit.
///
/// The margin is `wilson_lower - bound`. At `t <= 0` both sides are exactly one.
pub fn holding_time_check(
    m: &ModelSpec,
    x: &[f64],
    k: Regime,
    level: usize,
    grid: &[f64],
    n: usize,
    cfg: &SimConfig,
) -> Result<Vec<BoundReport>, SimError> {
    if k == 0 || k > level {
        return Err(ModelError::InvalidArgument(format!("need 1 <= k <= K, got k = {k}, K = {level}")).into());
    }
    let alpha = m.q.linear_bound_alpha;
    if !(alpha > 0.0) {
        return Err(ModelError::MissingMetadata("rate bound alpha").into());
    }
    let horizon = grid.iter().copied().fold(0.0, f64::max);
    let (etas, aborted) = first_switch_times(m, x, k, horizon, n, cfg)?;
    let kappa = m.q.bandwidth;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let bound = holding_lower_bound(kappa, alpha, k, level, t);
        let params = report_params([
            ("x", serde_json::json!(x)),
            ("k", k.into()),
            ("K", level.into()),
            ("t", t.into()),
            ("seed", cfg.seed.into()),
        ]);
        let (lhs, margin) = if t <= 0.0 {
            (McEstimate::exact(1.0), 1.0 - bound)
        } else {
            let kept = etas.iter().filter(|e| e.is_none_or(|s| s >= t)).count();
            let total = etas.len();
            let p = kept as f64 / total as f64;
            let lhs = McEstimate {
                mean: p,
                stderr: (p * (1.0 - p) / total as f64).sqrt(),
                n_replicas: total,
                n_aborted: aborted,
            };
            let (lower, _) = wilson_interval(kept as u64, total as u64, CONFIDENCE_Z);
            (lhs, lower - bound)
        };
        out.push(BoundReport::new("holding", &m.id, params, lhs, bound, 0.0, margin));
    }
    Ok(out)
}
