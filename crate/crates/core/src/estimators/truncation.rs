use super::mc::{partition_outcomes, replicate, McEstimate};
use super::moments::growth_integral;
use super::report::{report_params, BoundReport};
use crate::engine::{simulate_path, simulate_truncated, RecordMode, SimConfig, Trajectory};
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::NoiseStream;
use crate::regime_graph::norm;
use crate::Regime;

/// Chebyshev bound on `P(tau_K <= t)`:
/// `(4/3 |x|^2 + 4 i^2) exp((4 + 4/3 C1^2) int_0^t c + 8 kappa^2 (alpha^2 + beta^2 + 2)(t + 1) t) / K`.
///
/// The rate bound's `beta` is kept; it vanishes for purely linear bounds.
pub fn exit_probability_bound(m: &ModelSpec, x: &[f64], i: Regime, k: usize, t: f64, bdg: f64) -> Result<f64, ModelError> {
    let q = &m.q;
    let kappa = q.bandwidth as f64;
    let (alpha, beta) = (q.linear_bound_alpha, q.linear_bound_beta);
    let rate = (4.0 + 4.0 / 3.0 * bdg * bdg) * growth_integral(m, t)?
        + 8.0 * kappa * kappa * (alpha * alpha + beta * beta + 2.0) * (t + 1.0) * t;
    let i = i as f64;
    Ok((4.0 / 3.0 * norm(x).powi(2) + 4.0 * i * i) * rate.exp() / k as f64)
}

/// Whether a truncated path and the original path, both recorded in full
/// under shared noise with the same exit level, agree bit for bit up to the
/// exit time: same exit time, same samples of `X` through it, same regimes
/// and switches strictly before it.
pub fn agree_until_exit(truncated: &Trajectory, original: &Trajectory) -> bool {
    if truncated.tau.map(f64::to_bits) != original.tau.map(f64::to_bits) {
        return false;
    }
    let tau = truncated.tau.unwrap_or(f64::INFINITY);
    let upto = |p: &Trajectory| p.times.iter().take_while(|&&s| s <= tau).count();
    let before = |p: &Trajectory| p.times.iter().take_while(|&&s| s < tau).count();
    let (n, b) = (upto(truncated), before(truncated));
    if n != upto(original) || b != before(original) || n == 0 {
        return false;
    }
    let d = truncated.dim;
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let jumps = |p: &Trajectory| {
        p.jumps.iter().filter(|j| j.time < tau).map(|j| (j.time.to_bits(), j.from, j.to)).collect::<Vec<_>>()
    };
    bits(&truncated.times[..n]) == bits(&original.times[..n])
        && bits(&truncated.xs[..n * d]) == bits(&original.xs[..n * d])
        && truncated.regimes[..b] == original.regimes[..b]
        && jumps(truncated) == jumps(original)
}

/// One shared-noise comparison of the K-truncated and the original path.
pub fn truncation_consistency(
    m: &ModelSpec,
    x: &[f64],
    i: Regime,
    k: usize,
    cfg: &SimConfig,
    replica: u64,
) -> Result<bool, SimError> {
    let cfg = cfg.clone().with_record(RecordMode::Full).with_truncation(Some(k));
    let noise = NoiseStream::new(cfg.seed);
    let cut = simulate_truncated(m, x, i, k, &cfg, &noise, replica)?;
    let orig = simulate_path(m, x, i, &cfg, &noise, replica)?;
    Ok(agree_until_exit(&cut, &orig))
}

/// Empirical `P(tau_K <= t)` of the truncated process against
/// [`exit_probability_bound`], with three standard errors of slack.
pub fn truncation_exit_check(
    m: &ModelSpec,
    x: &[f64],
    i: Regime,
    k: usize,
    t: f64,
    n: usize,
    cfg: &SimConfig,
    bdg: f64,
) -> Result<BoundReport, SimError> {
    let rhs = exit_probability_bound(m, x, i, k, t, bdg)?;
    let cfg = cfg.clone().with_horizon(t).with_record(RecordMode::Summary);
    let noise = NoiseStream::new(cfg.seed);
    let outcomes = replicate(n, |r| {
        let p = simulate_truncated(m, x, i, k, &cfg, &noise, r)?;
        Ok(if p.tau.is_some_and(|s| s <= t) { 1.0 } else { 0.0 })
    });
    let (values, aborted) = partition_outcomes(outcomes)?;
    let lhs = McEstimate::from_samples(&values, aborted);
    let params = report_params([
        ("x", serde_json::json!(x)),
        ("i", i.into()),
        ("K", k.into()),
        ("t", t.into()),
        ("dt", cfg.dt.into()),
        ("bdg", bdg.into()),
        ("seed", cfg.seed.into()),
    ]);
    Ok(BoundReport::upper("truncation", &m.id, params, lhs, rhs))
}
