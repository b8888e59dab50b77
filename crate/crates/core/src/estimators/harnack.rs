use super::mc::{partition_outcomes, replicate, McEstimate};
use super::report::{report_params, BoundReport};
use super::require;
use super::semigroup::TestFunction;
use crate::engine::{EventDriven, Scheme, SimConfig};
use crate::error::{ModelError, SimError};
use crate::models::{Assumption, ModelSpec};
use crate::noise::NoiseStream;
use crate::numeric::pairwise_sum;
use crate::regime_graph::norm;
use crate::Regime;

/// Default floor applied to `f` so that `log f` is defined.
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-6;

/// `C phi(r^2) / (lambda (1 - exp(-2 C T / gamma)))`.
pub fn harnack_cost(c: f64, phi_r2: f64, lambda: f64, horizon: f64, gamma: f64) -> f64 {
    if phi_r2 == 0.0 {
        return 0.0;
    }
    c * phi_r2 / (lambda * -(-2.0 * c * horizon / gamma).exp_m1())
}

/// Log-Harnack inequality at `(x, y, i, T)` for `f` clamped below by `floor`.
///
/// Both starting points share the noise, so they see the same regime path.
/// Left side: mean of `log f(Y_T, L_T)`. Right side: `log` of the mean of
/// `f(X_T, L_T)` plus the mean cost over `L_T`, with a delta-method standard
/// error over the joint replicas. Passes iff
/// `lhs - 3 se(lhs) <= rhs + 3 se(rhs)`; the margin is the difference.
#[allow(clippy::too_many_arguments)]
pub fn harnack_check(
    m: &ModelSpec,
    f: &TestFunction,
    x: &[f64],
    y: &[f64],
    i: Regime,
    horizon: f64,
    n: usize,
    cfg: &SimConfig,
    floor: f64,
) -> Result<BoundReport, SimError> {
    if !m.q.state_independent {
        return Err(ModelError::Unsupported("log-Harnack check needs state-independent switching".into()).into());
    }
    if !(floor > 0.0) {
        return Err(ModelError::InvalidArgument("positivity floor must be > 0".into()).into());
    }
    let u = m.u()?;
    if !u.non_increasing() {
        return Err(ModelError::AssumptionFailed { assumption: "non_increasing_modulus", detail: u.id().into() }.into());
    }
    require(
        m,
        &[Assumption::Ellipticity, Assumption::OneSidedModulus, Assumption::DiffusionModulus, Assumption::ModulusConstantsBounded],
        horizon,
    )?;
    let lambda_fn = m.ellipticity.as_ref().ok_or(ModelError::MissingMetadata("ellipticity lambda(t)"))?;
    let modulus = m.modulus.as_ref().ok_or(ModelError::MissingMetadata("modulus constants C_i(t)"))?;
    let lambda = lambda_fn(horizon);
    let gamma = u.gamma();
    let r2 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let phi_r2 = u.phi(r2);

    let cfg = cfg.clone().with_horizon(horizon);
    let noise = NoiseStream::new(cfg.seed);
    let outcomes = replicate(n, |r| {
        let px = EventDriven.simulate_from(m, 0.0, x, i, &cfg, &noise, r)?;
        let py = EventDriven.simulate_from(m, 0.0, y, i, &cfg, &noise, r)?;
        debug_assert_eq!(px.final_regime, py.final_regime);
        let fx = f.checked(&px.final_x, px.final_regime)?.max(floor);
        let fy = f.checked(&py.final_x, py.final_regime)?.max(floor);
        let c = modulus(horizon, px.final_regime);
        Ok((fx, fy.ln(), harnack_cost(c, phi_r2, lambda, horizon, gamma)))
    });
    let (rows, aborted) = partition_outcomes(outcomes)?;
    let log_fy: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let lhs = McEstimate::from_samples(&log_fy, aborted);
    let count = rows.len() as f64;
    let mean_fx = pairwise_sum(&rows.iter().map(|r| r.0).collect::<Vec<_>>()) / count;
    let mean_cost = pairwise_sum(&rows.iter().map(|r| r.2).collect::<Vec<_>>()) / count;
    let rhs = mean_fx.ln() + mean_cost;
    // Linearised right side per replica: f / E f + cost.
    let lin: Vec<f64> = rows.iter().map(|r| r.0 / mean_fx + r.2).collect();
    let rhs_se = McEstimate::from_samples(&lin, 0).stderr;
    let margin = (rhs + 3.0 * rhs_se) - (lhs.mean - 3.0 * lhs.stderr);
    let params = report_params([
        ("f", f.label.clone().into()),
        ("x", serde_json::json!(x)),
        ("y", serde_json::json!(y)),
        ("distance", norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()).into()),
        ("i", i.into()),
        ("T", horizon.into()),
        ("dt", cfg.dt.into()),
        ("seed", cfg.seed.into()),
    ]);
    let mut report = BoundReport::new("harnack", &m.id, params, lhs, rhs, rhs_se, margin);
    report.statistical = !report.pass && (rhs + 4.0 * rhs_se) - (lhs.mean - 4.0 * lhs.stderr) >= 0.0;
    Ok(report)
}
