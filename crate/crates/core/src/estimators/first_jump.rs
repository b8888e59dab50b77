use super::mc::{partition_outcomes, replicate, McEstimate};
use super::semigroup::TestFunction;
use crate::engine::{simulate_frozen_regime, EventDriven, Scheme, SimConfig};
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::{Lane, NoiseStream};
use crate::Regime;

const CHAIN_TAG: u64 = 0xF1;
const BEFORE_TAG: u64 = 0xF2;
const AFTER_TAG: u64 = 0xF3;

/// `E[f(X_t, L_t)]` by conditioning on the first switch.
///
/// The first switch time and destination come from the chain alone. Up to
/// that time the diffusion runs in the starting regime; from there the full
/// process continues with fresh noise.
pub fn first_jump_estimate(
    m: &ModelSpec,
    f: &TestFunction,
    t: f64,
    x: &[f64],
    i: Regime,
    n: usize,
    cfg: &SimConfig,
) -> Result<McEstimate, SimError> {
    if !m.q.state_independent {
        return Err(ModelError::Unsupported("first-jump decomposition needs state-independent rates".into()).into());
    }
    let base = NoiseStream::new(cfg.seed);
    let (chain, before, after) = (base.fork(CHAIN_TAG), base.fork(BEFORE_TAG), base.fork(AFTER_TAG));
    let qi = crate::engine::checked_exit_rate(&m.q, x, i)?;
    let outcomes = replicate(n, |r| {
        let mut d = chain.draws(Lane::Skeleton, r, 0);
        let (e, u) = (d.exp1(), d.uniform());
        let eta = if qi > 0.0 { e / qi } else { f64::INFINITY };
        if eta >= t {
            let path = simulate_frozen_regime(m, 0.0, x, i, &cfg.clone().with_horizon(t), &before, r)?;
            return Ok(f.checked(&path.final_x, i)?);
        }
        let (to, _) = crate::engine::select_target(&m.q, x, i, u)?.expect("positive exit rate");
        let head = simulate_frozen_regime(m, 0.0, x, i, &cfg.clone().with_horizon(eta), &before, r)?;
        let tail = EventDriven.simulate_from(m, eta, &head.final_x, to, &cfg.clone().with_horizon(t), &after, r)?;
        Ok(f.checked(&tail.final_x, tail.final_regime)?)
    });
    let (values, aborted) = partition_outcomes(outcomes)?;
    Ok(McEstimate::from_samples(&values, aborted))
}
