use super::config::SimConfig;
use super::scheme::scheme;
use super::trajectory::Trajectory;
use crate::error::SimError;
use crate::models::ModelSpec;
use crate::noise::NoiseStream;
use crate::Regime;

/// Two paths driven by one noise stream.
#[derive(Debug, Clone)]
pub struct CoupledPaths {
    pub first: Trajectory,
    pub second: Trajectory,
    /// First time the regimes differ; `None` if they never do on the horizon.
    pub zeta: Option<f64>,
}

/// First time at which two regime paths differ, from their jump logs.
pub fn separation_time(a: &Trajectory, i_a: Regime, b: &Trajectory, i_b: Regime) -> Option<f64> {
    if i_a != i_b {
        return Some(a.start_time.min(b.start_time));
    }
    let (mut ra, mut rb) = (i_a, i_b);
    let (mut ka, mut kb) = (0, 0);
    loop {
        let ta = a.jumps.get(ka).map(|j| j.time);
        let tb = b.jumps.get(kb).map(|j| j.time);
        let t = match (ta, tb) {
            (None, None) => return None,
            (Some(x), None) => x,
            (None, Some(y)) => y,
            (Some(x), Some(y)) => x.min(y),
        };
        // Apply every switch at time t on both sides before comparing.
        while a.jumps.get(ka).is_some_and(|j| j.time == t) {
            ra = a.jumps[ka].to;
            ka += 1;
        }
        while b.jumps.get(kb).is_some_and(|j| j.time == t) {
            rb = b.jumps[kb].to;
            kb += 1;
        }
        if ra != rb {
            return Some(t);
        }
    }
}

/// Simulate from `(x0, i0)` and `(y0, j0)` with identical Brownian
/// increments, clocks and marks, under the configured scheme.
pub fn coupled_simulate(
    m: &ModelSpec,
    (x0, i0): (&[f64], Regime),
    (y0, j0): (&[f64], Regime),
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
) -> Result<CoupledPaths, SimError> {
    let s = scheme(cfg.scheme);
    let first = s.simulate_from(m, 0.0, x0, i0, cfg, noise, replica)?;
    let second = s.simulate_from(m, 0.0, y0, j0, cfg, noise, replica)?;
    let zeta = separation_time(&first, i0, &second, j0);
    Ok(CoupledPaths { first, second, zeta })
}
