use serde::Serialize;

use super::mc::{partition_outcomes, replicate, McEstimate};
use super::semigroup::TestFunction;
use crate::engine::{coupled_simulate, SimConfig};
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::NoiseStream;
use crate::Regime;

/// Gap at the smallest radius, net of three standard errors, above which a
/// probe certifies a discontinuity.
pub const DISCONTINUITY_THRESHOLD: f64 = 0.05;

/// How the two starting points sit around the anchor `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `x` and `x + r e_1`.
    Offset,
    /// `x - r/2 e_1` and `x + r/2 e_1`.
    Straddle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FellerPoint {
    pub radius: f64,
    /// `|E f(Y_t) - E f(X_t)|` under shared noise.
    pub gap: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FellerProbe {
    pub model: String,
    pub f: String,
    pub t: f64,
    pub anchor: Anchor,
    pub points: Vec<FellerPoint>,
    /// Every gap is below the previous one plus three standard errors.
    pub monotone: bool,
    /// The smallest-radius gap exceeds [`DISCONTINUITY_THRESHOLD`] by three
    /// standard errors: a witness against the strong Feller property.
    pub discontinuous: bool,
}

/// Shared-noise estimates of `|P_t f(y, i) - P_t f(x, i)|` along shrinking radii.
#[allow(clippy::too_many_arguments)]
pub fn feller_modulus(
    m: &ModelSpec,
    f: &TestFunction,
    t: f64,
    x: &[f64],
    i: Regime,
    radii: &[f64],
    n: usize,
    cfg: &SimConfig,
    anchor: Anchor,
) -> Result<FellerProbe, SimError> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(ModelError::InvalidArgument("radii must be positive and strictly decreasing".into()).into());
    }
    let cfg = cfg.clone().with_horizon(t);
    let noise = NoiseStream::new(cfg.seed);
    let mut points = Vec::with_capacity(radii.len());
    for &radius in radii {
        let (mut a, mut b) = (x.to_vec(), x.to_vec());
        match anchor {
            Anchor::Offset => b[0] += radius,
            Anchor::Straddle => {
                a[0] -= radius / 2.0;
                b[0] += radius / 2.0;
            }
        }
        let outcomes = replicate(n, |r| {
            let c = coupled_simulate(m, (&a, i), (&b, i), &cfg, &noise, r)?;
            let fa = f.checked(&c.first.final_x, c.first.final_regime)?;
            let fb = f.checked(&c.second.final_x, c.second.final_regime)?;
            Ok(fb - fa)
        });
        let (diffs, aborted) = partition_outcomes(outcomes)?;
        let mut gap = McEstimate::from_samples(&diffs, aborted);
        gap.mean = gap.mean.abs();
        points.push(FellerPoint { radius, gap });
    }
    let monotone = points.windows(2).all(|w| w[1].gap.mean <= w[0].gap.mean + 3.0 * w[0].gap.stderr.max(w[1].gap.stderr));
    let last = &points.last().expect("non-empty").gap;
    let discontinuous = last.mean - 3.0 * last.stderr > DISCONTINUITY_THRESHOLD;
    Ok(FellerProbe { model: m.id.clone(), f: f.label.clone(), t, anchor, points, monotone, discontinuous })
}
