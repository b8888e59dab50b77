use serde::Serialize;

use super::mc::replicate;
use crate::engine::sample_skeleton;
use crate::error::ModelError;
use crate::noise::NoiseStream;
use crate::regime_graph::{transition_matrix, QMatrixSpec};
use crate::Regime;

/// One entry of the empirical transition matrix against the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalEntry {
    pub from: Regime,
    pub to: Regime,
    pub t: f64,
    pub empirical: f64,
    pub oracle: f64,
    /// `sqrt(p (1 - p) / n)` at the oracle probability.
    pub stderr: f64,
    pub within: bool,
}

/// Empirical `P(L_t = j | L_0 = i)` from `n` exact skeletons, one entry per
/// `j`, each compared with the uniformization oracle at three standard errors.
pub fn chain_marginal_check(q: &QMatrixSpec, i: Regime, t: f64, n: usize, seed: u64) -> Result<Vec<MarginalEntry>, ModelError> {
    let size = q.n_states.ok_or_else(|| ModelError::Unsupported("marginal check needs a finite chain".into()))?;
    let x_ref = [0.0];
    let oracle = transition_matrix(&q.generator(&x_ref, size)?, t)?;
    let noise = NoiseStream::new(seed);
    let finals = replicate(n, |r| {
        sample_skeleton(q, &x_ref, 0.0, i, t, &noise, r).map(|sk| sk.last().map_or(i, |j| j.to))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut counts = vec![0usize; size];
    for j in finals {
        counts[j - 1] += 1;
    }
    Ok((1..=size)
        .map(|j| {
            let p = oracle[(i - 1, j - 1)].clamp(0.0, 1.0);
            let empirical = counts[j - 1] as f64 / n as f64;
            let stderr = (p * (1.0 - p) / n as f64).sqrt();
            let within = (empirical - p).abs() <= 3.0 * stderr + 1e-12;
            MarginalEntry { from: i, to: j, t, empirical, oracle: p, stderr, within }
        })
        .collect())
}
