//! Randomized check of the Lipschitz bound on the jump-function distance.

use std::sync::Arc;

use super::mc::McEstimate;
use super::report::{report_params, BoundReport};
use crate::error::ModelError;
use crate::noise::{Draws, Lane, NoiseStream};
use crate::regime_graph::{h_lp_distance, row_displacement_bound, QMatrixSpec, SwitchingRates};
use crate::Regime;

/// `q_ij(x) = base + amp sin(omega <v, x> + phase)` with `|v| = 1` and
/// `amp <= base`, so every rate is nonnegative with slope at most `amp omega`.
#[derive(Debug, Clone)]
pub struct SinusoidalRates {
    kappa: usize,
    dim: usize,
    /// Per `(i, offset)`: `(base, amp, omega, phase, direction)`.
    terms: Vec<(f64, f64, f64, f64, Vec<f64>)>,
}

impl SinusoidalRates {
    fn slot(&self, i: Regime, j: Regime) -> usize {
        (i - 1) * (2 * self.kappa + 1) + (j + self.kappa - i)
    }

    /// Largest slope over all entries.
    pub fn lipschitz(&self) -> f64 {
        self.terms.iter().map(|t| t.1 * t.2).fold(0.0, f64::max)
    }
}

impl SwitchingRates for SinusoidalRates {
    fn rate(&self, x: &[f64], i: Regime, j: Regime) -> f64 {
        let (base, amp, omega, phase, v) = &self.terms[self.slot(i, j)];
        let p: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        base + amp * (omega * p + phase).sin()
    }
}

fn unit_vector(d: &mut Draws, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| d.normal()).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// A random banded chain on `{1..n}` with sinusoidal rates; about one in
/// five entries is switched off.
pub fn random_sinusoidal_q(d: &mut Draws, n: usize, kappa: usize, dim: usize) -> Result<QMatrixSpec, ModelError> {
    let mut terms = Vec::with_capacity(n * (2 * kappa + 1));
    for _ in 0..n * (2 * kappa + 1) {
        let base = if d.uniform() < 0.2 { 0.0 } else { 2.0 * d.uniform() };
        let amp = base * d.uniform();
        let omega = 0.2 + 2.8 * d.uniform();
        let phase = std::f64::consts::TAU * d.uniform();
        terms.push((base, amp, omega, phase, unit_vector(d, dim)));
    }
    let rates = SinusoidalRates { kappa, dim, terms };
    let cq = rates.lipschitz();
    debug_assert_eq!(rates.dim, dim);
    Ok(QMatrixSpec::new(Arc::new(rates), kappa, Some(n))?.with_lipschitz(cq))
}

/// Exact distance against the closed-form bound; the margin is `rhs - lhs`.
pub fn lemma21_case(q: &QMatrixSpec, x: &[f64], y: &[f64], i: Regime, p: f64) -> Result<BoundReport, ModelError> {
    let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let lhs = h_lp_distance(q, x, y, i, p)?;
    let rhs = row_displacement_bound(q, i, p, dist);
    let params = report_params([
        ("kappa", q.bandwidth.into()),
        ("c_q", q.lipschitz_cq.into()),
        ("i", i.into()),
        ("p", p.into()),
        ("distance", dist.into()),
    ]);
    // Exact arithmetic up to rounding in the endpoint sweep.
    let margin = rhs - lhs + 1e-12 * rhs.max(1e-300);
    Ok(BoundReport::new("lemma21", "sinusoidal", params, McEstimate::exact(lhs), rhs, 0.0, margin))
}

/// Sweep case `c`: bandwidth in `{1, 2, 3}`, `p` alternating over `{1, 2}`,
/// row `i <= 20`, dimension up to 3, points in the ball of radius 5 and a
/// log-uniform separation in `[1e-4, 1]`.
pub fn lemma21_sweep_case(seed: u64, c: u64) -> Result<BoundReport, ModelError> {
    let mut d = NoiseStream::new(seed).draws(Lane::Sampling, c, 0);
    let kappa = 1 + (d.uniform() * 3.0) as usize % 3;
    let dim = 1 + (d.uniform() * 3.0) as usize % 3;
    let i = 1 + (d.uniform() * 20.0) as usize % 20;
    let p = if c % 2 == 0 { 1.0 } else { 2.0 };
    let q = random_sinusoidal_q(&mut d, 20 + kappa, kappa, dim)?;
    let radius = 5.0 * d.uniform().powf(1.0 / dim as f64);
    let x: Vec<f64> = unit_vector(&mut d, dim).into_iter().map(|v| v * radius).collect();
    let sep = 10f64.powf(-4.0 * d.uniform());
    let y: Vec<f64> = x.iter().zip(unit_vector(&mut d, dim)).map(|(a, v)| a + sep * v).collect();
    let mut r = lemma21_case(&q, &x, &y, i, p)?;
    r.params.insert("case".into(), c.into());
    r.params.insert("seed".into(), seed.into());
    Ok(r)
}

pub fn lemma21_sweep(seed: u64, cases: usize) -> Result<Vec<BoundReport>, ModelError> {
    (0..cases as u64).map(|c| lemma21_sweep_case(seed, c)).collect()
}
