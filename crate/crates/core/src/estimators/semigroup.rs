use std::fmt;
use std::sync::Arc;

use super::mc::{partition_outcomes, replicate, McEstimate};
use crate::engine::{simulate, SimConfig};
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::NoiseStream;
use crate::Regime;

type Eval = Arc<dyn Fn(&[f64], Regime) -> f64 + Send + Sync>;

/// A bounded function on `R^d x S` with its declared bound `sup |f|`.
#[derive(Clone)]
pub struct TestFunction {
    pub label: String,
    pub bound: f64,
    eval: Eval,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("label", &self.label).field("bound", &self.bound).finish()
    }
}

impl TestFunction {
    pub fn new(label: impl Into<String>, bound: f64, eval: impl Fn(&[f64], Regime) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), bound, eval: Arc::new(eval) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), c.abs(), move |_, _| c)
    }

    /// `1{x_1 > 0}`.
    pub fn positive_first_coordinate() -> Self {
        Self::new("indicator_x1_pos", 1.0, |x, _| if x[0] > 0.0 { 1.0 } else { 0.0 })
    }

    /// `w_k exp(-a |x - c|^2)` with `w` cycled over regimes.
    pub fn gaussian_bump(a: f64, centre: Vec<f64>, weights: Vec<f64>) -> Self {
        let bound = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let label = format!("bump(a={a})");
        Self::new(label, bound, move |x, k| {
            let r2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum();
            weights[(k - 1) % weights.len()] * (-a * r2).exp()
        })
    }

    /// `tanh(s <v, x>) + w_k` for a smooth, non-trivial test.
    pub fn tanh_ridge(s: f64, v: Vec<f64>, weights: Vec<f64>) -> Self {
        let bound = 1.0 + weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        Self::new(format!("tanh_ridge(s={s})"), bound, move |x, k| {
            let p: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
            (s * p).tanh() + weights[(k - 1) % weights.len()]
        })
    }

    pub fn eval(&self, x: &[f64], k: Regime) -> f64 {
        (self.eval)(x, k)
    }

    /// Evaluate and enforce the declared bound.
    pub fn checked(&self, x: &[f64], k: Regime) -> Result<f64, ModelError> {
        let v = self.eval(x, k);
        if !v.is_finite() || v.abs() > self.bound * (1.0 + 1e-12) {
            return Err(ModelError::InvalidArgument(format!(
                "test function {} = {v} at ({x:?}, {k}) exceeds its bound {}",
                self.label, self.bound
            )));
        }
        Ok(v)
    }
}

/// Monte Carlo estimate of `E[f(X_t, L_t)]` from `(x, i)` under `cfg`.
pub fn semigroup_estimate(
    m: &ModelSpec,
    f: &TestFunction,
    t: f64,
    x: &[f64],
    i: Regime,
    n: usize,
    cfg: &SimConfig,
) -> Result<McEstimate, SimError> {
    let cfg = cfg.clone().with_horizon(t);
    let noise = NoiseStream::new(cfg.seed);
    let outcomes = replicate(n, |r| {
        let path = simulate(m, x, i, &cfg, &noise, r)?;
        Ok(f.checked(&path.final_x, path.final_regime)?)
    });
    let (values, aborted) = partition_outcomes(outcomes)?;
    let est = McEstimate::from_samples(&values, aborted);
    if est.flagged() {
        log::warn!("{}: {aborted} of {n} replicas aborted", m.id);
    }
    Ok(est)
}
