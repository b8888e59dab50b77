use crate::error::SimError;
use crate::models::ModelSpec;
use crate::Regime;

/// States beyond this norm are treated as a blow-up.
pub const BLOWUP_NORM: f64 = 1e100;

/// One Euler-Maruyama step `x + b(t,x,i) dt + sigma(t,x,i) dW`.
pub fn step_euler(m: &ModelSpec, t: f64, x: &[f64], i: Regime, dt: f64, dw: &[f64]) -> Result<Vec<f64>, SimError> {
    let mut ws = EulerWorkspace::new(m.dim);
    let mut out = x.to_vec();
    ws.step(m, t, &mut out, i, dt, dw)?;
    Ok(out)
}

/// Scratch buffers for repeated in-place steps.
pub(crate) struct EulerWorkspace {
    drift: Vec<f64>,
    diffusion: Vec<f64>,
    prev: Vec<f64>,
}

impl EulerWorkspace {
    pub(crate) fn new(dim: usize) -> Self {
        Self { drift: vec![0.0; dim], diffusion: vec![0.0; dim * dim], prev: vec![0.0; dim] }
    }

    /// Advance `x` in place over `dt` with increment `dw`.
    pub(crate) fn step(&mut self, m: &ModelSpec, t: f64, x: &mut [f64], i: Regime, dt: f64, dw: &[f64]) -> Result<(), SimError> {
        let d = x.len();
        m.coefficients.drift(t, x, i, &mut self.drift);
        m.coefficients.diffusion(t, x, i, &mut self.diffusion);
        self.prev.copy_from_slice(x);
        let mut sq = 0.0;
        for r in 0..d {
            let row = &self.diffusion[r * d..(r + 1) * d];
            let mut noise = 0.0;
            for (s, w) in row.iter().zip(dw) {
                noise += s * w;
            }
            let v = self.prev[r] + self.drift[r] * dt + noise;
            x[r] = v;
            sq += v * v;
        }
        if !sq.is_finite() || sq > BLOWUP_NORM * BLOWUP_NORM {
            return Err(SimError::Blowup { t, x: self.prev.clone(), regime: i });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::models::FnCoefficients;
    use crate::regime_graph::QMatrixSpec;

    fn model(drift: f64, sigma: f64) -> ModelSpec {
        let c = FnCoefficients::new(
            move |_, x, _, out| out[0] = drift * x[0],
            move |_, _, _, out| out[0] = sigma,
        );
        ModelSpec::new("test", 1, Arc::new(c), QMatrixSpec::constant(&[vec![0.0]]).unwrap())
    }

    #[test]
    fn deterministic_decay() {
        let x = step_euler(&model(-1.0, 0.0), 0.0, &[1.0], 1, 0.1, &[0.3]).unwrap();
        assert!((x[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn pure_noise() {
        let x = step_euler(&model(0.0, 1.0), 0.0, &[2.0], 1, 0.1, &[0.3]).unwrap();
        assert_eq!(x[0], 2.3);
    }

    #[test]
    fn blowup_is_reported() {
        let err = step_euler(&model(1e300, 0.0), 0.5, &[1e10], 1, 1.0, &[0.0]).unwrap_err();
        assert!(matches!(err, SimError::Blowup { regime: 1, .. }));
    }
}
