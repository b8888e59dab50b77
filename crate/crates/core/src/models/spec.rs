use std::fmt;
use std::sync::Arc;

use super::uclass::{self, UClass};
use super::Assumption;
use crate::error::ModelError;
use crate::regime_graph::{cutoff, truncate_q, QMatrixSpec};
use crate::Regime;

/// Drift `b(t, x, i)` and diffusion `sigma(t, x, i)` of the continuous part.
///
/// Outputs are written into caller buffers: `drift` into a length-`d`
/// slice, `diffusion` into a row-major `d x d` slice. Implementations must
/// be pure.
pub trait Coefficients: Send + Sync {
    fn drift(&self, t: f64, x: &[f64], i: Regime, out: &mut [f64]);
    fn diffusion(&self, t: f64, x: &[f64], i: Regime, out: &mut [f64]);
}

type DriftFn = dyn Fn(f64, &[f64], Regime, &mut [f64]) + Send + Sync;

/// Coefficients from closures.
pub struct FnCoefficients {
    drift: Box<DriftFn>,
    diffusion: Box<DriftFn>,
}

impl FnCoefficients {
    pub fn new<B, S>(drift: B, diffusion: S) -> Self
    where
        B: Fn(f64, &[f64], Regime, &mut [f64]) + Send + Sync + 'static,
        S: Fn(f64, &[f64], Regime, &mut [f64]) + Send + Sync + 'static,
    {
        Self { drift: Box::new(drift), diffusion: Box::new(diffusion) }
    }
}

impl Coefficients for FnCoefficients {
    fn drift(&self, t: f64, x: &[f64], i: Regime, out: &mut [f64]) {
        (self.drift)(t, x, i, out)
    }
    fn diffusion(&self, t: f64, x: &[f64], i: Regime, out: &mut [f64]) {
        (self.diffusion)(t, x, i, out)
    }
}

/// Coefficients scaled by the cutoff: `b phi^K` and `sigma sqrt(phi^K)`,
/// i.e. the diffusion matrix `a = sigma sigma^T` is scaled by `phi^K`.
struct CutoffCoefficients {
    inner: Arc<dyn Coefficients>,
    k: usize,
}

impl Coefficients for CutoffCoefficients {
    fn drift(&self, t: f64, x: &[f64], i: Regime, out: &mut [f64]) {
        self.inner.drift(t, x, i, out);
        let phi = cutoff(self.k, x);
        if phi != 1.0 {
            out.iter_mut().for_each(|v| *v *= phi);
        }
    }
    fn diffusion(&self, t: f64, x: &[f64], i: Regime, out: &mut [f64]) {
        self.inner.diffusion(t, x, i, out);
        let phi = cutoff(self.k, x);
        if phi != 1.0 {
            let s = phi.sqrt();
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
}

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type RegimeTimeFn = Arc<dyn Fn(f64, Regime) -> f64 + Send + Sync>;

/// A regime-switching diffusion: coefficients, rates and the regularity
/// metadata the checkers need. Immutable once built and cheap to clone.
#[derive(Clone)]
pub struct ModelSpec {
    pub id: String,
    pub dim: usize,
    pub coefficients: Arc<dyn Coefficients>,
    pub q: QMatrixSpec,
    /// Growth envelope `c(t)`.
    pub growth: Option<TimeFn>,
    /// One-sided modulus constants `C_i(t)`.
    pub modulus: Option<RegimeTimeFn>,
    /// Diffusion modulus constants `C~_i(t)`.
    pub diffusion_modulus: Option<RegimeTimeFn>,
    /// Lower ellipticity `lambda(t)`.
    pub ellipticity: Option<TimeFn>,
    pub u_id: String,
    pub u_tilde_id: String,
    /// Assumptions the model claims to satisfy.
    pub advertised: Vec<Assumption>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("q", &self.q)
            .field("u_id", &self.u_id)
            .field("u_tilde_id", &self.u_tilde_id)
            .field("advertised", &self.advertised)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn new(id: impl Into<String>, dim: usize, coefficients: Arc<dyn Coefficients>, q: QMatrixSpec) -> Self {
        Self {
            id: id.into(),
            dim,
            coefficients,
            q,
            growth: None,
            modulus: None,
            diffusion_modulus: None,
            ellipticity: None,
            u_id: "one".into(),
            u_tilde_id: "one".into(),
            advertised: Vec::new(),
        }
    }

    pub fn with_growth(mut self, c: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.growth = Some(Arc::new(c));
        self
    }

    pub fn with_modulus(mut self, c: impl Fn(f64, Regime) -> f64 + Send + Sync + 'static) -> Self {
        self.modulus = Some(Arc::new(c));
        self
    }

    pub fn with_diffusion_modulus(mut self, c: impl Fn(f64, Regime) -> f64 + Send + Sync + 'static) -> Self {
        self.diffusion_modulus = Some(Arc::new(c));
        self
    }

    pub fn with_ellipticity(mut self, l: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.ellipticity = Some(Arc::new(l));
        self
    }

    pub fn with_u(mut self, u_id: &str, u_tilde_id: &str) -> Self {
        self.u_id = u_id.into();
        self.u_tilde_id = u_tilde_id.into();
        self
    }

    pub fn advertising(mut self, assumptions: &[Assumption]) -> Self {
        self.advertised = assumptions.to_vec();
        self
    }

    pub fn u(&self) -> Result<Arc<dyn UClass>, ModelError> {
        uclass::lookup(&self.u_id).ok_or_else(|| ModelError::Unknown { kind: "u-class", name: self.u_id.clone() })
    }

    pub fn u_tilde(&self) -> Result<Arc<dyn UClass>, ModelError> {
        uclass::lookup(&self.u_tilde_id)
            .ok_or_else(|| ModelError::Unknown { kind: "u-class", name: self.u_tilde_id.clone() })
    }

    pub fn drift(&self, t: f64, x: &[f64], i: Regime) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.coefficients.drift(t, x, i, &mut out);
        out
    }

    pub fn diffusion(&self, t: f64, x: &[f64], i: Regime) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.dim];
        self.coefficients.diffusion(t, x, i, &mut out);
        out
    }

    /// The K-truncated model: cutoff-scaled coefficients and the folded
    /// rate matrix on `{1..K+kappa+1}`.
    pub fn truncated(&self, k: usize) -> Result<ModelSpec, ModelError> {
        let mut out = self.clone();
        out.id = format!("{}@K{k}", self.id);
        out.q = truncate_q(&self.q, k)?;
        out.coefficients = Arc::new(CutoffCoefficients { inner: self.coefficients.clone(), k });
        out.advertised.clear();
        Ok(out)
    }
}
