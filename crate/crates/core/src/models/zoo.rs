//! Built-in models, registered by name and built from a flat parameter map.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde_json::Value;

use super::spec::{FnCoefficients, ModelSpec};
use super::Assumption;
use crate::error::ModelError;
use crate::regime_graph::QMatrixSpec;
use crate::Regime;

pub type Params = BTreeMap<String, Value>;

/// A named model family.
pub trait ZooModel: Send + Sync {
    fn name(&self) -> &'static str;
    /// Accepted parameter keys with a one-line description each.
    fn keys(&self) -> &'static [(&'static str, &'static str)];
    fn build(&self, params: &Params) -> Result<ModelSpec, ModelError>;
}

struct Reader<'a> {
    model: &'static str,
    params: &'a Params,
}

impl<'a> Reader<'a> {
    fn new(model: &'a dyn ZooModel, params: &'a Params) -> Result<Self, ModelError> {
        let keys = model.keys();
        if let Some(k) = params.keys().find(|k| !keys.iter().any(|(name, _)| name == k)) {
            return Err(ModelError::InvalidArgument(format!("{}: unknown parameter `{k}`", model.name())));
        }
        Ok(Self { model: model.name(), params })
    }

    fn bad(&self, key: &str, what: &str) -> ModelError {
        ModelError::InvalidArgument(format!("{}: parameter `{key}` must be {what}", self.model))
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, ModelError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().filter(|v| v.is_finite()).ok_or_else(|| self.bad(key, "a finite number")),
        }
    }

    fn nonneg(&self, key: &str, default: f64) -> Result<f64, ModelError> {
        let v = self.f64(key, default)?;
        if v < 0.0 {
            return Err(self.bad(key, "nonnegative"));
        }
        Ok(v)
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, ModelError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .filter(|&v| v >= 1)
                .map(|v| v as usize)
                .ok_or_else(|| self.bad(key, "a positive integer")),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ModelError> {
        let Some(v) = self.params.get(key) else { return Ok(None) };
        let arr = v.as_array().ok_or_else(|| self.bad(key, "a list of numbers"))?;
        arr.iter()
            .map(|e| e.as_f64().filter(|v| v.is_finite()).ok_or_else(|| self.bad(key, "a list of numbers")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn table(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>, ModelError> {
        let Some(v) = self.params.get(key) else { return Ok(None) };
        let rows = v.as_array().ok_or_else(|| self.bad(key, "a table of numbers"))?;
        rows.iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| self.bad(key, "a table of numbers"))?
                    .iter()
                    .map(|e| e.as_f64().ok_or_else(|| self.bad(key, "a table of numbers")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn identity_scaled(out: &mut [f64], d: usize, s: f64) {
    out.fill(0.0);
    for k in 0..d {
        out[k * d + k] = s;
    }
}

struct SwitchingOu;

impl ZooModel for SwitchingOu {
    fn name(&self) -> &'static str {
        "switching_ou"
    }

    fn keys(&self) -> &'static [(&'static str, &'static str)] {
        &[
            ("dim", "state dimension d (default 1)"),
            ("beta", "per-regime mean-reversion speeds; its length fixes the number of regimes (default [1, 2])"),
            ("a", "per-regime drift offsets, applied to every coordinate (default zeros)"),
            ("s", "per-regime diffusion scales (default ones)"),
            ("rates", "square table of switching rates, diagonal ignored (default nearest-neighbour, rate 1)"),
            ("c_floor", "positive floor for the modulus constants (default 0.1)"),
        ]
    }

    fn build(&self, params: &Params) -> Result<ModelSpec, ModelError> {
        let r = Reader::new(self, params)?;
        let d = r.usize("dim", 1)?;
        let beta = r.list("beta")?.unwrap_or_else(|| vec![1.0, 2.0]);
        let n = beta.len();
        if n == 0 {
            return Err(r.bad("beta", "non-empty"));
        }
        let a = r.list("a")?.unwrap_or_else(|| vec![0.0; n]);
        let s = r.list("s")?.unwrap_or_else(|| vec![1.0; n]);
        if a.len() != n || s.len() != n {
            return Err(ModelError::DimensionMismatch { expected: n, got: if a.len() != n { a.len() } else { s.len() } });
        }
        let table = r.table("rates")?.unwrap_or_else(|| {
            (0..n)
                .map(|i| (0..n).map(|j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 }).collect())
                .collect()
        });
        if table.len() != n {
            return Err(ModelError::DimensionMismatch { expected: n, got: table.len() });
        }
        let c_floor = r.f64("c_floor", 0.1)?;
        if c_floor <= 0.0 {
            return Err(r.bad("c_floor", "positive"));
        }
        let q = QMatrixSpec::constant(&table)?;

        let sd = (d as f64).sqrt();
        let growth = (0..n)
            .map(|k| (-beta[k]).max(0.0) + a[k].abs() * sd / 2.0 + s[k] * s[k] * d as f64)
            .fold(1e-3, f64::max);
        let lambda = s.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);

        let (bd, ad) = (beta.clone(), a.clone());
        let sc = s.clone();
        let coeffs = FnCoefficients::new(
            move |_, x, i, out| {
                for (o, xv) in out.iter_mut().zip(x) {
                    *o = -bd[i - 1] * xv + ad[i - 1];
                }
            },
            move |_, _, i, out| identity_scaled(out, d, sc[i - 1]),
        );
        let bm = beta.clone();
        let mut spec = ModelSpec::new(self.name(), d, Arc::new(coeffs), q)
            .with_growth(move |_| growth)
            .with_modulus(move |_, i| (-bm[i - 1]).max(c_floor))
            .with_diffusion_modulus(move |_, _| c_floor);
        let mut advertised = Assumption::ALL.to_vec();
        if lambda > 0.0 {
            spec = spec.with_ellipticity(move |_| lambda);
        } else {
            advertised.retain(|&a| a != Assumption::Ellipticity);
        }
        Ok(spec.advertising(&advertised))
    }
}

struct DegenerateRegime;

impl ZooModel for DegenerateRegime {
    fn name(&self) -> &'static str {
        "degenerate_regime"
    }

    fn keys(&self) -> &'static [(&'static str, &'static str)] {
        &[
            ("dim", "state dimension d (default 1)"),
            ("rate12", "switching rate from the frozen regime 1 to the Brownian regime 2 (default 1)"),
            ("rate21", "switching rate from regime 2 back to regime 1 (default 1)"),
            ("c_floor", "positive floor for the modulus constants (default 0.1)"),
        ]
    }

    fn build(&self, params: &Params) -> Result<ModelSpec, ModelError> {
        let r = Reader::new(self, params)?;
        let d = r.usize("dim", 1)?;
        let q12 = r.nonneg("rate12", 1.0)?;
        let q21 = r.nonneg("rate21", 1.0)?;
        let c_floor = r.f64("c_floor", 0.1)?;
        let q = QMatrixSpec::constant(&[vec![0.0, q12], vec![q21, 0.0]])?;
        let coeffs = FnCoefficients::new(
            |_, _, _, out| out.fill(0.0),
            move |_, _, i, out| identity_scaled(out, d, if i == 1 { 0.0 } else { 1.0 }),
        );
        let advertised: Vec<Assumption> =
            Assumption::ALL.iter().copied().filter(|&a| a != Assumption::Ellipticity).collect();
        Ok(ModelSpec::new(self.name(), d, Arc::new(coeffs), q)
            .with_growth(move |_| d as f64)
            .with_modulus(move |_, _| c_floor)
            .with_diffusion_modulus(move |_, _| c_floor)
            .advertising(&advertised))
    }
}

struct BirthDeathSwitch;

impl ZooModel for BirthDeathSwitch {
    fn name(&self) -> &'static str {
        "birth_death_switch"
    }

    fn keys(&self) -> &'static [(&'static str, &'static str)] {
        &[
            ("dim", "state dimension d (default 1)"),
            ("up", "birth rate per level: q(i, i+1) = up * i (default 1)"),
            ("down", "death rate per level: q(i, i-1) = down * (i - 1) (default 1)"),
            ("s", "diffusion scale (default 1)"),
            ("c_floor", "positive floor for the modulus constants (default 0.1)"),
        ]
    }

    fn build(&self, params: &Params) -> Result<ModelSpec, ModelError> {
        let r = Reader::new(self, params)?;
        let d = r.usize("dim", 1)?;
        let up = r.nonneg("up", 1.0)?;
        let down = r.nonneg("down", 1.0)?;
        let s = r.f64("s", 1.0)?;
        let c_floor = r.f64("c_floor", 0.1)?;
        let rates = move |_: &[f64], i: Regime, j: Regime| {
            if j == i + 1 {
                up * i as f64
            } else {
                down * (i - 1) as f64
            }
        };
        let q = QMatrixSpec::new(Arc::new(rates), 1, None)?
            .with_linear_bound(up + down, 0.0)
            .with_state_independent(true);
        let coeffs = FnCoefficients::new(
            |_, x, i, out| {
                for (o, xv) in out.iter_mut().zip(x) {
                    *o = -xv / i as f64;
                }
            },
            move |_, _, _, out| identity_scaled(out, d, s),
        );
        let growth = (s * s * d as f64).max(1e-3);
        let mut spec = ModelSpec::new(self.name(), d, Arc::new(coeffs), q)
            .with_growth(move |_| growth)
            .with_modulus(move |_, _| c_floor)
            .with_diffusion_modulus(move |_, _| c_floor);
        let mut advertised = Assumption::ALL.to_vec();
        if s != 0.0 {
            let lambda = s.abs();
            spec = spec.with_ellipticity(move |_| lambda);
        } else {
            advertised.retain(|&a| a != Assumption::Ellipticity);
        }
        Ok(spec.advertising(&advertised))
    }
}

/// `x log(1/|x|)` near the origin, continued by its constant boundary value.
pub fn log_modulus_drift(x: f64) -> f64 {
    const EDGE: f64 = 1.0 / std::f64::consts::E;
    if x == 0.0 {
        0.0
    } else if x.abs() <= EDGE {
        x * (1.0 / x.abs()).ln()
    } else {
        x.signum() * EDGE
    }
}

struct NonLipschitzLog;

impl ZooModel for NonLipschitzLog {
    fn name(&self) -> &'static str {
        "nonlipschitz_log"
    }

    fn keys(&self) -> &'static [(&'static str, &'static str)] {
        &[
            ("k", "strength of the log-Lipschitz drift (default 1)"),
            ("s", "diffusion scale (default 1)"),
            ("r12", "base switching rate 1 -> 2 (default 1)"),
            ("r21", "switching rate 2 -> 1 (default 1)"),
            ("r_amp", "state-dependent part of the 1 -> 2 rate, r_amp * min(|x|, 1) (default 0.5)"),
            ("c_floor", "positive floor for the modulus constants (default 0.1)"),
        ]
    }

    fn build(&self, params: &Params) -> Result<ModelSpec, ModelError> {
        let r = Reader::new(self, params)?;
        let k = r.nonneg("k", 1.0)?;
        let s = r.f64("s", 1.0)?;
        let r12 = r.nonneg("r12", 1.0)?;
        let r21 = r.nonneg("r21", 1.0)?;
        let amp = r.nonneg("r_amp", 0.5)?;
        let c_floor = r.f64("c_floor", 0.1)?;
        let rates = move |x: &[f64], i: Regime, _: Regime| {
            if i == 1 {
                r12 + amp * x[0].abs().min(1.0)
            } else {
                r21
            }
        };
        let alpha = (r12 + amp).max(r21 / 2.0);
        let q = QMatrixSpec::new(Arc::new(rates), 1, Some(2))?
            .with_lipschitz(amp)
            .with_linear_bound(alpha, 0.0)
            .with_state_independent(amp == 0.0);
        let coeffs = FnCoefficients::new(
            move |_, x, i, out| {
                out[0] = k * log_modulus_drift(x[0]) - if i == 2 { x[0] } else { 0.0 };
            },
            move |_, _, _, out| out[0] = s,
        );
        let growth = (k / (2.0 * std::f64::consts::E) + s * s).max(1e-3);
        let mut spec = ModelSpec::new(self.name(), 1, Arc::new(coeffs), q)
            .with_growth(move |_| growth)
            .with_modulus(move |_, _| k.max(c_floor))
            .with_diffusion_modulus(move |_, _| c_floor)
            .with_u("log_plus", "one");
        let mut advertised = Assumption::ALL.to_vec();
        if amp != 0.0 {
            advertised.retain(|&a| a != Assumption::StateIndependent);
        }
        if s != 0.0 {
            let lambda = s.abs();
            spec = spec.with_ellipticity(move |_| lambda);
        } else {
            advertised.retain(|&a| a != Assumption::Ellipticity);
        }
        Ok(spec.advertising(&advertised))
    }
}

fn registry() -> &'static BTreeMap<&'static str, Arc<dyn ZooModel>> {
    static REG: OnceLock<BTreeMap<&'static str, Arc<dyn ZooModel>>> = OnceLock::new();
    REG.get_or_init(|| {
        let entries: [Arc<dyn ZooModel>; 4] =
            [Arc::new(SwitchingOu), Arc::new(DegenerateRegime), Arc::new(BirthDeathSwitch), Arc::new(NonLipschitzLog)];
        entries.into_iter().map(|m| (m.name(), m)).collect()
    })
}

pub fn zoo_model(name: &str) -> Result<Arc<dyn ZooModel>, ModelError> {
    registry().get(name).cloned().ok_or_else(|| ModelError::Unknown { kind: "zoo model", name: name.into() })
}

/// Build the named zoo model.
pub fn zoo(name: &str, params: &Params) -> Result<ModelSpec, ModelError> {
    zoo_model(name)?.build(params)
}

pub fn zoo_names() -> Vec<&'static str> {
    registry().keys().copied().collect()
}

/// Convenience for literal parameter lists.
pub fn params<const N: usize>(entries: [(&str, Value); N]) -> Params {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;
    use crate::models::{check_assumptions, CheckStatus, SamplingPlan};

    fn plan() -> SamplingPlan {
        SamplingPlan { pairs: 2_000, ..SamplingPlan::default() }
    }

    #[test]
    fn every_model_passes_what_it_advertises() {
        for name in zoo_names() {
            let m = zoo(name, &Params::new()).unwrap();
            let report = check_assumptions(&m, &plan());
            let failures: Vec<_> = report.advertised_failures(&m).collect();
            assert!(failures.is_empty(), "{name}: {failures:#?}");
        }
    }

    #[test]
    fn switching_ou_in_three_dimensions() {
        let p = params([("dim", json!(3)), ("beta", json!([1.0, -0.5, 2.0])), ("a", json!([0.5, 0.0, -1.0]))]);
        let m = zoo("switching_ou", &p).unwrap();
        assert_eq!(m.q.n_states, Some(3));
        let report = check_assumptions(&m, &plan());
        assert_eq!(report.advertised_failures(&m).count(), 0);
    }

    #[test]
    fn degenerate_regime_breaks_ellipticity_in_regime_one_only() {
        let m = zoo("degenerate_regime", &Params::new()).unwrap();
        let report = check_assumptions(&m, &plan());
        let c = report.get(Assumption::Ellipticity).unwrap();
        assert_eq!(c.status, CheckStatus::Fail);
        assert_eq!(c.failing_regimes, vec![1]);
    }

    #[test]
    fn unknown_names_and_keys_are_rejected() {
        assert!(matches!(zoo("nope", &Params::new()), Err(ModelError::Unknown { .. })));
        assert!(zoo("switching_ou", &params([("bogus", json!(1))])).is_err());
        assert!(zoo("switching_ou", &params([("dim", json!(0))])).is_err());
    }

    #[test]
    fn log_drift_is_continuous_at_the_edge() {
        let e = 1.0 / std::f64::consts::E;
        assert!((log_modulus_drift(e) - e).abs() < 1e-15);
        assert!((log_modulus_drift(e + 1e-12) - e).abs() < 1e-12);
        assert_eq!(log_modulus_drift(-5.0), -e);
    }
}
