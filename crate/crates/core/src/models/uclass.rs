//! Moduli of continuity `u` admissible for the non-Lipschitz conditions.
//!
//! A member maps `(0, inf)` to `[1, inf)`, is `C^1`, has
//! `int_0^1 ds / (s u(s)) = inf` and `liminf_{r->0} (u(r) + r u'(r)) > 0`.
//! Entries are registered by id and looked up from model metadata.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::numeric::adaptive_simpson;

pub trait UClass: Send + Sync {
    fn id(&self) -> &'static str;

    /// The raw modulus before clamping.
    fn u_raw(&self, s: f64) -> f64;

    /// `max(u, 1)`.
    fn u(&self, s: f64) -> f64 {
        self.u_raw(s).max(1.0)
    }

    fn derivative(&self, s: f64) -> f64 {
        let h = 1e-6 * s.max(1e-12);
        (self.u(s + h) - self.u(s - h)) / (2.0 * h)
    }

    /// Declared monotonicity `u' <= 0`.
    fn non_increasing(&self) -> bool;

    /// Constant with `phi(s) <= gamma s u(s)^2` for all `s >= 0`.
    fn gamma(&self) -> f64;

    fn phi_closed_form(&self, _s: f64) -> Option<f64> {
        None
    }

    /// `phi(s) = int_0^s u(r) dr`, closed form when known.
    fn phi(&self, s: f64) -> f64 {
        self.phi_closed_form(s).unwrap_or_else(|| phi_by_quadrature(self, s))
    }
}

/// `int_0^s u(r) dr` through `r = s e^{-v}`, which smooths the integrable
/// singularities these moduli have at the origin.
pub fn phi_by_quadrature<U: UClass + ?Sized>(u: &U, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let integrand = |v: f64| {
        let r = s * (-v).exp();
        u.u(r) * r
    };
    adaptive_simpson(integrand, 0.0, 60.0, 1e-14 * s.max(1.0))
}

/// `u = 1`: the Lipschitz case.
#[derive(Debug, Clone, Copy)]
pub struct Constant;

impl UClass for Constant {
    fn id(&self) -> &'static str {
        "one"
    }
    fn u_raw(&self, _s: f64) -> f64 {
        1.0
    }
    fn derivative(&self, _s: f64) -> f64 {
        0.0
    }
    fn non_increasing(&self) -> bool {
        true
    }
    fn gamma(&self) -> f64 {
        1.0
    }
    fn phi_closed_form(&self, s: f64) -> Option<f64> {
        Some(s.max(0.0))
    }
}

/// `u(s) = 1 + log+(1/s)`.
#[derive(Debug, Clone, Copy)]
pub struct LogPlus;

impl UClass for LogPlus {
    fn id(&self) -> &'static str {
        "log_plus"
    }
    fn u_raw(&self, s: f64) -> f64 {
        1.0 + (1.0 / s).ln().max(0.0)
    }
    fn derivative(&self, s: f64) -> f64 {
        if s < 1.0 {
            -1.0 / s
        } else {
            0.0
        }
    }
    fn non_increasing(&self) -> bool {
        true
    }
    fn gamma(&self) -> f64 {
        2.0
    }
    fn phi_closed_form(&self, s: f64) -> Option<f64> {
        Some(if s <= 0.0 {
            0.0
        } else if s <= 1.0 {
            s * (2.0 + (1.0 / s).ln())
        } else {
            s + 1.0
        })
    }
}

/// A caller-supplied modulus whose `phi` is always found by quadrature.
pub struct Custom<F> {
    pub id: &'static str,
    pub u: F,
    pub gamma: f64,
    pub non_increasing: bool,
}

impl<F: Fn(f64) -> f64 + Send + Sync> UClass for Custom<F> {
    fn id(&self) -> &'static str {
        self.id
    }
    fn u_raw(&self, s: f64) -> f64 {
        (self.u)(s)
    }
    fn non_increasing(&self) -> bool {
        self.non_increasing
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn registry() -> &'static BTreeMap<&'static str, Arc<dyn UClass>> {
    static REG: OnceLock<BTreeMap<&'static str, Arc<dyn UClass>>> = OnceLock::new();
    REG.get_or_init(|| {
        let entries: [Arc<dyn UClass>; 2] = [Arc::new(Constant), Arc::new(LogPlus)];
        entries.into_iter().map(|u| (u.id(), u)).collect()
    })
}

pub fn lookup(id: &str) -> Option<Arc<dyn UClass>> {
    registry().get(id).cloned()
}

pub fn registered_ids() -> Vec<&'static str> {
    registry().keys().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_phi_is_identity_with_gamma_one() {
        let u = lookup("one").unwrap();
        for &s in &[0.0, 1e-6, 0.3, 1.0, 42.0] {
            assert_eq!(u.phi(s), s);
            assert!(u.phi(s) <= u.gamma() * s * u.u(s).powi(2));
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for &s in &[1e-9, 1e-4, 0.05, 0.5, 1.0, 3.0, 250.0] {
            let a = LogPlus.phi(s);
            let b = phi_by_quadrature(&LogPlus, s);
            assert!((a - b).abs() < 1e-10 * a.max(1.0), "s={s}: {a} vs {b}");
            assert!((phi_by_quadrature(&Constant, s) - s).abs() < 1e-10 * s.max(1.0));
        }
    }

    #[test]
    fn log_plus_gamma_two_dominates() {
        let u = LogPlus;
        for k in -300..=60 {
            let s = 10f64.powf(k as f64 / 10.0);
            assert!(u.phi(s) <= u.gamma() * s * u.u(s).powi(2) * (1.0 + 1e-14));
        }
    }

    #[test]
    fn log_plus_divergence_by_substitution() {
        // With v = log(1/s) the integral over s in [e^{-V}, 1] is log(1 + V),
        // which grows without bound.
        let u = LogPlus;
        for &v_max in &[10.0f64, 100.0, 700.0] {
            let numeric = adaptive_simpson(|v: f64| 1.0 / u.u((-v).exp()), 0.0, v_max, 1e-10);
            assert!((numeric - (1.0 + v_max).ln()).abs() < 1e-8, "{numeric} vs {}", (1.0 + v_max).ln());
        }
    }

    #[test]
    fn custom_uses_quadrature() {
        let u = Custom { id: "sqrt", u: |s: f64| 1.0 + s.sqrt(), gamma: 1.0, non_increasing: false };
        let s: f64 = 2.0;
        let exact = s + 2.0 / 3.0 * s.powf(1.5);
        assert!((u.phi(s) - exact).abs() < 1e-10);
        assert!(lookup("sqrt").is_none());
        assert_eq!(registered_ids(), vec!["log_plus", "one"]);
    }
}
