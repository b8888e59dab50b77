//! K-truncation of the rate matrix onto `{1, ..., K + kappa + 1}`.

use std::sync::Arc;

use super::{QMatrixSpec, SwitchingRates};
use crate::error::ModelError;
use crate::Regime;

/// Smooth monotone step from 1 (at `s <= 0`) to 0 (at `s >= 1`), built from
/// `g(s) = exp(-1/s)` as `g(1-s) / (g(1-s) + g(s))`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let g = |v: f64| (-1.0 / v).exp();
    let a = g(1.0 - s);
    a / (a + g(s))
}

/// The cutoff `phi^K(x)`: exactly 1 on `|x| <= K`, exactly 0 on `|x| >= K + 1`.
pub fn cutoff(k: usize, x: &[f64]) -> f64 {
    smooth_step(norm(x) - k as f64)
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

struct TruncatedRates {
    inner: QMatrixSpec,
    k: usize,
}

impl TruncatedRates {
    fn boundary(&self) -> Regime {
        self.k + self.inner.bandwidth + 1
    }
}

impl SwitchingRates for TruncatedRates {
    fn rate(&self, x: &[f64], i: Regime, j: Regime) -> f64 {
        let phi = cutoff(self.k, x);
        let top = self.boundary();
        if i < top {
            if j < top {
                self.inner.rate(x, i, j) * phi
            } else {
                // Fold every target at or beyond the boundary into it.
                let mut acc = 0.0;
                for l in self.inner.band(i).filter(|&l| l >= top) {
                    acc += self.inner.rate(x, i, l);
                }
                acc * phi
            }
        } else if j > self.k {
            1.0 + self.inner.rate(x, i, j) * phi
        } else {
            0.0
        }
    }
}

/// Truncate `q` at level `k`: rows up to `K + kappa` are scaled by the
/// cutoff and their mass beyond `K + kappa` is folded into state
/// `K + kappa + 1`; that boundary state returns to `K+1..=K+kappa` at rate
/// `1 + q_ij(x) phi^K(x)`. The result coincides with `q` on `{1..K}` for
/// `|x| <= K` and is irreducible whenever `q` is.
pub fn truncate_q(q: &QMatrixSpec, k: usize) -> Result<QMatrixSpec, ModelError> {
    if k < 1 {
        return Err(ModelError::InvalidArgument("truncation level K must be >= 1".into()));
    }
    let kappa = q.bandwidth;
    let rates = TruncatedRates { inner: q.clone(), k };
    let out = QMatrixSpec::new(Arc::new(rates), kappa, Some(k + kappa + 1))?
        .with_lipschitz(q.lipschitz_cq)
        .with_linear_bound(q.linear_bound_alpha + 1.0, q.linear_bound_beta)
        .with_state_independent(false);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regime_graph::is_irreducible;

    fn birth_death() -> QMatrixSpec {
        let rates = |_: &[f64], i: Regime, j: Regime| if j == i + 1 { i as f64 } else { (i - 1) as f64 };
        QMatrixSpec::new(Arc::new(rates), 1, None).unwrap()
    }

    #[test]
    fn step_endpoints_and_monotonicity() {
        assert_eq!(smooth_step(-0.5), 1.0);
        assert_eq!(smooth_step(0.0), 1.0);
        assert_eq!(smooth_step(1.0), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 1..100 {
            let v = smooth_step(k as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(cutoff(3, &[3.0]), 1.0);
        assert_eq!(cutoff(3, &[0.0, -4.0]), 0.0);
    }

    #[test]
    fn birth_death_truncation() {
        let q = truncate_q(&birth_death(), 3).unwrap();
        assert_eq!(q.n_states, Some(5));
        let g = q.generator(&[1.0], 5).unwrap();
        assert_eq!(g[(3, 4)], 4.0);
        assert_eq!(g[(4, 3)], 5.0);
        assert_eq!(g[(4, 4)], -5.0);
        for i in 0..5 {
            assert!(g.row(i).sum().abs() < 1e-12);
        }
        assert!(is_irreducible(&g));
        let orig = birth_death();
        for i in 1..=3 {
            for j in 1..=3 {
                assert_eq!(q.rate(&[2.5], i, j), orig.rate(&[2.5], i, j));
            }
        }
    }

    #[test]
    fn finite_q_is_padded() {
        let orig = QMatrixSpec::constant(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let q = truncate_q(&orig, 4).unwrap();
        assert_eq!(q.n_states, Some(6));
        let g = q.generator(&[0.5], 6).unwrap();
        assert_eq!(g[(0, 1)], 2.0);
        assert_eq!(g[(1, 0)], 3.0);
        assert_eq!(g[(1, 2)], 0.0);
        // Only the boundary row feeds the padding state 5.
        assert_eq!(g[(5, 4)], 1.0);
    }

    #[test]
    fn far_field_keeps_only_boundary_return() {
        let q = truncate_q(&birth_death(), 3).unwrap();
        let g = q.generator(&[4.5], 5).unwrap();
        for i in 0..4 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(g[(i, j)], 0.0);
                }
            }
        }
        assert_eq!(g[(4, 3)], 1.0);
        assert!(truncate_q(&birth_death(), 0).is_err());
    }
}
