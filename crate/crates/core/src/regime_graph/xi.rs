use nalgebra::DMatrix;

use crate::error::ModelError;

/// The comparison chain `xi^K`: every admissible neighbour within the band
/// is reached at rate `alpha * K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiChainSpec {
    pub k: usize,
    pub alpha: f64,
    pub kappa: usize,
}

impl XiChainSpec {
    /// Exit rate from `i` on the unbounded state space,
    /// `(min(kappa, i - 1) + kappa) * alpha * K`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        (self.kappa.min(i - 1) + self.kappa) as f64 * self.alpha * self.k as f64
    }
}

/// Generator of `xi^K` restricted to `{1..m}`.
///
/// Rows within `kappa` of `m` lose their targets beyond `m` and are kept
/// conservative by reducing their exit rate; entries with `i <= m - kappa`
/// are exactly those of the unbounded chain.
pub fn xi_generator(spec: &XiChainSpec, m: usize) -> Result<DMatrix<f64>, ModelError> {
    if spec.kappa == 0 || m < spec.kappa + 1 {
        return Err(ModelError::InvalidArgument(format!(
            "xi generator needs kappa >= 1 and m >= kappa + 1 (kappa = {}, m = {m})",
            spec.kappa
        )));
    }
    let rate = spec.alpha * spec.k as f64;
    let mut g = DMatrix::zeros(m, m);
    for i in 1..=m {
        let lo = i.saturating_sub(spec.kappa).max(1);
        let hi = (i + spec.kappa).min(m);
        let mut exit = 0.0;
        for j in (lo..=hi).filter(|&j| j != i) {
            g[(i - 1, j - 1)] = rate;
            exit += rate;
        }
        g[(i - 1, i - 1)] = -exit;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regime_graph::transition_matrix;

    #[test]
    fn rows_follow_formula() {
        let spec = XiChainSpec { k: 2, alpha: 1.0, kappa: 1 };
        let g = xi_generator(&spec, 6).unwrap();
        assert_eq!(g[(0, 1)], 2.0);
        assert_eq!(g[(0, 0)], -2.0);
        assert_eq!(g[(2, 1)], 2.0);
        assert_eq!(g[(2, 3)], 2.0);
        assert_eq!(g[(2, 2)], -4.0);
        for i in 1..=5 {
            assert_eq!(g[(i - 1, i - 1)], -spec.exit_rate(i));
        }
    }

    #[test]
    fn zero_alpha_is_zero_matrix() {
        let g = xi_generator(&XiChainSpec { k: 3, alpha: 0.0, kappa: 2 }, 8).unwrap();
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn small_time_log_diagonal() {
        let spec = XiChainSpec { k: 3, alpha: 0.7, kappa: 2 };
        let g = xi_generator(&spec, 12).unwrap();
        let t = 1e-4;
        let p = transition_matrix(&g, t).unwrap();
        for i in 3..=10 {
            let slope = p[(i - 1, i - 1)].ln() / t;
            let target = -2.0 * spec.kappa as f64 * spec.alpha * spec.k as f64;
            assert!((slope / target - 1.0).abs() < 0.01, "i={i}: {slope} vs {target}");
        }
    }
}
