use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::ModelError;
use crate::Regime;

/// State-dependent switching rates `q_ij(x)`.
///
/// Implementations are only queried for `i != j`, `|j - i| <= bandwidth`
/// and `1 <= j <= n_states`; everything else is zero by construction.
/// Callbacks must be pure: replicas call them concurrently.
pub trait SwitchingRates: Send + Sync {
    fn rate(&self, x: &[f64], from: Regime, to: Regime) -> f64;
}

impl<F> SwitchingRates for F
where
    F: Fn(&[f64], Regime, Regime) -> f64 + Send + Sync,
{
    fn rate(&self, x: &[f64], from: Regime, to: Regime) -> f64 {
        self(x, from, to)
    }
}

/// Constant rates on a finite state space, stored densely.
#[derive(Debug, Clone)]
pub struct ConstantRates {
    n: usize,
    dense: Vec<f64>,
}

impl SwitchingRates for ConstantRates {
    fn rate(&self, _x: &[f64], from: Regime, to: Regime) -> f64 {
        self.dense[(from - 1) * self.n + (to - 1)]
    }
}

/// A banded, conservative Q-matrix with the metadata used by the checkers.
///
/// Regimes are 1-based. `n_states = None` means the countably infinite
/// state space `{1, 2, ...}`; rows are then only ever materialised on demand.
#[derive(Clone)]
pub struct QMatrixSpec {
    rates: Arc<dyn SwitchingRates>,
    pub bandwidth: usize,
    pub n_states: Option<usize>,
    /// Lipschitz constant of every `q_ij` in `x`.
    pub lipschitz_cq: f64,
    /// `q_i(x) <= alpha * i + beta * |x|`.
    pub linear_bound_alpha: f64,
    pub linear_bound_beta: f64,
    pub state_independent: bool,
}

impl fmt::Debug for QMatrixSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QMatrixSpec")
            .field("bandwidth", &self.bandwidth)
            .field("n_states", &self.n_states)
            .field("lipschitz_cq", &self.lipschitz_cq)
            .field("linear_bound_alpha", &self.linear_bound_alpha)
            .field("linear_bound_beta", &self.linear_bound_beta)
            .field("state_independent", &self.state_independent)
            .finish_non_exhaustive()
    }
}

impl QMatrixSpec {
    pub fn new(
        rates: Arc<dyn SwitchingRates>,
        bandwidth: usize,
        n_states: Option<usize>,
    ) -> Result<Self, ModelError> {
        if bandwidth == 0 {
            return Err(ModelError::InvalidArgument("bandwidth must be >= 1".into()));
        }
        if n_states == Some(0) {
            return Err(ModelError::InvalidArgument("empty state space".into()));
        }
        Ok(Self {
            rates,
            bandwidth,
            n_states,
            lipschitz_cq: 0.0,
            linear_bound_alpha: 0.0,
            linear_bound_beta: 0.0,
            state_independent: false,
        })
    }

    /// Constant rates from a dense `n x n` table (diagonal ignored).
    /// Bandwidth and the `alpha` of `q_i <= alpha * i` are derived.
    pub fn constant(table: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = table.len();
        if n == 0 {
            return Err(ModelError::InvalidArgument("empty rate table".into()));
        }
        let mut dense = vec![0.0; n * n];
        let mut bandwidth = 1;
        let mut alpha: f64 = 0.0;
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: row.len() });
            }
            let mut exit = 0.0;
            for (j, &r) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !r.is_finite() {
                    return Err(ModelError::NonFiniteRate { x: vec![], from: i + 1, to: j + 1 });
                }
                if r < 0.0 {
                    return Err(ModelError::NegativeRate { x: vec![], from: i + 1, to: j + 1, rate: r });
                }
                if r > 0.0 {
                    bandwidth = bandwidth.max(i.abs_diff(j));
                }
                dense[i * n + j] = r;
                exit += r;
            }
            alpha = alpha.max(exit / (i + 1) as f64);
        }
        let mut q = Self::new(Arc::new(ConstantRates { n, dense }), bandwidth, Some(n))?;
        q.state_independent = true;
        q.linear_bound_alpha = alpha;
        Ok(q)
    }

    pub fn with_lipschitz(mut self, cq: f64) -> Self {
        self.lipschitz_cq = cq;
        self
    }

    pub fn with_linear_bound(mut self, alpha: f64, beta: f64) -> Self {
        self.linear_bound_alpha = alpha;
        self.linear_bound_beta = beta;
        self
    }

    pub fn with_state_independent(mut self, flag: bool) -> Self {
        self.state_independent = flag;
        self
    }

    pub fn contains(&self, i: Regime) -> bool {
        i >= 1 && self.n_states.is_none_or(|n| i <= n)
    }

    /// Admissible targets of row `i` in increasing order, skipping `i`.
    pub fn band(&self, i: Regime) -> impl Iterator<Item = Regime> {
        let lo = i.saturating_sub(self.bandwidth).max(1);
        let hi = match self.n_states {
            Some(n) => (i + self.bandwidth).min(n),
            None => i + self.bandwidth,
        };
        (lo..=hi).filter(move |&j| j != i)
    }

    /// `q_ij(x)`; zero off the band, on the diagonal and outside the state space.
    pub fn rate(&self, x: &[f64], i: Regime, j: Regime) -> f64 {
        if i == j || i.abs_diff(j) > self.bandwidth || !self.contains(i) || !self.contains(j) {
            return 0.0;
        }
        self.rates.rate(x, i, j)
    }

    /// Row `i` as `(target, rate)` pairs in layout order, validated.
    /// Zero-rate entries are kept so callers can see the full band.
    pub fn row(&self, x: &[f64], i: Regime) -> Result<Vec<(Regime, f64)>, ModelError> {
        self.band(i)
            .map(|j| {
                let r = self.rates.rate(x, i, j);
                if !r.is_finite() {
                    Err(ModelError::NonFiniteRate { x: x.to_vec(), from: i, to: j })
                } else if r < 0.0 {
                    Err(ModelError::NegativeRate { x: x.to_vec(), from: i, to: j, rate: r })
                } else {
                    Ok((j, r))
                }
            })
            .collect()
    }

    /// Total exit rate `q_i(x)`, accumulated in layout order.
    pub fn exit_rate(&self, x: &[f64], i: Regime) -> f64 {
        let mut acc = 0.0;
        for j in self.band(i) {
            acc += self.rates.rate(x, i, j);
        }
        acc
    }

    /// Dense generator on `{1..m}` at `x`. The diagonal is `-q_i(x)`, so rows
    /// that leak outside `{1..m}` are sub-conservative.
    pub fn generator(&self, x: &[f64], m: usize) -> Result<DMatrix<f64>, ModelError> {
        let mut g = DMatrix::zeros(m, m);
        for i in 1..=m {
            if !self.contains(i) {
                continue;
            }
            let mut exit = 0.0;
            for (j, r) in self.row(x, i)? {
                if j <= m {
                    g[(i - 1, j - 1)] = r;
                }
                exit += r;
            }
            g[(i - 1, i - 1)] = -exit;
        }
        Ok(g)
    }
}

/// Strong connectivity of the positive off-diagonal pattern of a generator.
pub fn is_irreducible(generator: &DMatrix<f64>) -> bool {
    let n = generator.nrows();
    if n <= 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..n {
                let r = if forward { generator[(a, b)] } else { generator[(b, a)] };
                if a != b && r > 0.0 && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_table_derives_band_and_alpha() {
        let q = QMatrixSpec::constant(&[
            vec![0.0, 1.0, 2.0],
            vec![2.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(q.bandwidth, 2);
        assert_eq!(q.exit_rate(&[0.0], 1), 3.0);
        assert!((q.linear_bound_alpha - 3.0).abs() < 1e-15);
        assert_eq!(q.band(2).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(q.rate(&[0.0], 2, 2), 0.0);
        assert_eq!(q.rate(&[0.0], 1, 4), 0.0);
    }

    #[test]
    fn negative_rate_is_named() {
        let rates = |_: &[f64], i: Regime, _: Regime| if i == 2 { -1.0 } else { 1.0 };
        let q = QMatrixSpec::new(Arc::new(rates), 1, Some(3)).unwrap();
        let err = q.row(&[0.5], 2).unwrap_err();
        assert_eq!(err, ModelError::NegativeRate { x: vec![0.5], from: 2, to: 1, rate: -1.0 });
    }

    #[test]
    fn infinite_band_respects_lower_edge() {
        let rates = |_: &[f64], _: Regime, _: Regime| 1.0;
        let q = QMatrixSpec::new(Arc::new(rates), 2, None).unwrap();
        assert_eq!(q.band(1).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(q.band(10).collect::<Vec<_>>(), vec![8, 9, 11, 12]);
    }

    #[test]
    fn irreducibility() {
        let q = QMatrixSpec::constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(is_irreducible(&q.generator(&[0.0], 2).unwrap()));
        let q = QMatrixSpec::constant(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(!is_irreducible(&q.generator(&[0.0], 2).unwrap()));
    }
}
