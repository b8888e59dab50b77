use rayon::prelude::*;
use serde::Serialize;

use crate::error::SimError;
use crate::numeric::pairwise_sum;

/// Share of aborted replicas above which an estimate is flagged.
pub const ABORT_TOLERANCE: f64 = 1e-3;

/// Replica mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub n_replicas: usize,
    pub n_aborted: usize,
}

impl McEstimate {
    /// An exactly known value.
    pub fn exact(value: f64) -> Self {
        Self { mean: value, stderr: 0.0, n_replicas: 0, n_aborted: 0 }
    }

    /// Mean and standard error of `values`, summed in a fixed pairwise order.
    pub fn from_samples(values: &[f64], n_aborted: usize) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, n_replicas: 0, n_aborted };
        }
        let mean = pairwise_sum(values) / n as f64;
        let stderr = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, n_replicas: n, n_aborted }
    }

    /// Too many aborted replicas for the estimate to be trusted.
    pub fn flagged(&self) -> bool {
        let total = self.n_replicas + self.n_aborted;
        total > 0 && self.n_aborted as f64 / total as f64 > ABORT_TOLERANCE
    }

    /// `sqrt(se_a^2 + se_b^2)` for independent estimates.
    pub fn combined_stderr(&self, other: &McEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// Evaluate `f` on replica ids `0..n` in parallel, in id order.
pub fn replicate<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Split replica outcomes into values and a blow-up count. Any other error
/// is a model defect and is returned as is.
pub fn partition_outcomes<T>(outcomes: Vec<Result<T, SimError>>) -> Result<(Vec<T>, usize), SimError> {
    let mut ok = Vec::with_capacity(outcomes.len());
    let mut aborted = 0;
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(SimError::Blowup { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((ok, aborted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_stderr() {
        let e = McEstimate::from_samples(&[1.0; 100], 0);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert!(!e.flagged());
    }

    #[test]
    fn stderr_matches_textbook_formula() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let e = McEstimate::from_samples(&v, 0);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.stderr - sd / 2.0).abs() < 1e-15);
    }

    #[test]
    fn abort_flag() {
        let e = McEstimate::from_samples(&[0.0; 998], 2);
        assert!(e.flagged());
        let e = McEstimate::from_samples(&[0.0; 9990], 1);
        assert!(!e.flagged());
    }

    #[test]
    fn replicas_come_back_in_order() {
        let v = replicate(1000, |r| r * 2);
        assert!(v.iter().enumerate().all(|(k, &x)| x == 2 * k as u64));
    }
}
