use nalgebra::DMatrix;

use crate::error::ModelError;

pub const DEFAULT_DIMENSION_CAP: usize = 512;

/// `exp(t Q)` for a finite conservative generator by uniformization.
///
/// With `L >= max_i |q_ii|` and `P = I + Q / L`,
/// `exp(tQ) = sum_k Poisson(k; L t) P^k`. The series is evaluated at
/// `t / 2^s` with `L t / 2^s <= 1` and squared back up `s` times, which
/// keeps the Poisson weights away from underflow for large `L t`.
pub fn transition_matrix(generator: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>, ModelError> {
    transition_matrix_capped(generator, t, DEFAULT_DIMENSION_CAP)
}

pub fn transition_matrix_capped(
    generator: &DMatrix<f64>,
    t: f64,
    cap: usize,
) -> Result<DMatrix<f64>, ModelError> {
    let n = generator.nrows();
    if generator.ncols() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: generator.ncols() });
    }
    if n > cap {
        return Err(ModelError::DimensionCap { dim: n, cap });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ModelError::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    let lambda = (0..n).map(|i| generator[(i, i)].abs()).fold(0.0, f64::max);
    if t == 0.0 || lambda == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let mut squarings = 0u32;
    let mut tau = t;
    while lambda * tau > 1.0 {
        tau *= 0.5;
        squarings += 1;
    }
    let kernel = DMatrix::identity(n, n) + generator / lambda;
    let rate = lambda * tau;

    // Poisson(rate) weights; the tail after term k is below 1e-17 well before k = 30.
    let mut weight = (-rate).exp();
    let mut mass = weight;
    let mut power = DMatrix::identity(n, n);
    let mut out = &power * weight;
    let mut k = 0u32;
    while 1.0 - mass > 1e-17 && k < 200 {
        k += 1;
        power = &power * &kernel;
        weight *= rate / k as f64;
        mass += weight;
        out += &power * weight;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])
    }

    #[test]
    fn two_state_closed_form() {
        for &t in &[0.1, 0.5, 1.0, 2.0, 7.5, 40.0] {
            let p = transition_matrix(&two_state(), t).unwrap();
            let p11 = 0.5 * (1.0 + (-2.0 * t).exp());
            assert!((p[(0, 0)] - p11).abs() < 1e-12, "t={t}");
            assert!((p[(0, 1)] - (1.0 - p11)).abs() < 1e-12, "t={t}");
        }
        let p = transition_matrix(&two_state(), 1.0).unwrap();
        assert!((p[(0, 0)] - 0.567_667_641_618_306_3).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        assert_eq!(transition_matrix(&two_state(), 0.0).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(transition_matrix(&two_state(), -1.0).is_err());
        let big = DMatrix::<f64>::zeros(600, 600);
        assert!(matches!(transition_matrix(&big, 1.0), Err(ModelError::DimensionCap { .. })));
    }

    #[test]
    fn agrees_with_pade_exponential() {
        let q = DMatrix::from_row_slice(
            4,
            4,
            &[-3.0, 2.0, 1.0, 0.0, 0.5, -1.5, 0.0, 1.0, 0.0, 4.0, -6.0, 2.0, 0.0, 0.0, 0.25, -0.25],
        );
        for &t in &[0.3, 1.0, 5.0] {
            let a = transition_matrix(&q, t).unwrap();
            let b = (&q * t).exp();
            assert!((a - b).amax() < 1e-11);
        }
    }
}
