use std::sync::Arc;

use super::*;
use crate::engine::{SchemeKind, SimConfig};
use crate::models::{zoo, FnCoefficients, ModelSpec, Params};
use crate::regime_graph::QMatrixSpec;

fn pure_chain(table: &[Vec<f64>]) -> ModelSpec {
    let q = QMatrixSpec::constant(table).unwrap();
    let coeffs = FnCoefficients::new(|_, _, _, out| out.fill(0.0), |_, _, _, out| out.fill(0.0));
    ModelSpec::new("pure_chain", 1, Arc::new(coeffs), q).with_growth(|_| 1.0)
}

fn ou() -> ModelSpec {
    let q = QMatrixSpec::constant(&[vec![0.0]]).unwrap();
    let coeffs = FnCoefficients::new(|_, x, _, out| out[0] = -x[0], |_, _, _, out| out[0] = 1.0);
    ModelSpec::new("ou", 1, Arc::new(coeffs), q).with_growth(|_| 1.0)
}

fn within(est: &McEstimate, target: f64, slack: f64) -> bool {
    (est.mean - target).abs() <= 3.0 * est.stderr + slack
}

#[test]
fn constant_function_is_exact() {
    let m = zoo("switching_ou", &Params::new()).unwrap();
    let e = semigroup_estimate(&m, &TestFunction::constant(1.0), 1.0, &[0.3], 1, 200, &SimConfig::new(1.0, 0.01, 1)).unwrap();
    assert_eq!(e.mean, 1.0);
    assert_eq!(e.stderr, 0.0);
}

#[test]
fn pure_chain_regime_mean() {
    let m = pure_chain(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let f = TestFunction::new("regime", 2.0, |_, k| k as f64);
    let cfg = SimConfig::new(1.0, 0.01, 3).with_scheme(SchemeKind::EventDrivenExact);
    let e = semigroup_estimate(&m, &f, 1.0, &[0.0], 1, 20_000, &cfg).unwrap();
    // Two-state chain with unit rates: p12(t) = (1 - e^{-2t}) / 2.
    let oracle = 1.0 + (1.0 - (-2.0f64).exp()) / 2.0;
    assert!((oracle - 1.432_332).abs() < 1e-6);
    assert!(within(&e, oracle, 0.0), "{e:?}");
}

#[test]
fn ou_mean_decays() {
    let f = TestFunction::new("x", 1e6, |x, _| x[0]);
    let e = semigroup_estimate(&ou(), &f, 1.0, &[1.0], 1, 20_000, &SimConfig::new(1.0, 1e-3, 4)).unwrap();
    assert!(within(&e, (-1.0f64).exp(), 1e-3), "{e:?}");
}

#[test]
fn unbounded_test_function_is_rejected() {
    let f = TestFunction::new("x", 0.5, |x, _| x[0]);
    assert!(semigroup_estimate(&ou(), &f, 1.0, &[1.0], 1, 10, &SimConfig::new(1.0, 1e-2, 4)).is_err());
}

#[test]
fn first_jump_without_switching_is_the_frozen_regime() {
    let f = TestFunction::new("x", 1e6, |x, _| x[0]);
    let cfg = SimConfig::new(1.0, 1e-3, 5);
    let e = first_jump_estimate(&ou(), &f, 1.0, &[1.0], 1, 20_000, &cfg).unwrap();
    assert!(within(&e, (-1.0f64).exp(), 1e-3), "{e:?}");
}

#[test]
fn first_jump_on_degenerate_regime() {
    let m = zoo("degenerate_regime", &Params::new()).unwrap();
    let f = TestFunction::positive_first_coordinate();
    let cfg = SimConfig::new(1.0, 1e-3, 6);
    let e = first_jump_estimate(&m, &f, 1.0, &[0.5], 1, 20_000, &cfg).unwrap();
    // No switch by t keeps x = 0.5 > 0: at least e^{-1}.
    assert!(e.mean + 3.0 * e.stderr >= (-1.0f64).exp());
    let s = semigroup_estimate(&m, &f, 1.0, &[0.5], 1, 20_000, &cfg.clone().with_scheme(SchemeKind::EventDrivenExact)).unwrap();
    assert!((e.mean - s.mean).abs() <= 3.0 * e.combined_stderr(&s));
}

#[test]
fn first_jump_matches_semigroup_on_switching_ou() {
    let m = zoo("switching_ou", &Params::new()).unwrap();
    let f = TestFunction::gaussian_bump(0.7, vec![0.2], vec![1.0, 0.4]);
    let cfg = SimConfig::new(1.0, 1e-2, 7).with_scheme(SchemeKind::EventDrivenExact);
    let a = first_jump_estimate(&m, &f, 0.8, &[0.5], 2, 20_000, &cfg).unwrap();
    let b = semigroup_estimate(&m, &f, 0.8, &[0.5], 2, 20_000, &cfg).unwrap();
    assert!((a.mean - b.mean).abs() <= 3.0 * a.combined_stderr(&b), "{a:?} {b:?}");
}

#[test]
fn first_jump_rejects_state_dependent_rates() {
    let m = zoo("nonlipschitz_log", &Params::new()).unwrap();
    let err = first_jump_estimate(&m, &TestFunction::constant(1.0), 1.0, &[0.0], 1, 10, &SimConfig::new(1.0, 0.1, 0));
    assert!(err.is_err());
}

#[test]
fn constant_path_moment_bound() {
    let m = pure_chain(&[vec![0.0]]);
    let r = moment_bound_check(&m, &[1.0], 1, 0.5, 100, &SimConfig::new(0.5, 0.01, 1), DEFAULT_BDG_CONSTANT).unwrap();
    assert_eq!(r.lhs.mean, 2.0);
    assert_eq!(r.lhs.stderr, 0.0);
    // Constant envelope c = 1 on [0, 0.5].
    let expected = (4.0 / 3.0 + 4.0) * ((4.0 + 12.0) * 0.5 + 8.0 * 2.0 * 1.5 * 0.5f64).exp();
    assert!((r.rhs - expected).abs() < 1e-9 * expected);
    assert!(r.pass);
}

#[test]
fn zoo_moment_bounds_hold() {
    for (name, t) in [("switching_ou", 1.0), ("birth_death_switch", 0.5)] {
        let m = zoo(name, &Params::new()).unwrap();
        let r = moment_bound_check(&m, &[0.5], 1, t, 2000, &SimConfig::new(t, 1e-2, 2), DEFAULT_BDG_CONSTANT).unwrap();
        assert!(r.pass && r.margin > 0.0, "{name}: {r:?}");
    }
}

#[test]
fn pure_birth_holding_times() {
    // q(i, i+1) = 2 i: exponential holding with rate 2k.
    let rates = |_: &[f64], i: usize, j: usize| if j == i + 1 { 2.0 * i as f64 } else { 0.0 };
    let q = QMatrixSpec::new(Arc::new(rates), 1, None).unwrap().with_linear_bound(2.0, 0.0).with_state_independent(true);
    let coeffs = FnCoefficients::new(|_, _, _, out| out.fill(0.0), |_, _, _, out| out.fill(0.0));
    let m = ModelSpec::new("pure_birth", 1, Arc::new(coeffs), q);
    let grid = [0.0, 0.1, 0.3];
    let reports = holding_time_check(&m, &[0.0], 2, 3, &grid, 20_000, &SimConfig::new(1.0, 0.01, 9)).unwrap();
    assert_eq!(reports[0].lhs.mean, 1.0);
    assert!(reports.iter().all(|r| r.pass));
    for (r, &t) in reports.iter().zip(&grid) {
        assert!((r.lhs.mean - (-4.0 * t).exp()).abs() <= 3.0 * r.lhs.stderr + 1e-12, "{r:?}");
    }
}

#[test]
fn holding_on_birth_death_and_state_dependent() {
    let m = zoo("birth_death_switch", &Params::new()).unwrap();
    let rs = holding_time_check(&m, &[0.0], 2, 5, &[0.1, 0.5, 1.0], 10_000, &SimConfig::new(1.0, 0.01, 1)).unwrap();
    assert!(rs.iter().all(|r| r.pass));
    let m = zoo("nonlipschitz_log", &Params::new()).unwrap();
    let rs = holding_time_check(&m, &[0.5], 1, 3, &[0.1, 0.5], 2000, &SimConfig::new(1.0, 0.01, 1)).unwrap();
    assert!(rs.iter().all(|r| r.pass));
}

#[test]
fn harnack_trivial_cases() {
    let m = zoo("switching_ou", &Params::new()).unwrap();
    let cfg = SimConfig::new(1.0, 1e-2, 3);
    let r = harnack_check(&m, &TestFunction::constant(2.0), &[0.0], &[0.5], 1, 1.0, 500, &cfg, 1e-6).unwrap();
    assert!((r.lhs.mean - 2f64.ln()).abs() < 1e-12 && r.rhs >= r.lhs.mean && r.pass);
    let f = TestFunction::new("gauss", 1.0, |x, _| (-x[0] * x[0]).exp());
    let r = harnack_check(&m, &f, &[0.3], &[0.3], 1, 1.0, 500, &cfg, 1e-6).unwrap();
    assert!(r.lhs.mean <= r.rhs && r.pass);
}

#[test]
fn harnack_gaussian_half_unit_apart() {
    let m = zoo("switching_ou", &Params::new()).unwrap();
    let f = TestFunction::new("gauss", 1.0, |x, _| (-x[0] * x[0]).exp());
    let r = harnack_check(&m, &f, &[0.0], &[0.5], 1, 1.0, 5000, &SimConfig::new(1.0, 1e-2, 3), 1e-6).unwrap();
    assert!(r.pass && r.margin > 0.0, "{r:?}");
}

#[test]
fn harnack_needs_ellipticity() {
    let m = zoo("degenerate_regime", &Params::new()).unwrap();
    let f = TestFunction::constant(1.0);
    assert!(harnack_check(&m, &f, &[0.0], &[0.5], 1, 1.0, 10, &SimConfig::new(1.0, 1e-2, 3), 1e-6).is_err());
}

#[test]
fn feller_dichotomy() {
    let f = TestFunction::positive_first_coordinate();
    let m = zoo("switching_ou", &Params::new()).unwrap();
    let p = feller_modulus(&m, &f, 1.0, &[0.0], 1, &[0.5, 0.1, 1e-3], 4000, &SimConfig::new(1.0, 1e-2, 8), Anchor::Offset).unwrap();
    assert!(p.monotone && !p.discontinuous, "{p:?}");
    assert!(p.points[2].gap.mean < 0.02);
    let m = zoo("degenerate_regime", &Params::new()).unwrap();
    let cfg = SimConfig::new(1.0, 1e-2, 8).with_scheme(SchemeKind::EventDrivenExact);
    let p = feller_modulus(&m, &f, 1.0, &[0.0], 1, &[0.1, 1e-3], 4000, &cfg, Anchor::Straddle).unwrap();
    let g = p.points[1].gap;
    assert!((g.mean - (-1.0f64).exp()).abs() <= 3.0 * g.stderr + 0.01, "{g:?}");
    assert!(p.discontinuous);
}

#[test]
fn chain_marginals_match_oracle() {
    let q = QMatrixSpec::constant(&[vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 2.0], vec![0.0, 1.5, 0.0]]).unwrap();
    let entries = chain_marginal_check(&q, 2, 0.7, 20_000, 11).unwrap();
    assert_eq!(entries.len(), 3);
    assert!((entries.iter().map(|e| e.oracle).sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(entries.iter().filter(|e| e.within).count() >= 2);
}

#[test]
fn truncation_agreement_and_exit_bound() {
    let m = zoo("birth_death_switch", &Params::new()).unwrap();
    let cfg = SimConfig::new(2.0, 0.01, 12);
    for r in 0..20 {
        assert!(truncation_consistency(&m, &[0.5], 1, 4, &cfg, r).unwrap());
    }
    let rep = truncation_exit_check(&m, &[0.5], 1, 4, 1.0, 2000, &cfg, DEFAULT_BDG_CONSTANT).unwrap();
    assert!(rep.pass);
}

#[test]
fn lemma21_sweep_is_reproducible() {
    let a = lemma21_sweep(5, 50).unwrap();
    let b = lemma21_sweep(5, 50).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.pass));
}

#[test]
fn coherent_lower_rows_exceed_displacement_bound() {
    // Every entry of rows 1..i-1 grows with slope c_q while row i is
    // constant: row i's block slides by (2i - 3) c_q r and the distance is
    // 4 (2i - 3) c_q r for p = 1, beyond the (4i + 2) c_q r bound once i >= 4.
    let (cq, i) = (0.5, 6usize);
    let rates = move |x: &[f64], from: usize, _to: usize| if from < i { 1.0 + cq * x[0] } else { 1.0 };
    let q = QMatrixSpec::new(Arc::new(rates), 1, Some(10)).unwrap().with_lipschitz(cq);
    let r = 1e-3;
    let rep = lemma21_case(&q, &[0.5], &[0.5 + r], i, 1.0).unwrap();
    let expected = 4.0 * (2.0 * i as f64 - 3.0) * cq * r;
    assert!((rep.lhs.mean - expected).abs() < 1e-12);
    assert!((rep.rhs - (4.0 * i as f64 + 2.0) * cq * r).abs() < 1e-15);
    assert!(!rep.pass);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let m = zoo("switching_ou", &Params::new()).unwrap();
    let f = TestFunction::gaussian_bump(1.0, vec![0.0], vec![1.0, 0.5]);
    let cfg = SimConfig::new(1.0, 0.01, 21);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| semigroup_estimate(&m, &f, 1.0, &[0.1], 1, 3000, &cfg).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn report_lines_are_flat_json() {
    let r = BoundReport::upper("moments", "m", report_params([("T", 1.0.into())]), McEstimate::exact(1.0), 2.0);
    let line = r.json_line();
    let back: ReportRecord = serde_json::from_str(&line).unwrap();
    assert_eq!(back, r.record());
    assert!(line.starts_with("{\"checker\":\"moments\",\"model\":\"m\",\"params\":{\"T\":1.0}"));
}
