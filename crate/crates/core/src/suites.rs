//! Randomized verification sweeps, one per checked statement.
//!
//! Every sweep is a pure function of its seed. Each returns its report
//! records as JSON lines so that two runs can be compared byte for byte.

use serde_json::json;

use crate::engine::{coupled_simulate, RecordMode, SchemeKind, SimConfig};
use crate::error::SimError;
use crate::estimators::{
    chain_marginal_check, feller_modulus, first_jump_estimate, harnack_check, holding_time_check, lemma21_sweep_case,
    moment_bound_check, semigroup_estimate, truncation_consistency, truncation_exit_check, Anchor, TestFunction,
    DEFAULT_BDG_CONSTANT, DEFAULT_POSITIVITY_FLOOR,
};
use crate::models::{params, zoo, ModelSpec, Params};
use crate::noise::{derive_seed, Draws, Lane, NoiseStream};
use crate::regime_graph::QMatrixSpec;
use crate::Regime;

/// Outcome of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub records: Vec<String>,
}

impl SuiteResult {
    /// All records, newline-terminated.
    pub fn report_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.records {
            out.extend_from_slice(r.as_bytes());
            out.push(b'\n');
        }
        out
    }
}

fn case_draws(seed: u64, case: u64) -> Draws {
    NoiseStream::new(seed).draws(Lane::Sampling, case, 0)
}

fn uniform(d: &mut Draws, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * d.uniform()
}

fn pick(d: &mut Draws, n: usize) -> usize {
    ((d.uniform() * n as f64) as usize).min(n - 1)
}

/// A zoo model with randomized parameters.
fn random_zoo_model(d: &mut Draws) -> Result<ModelSpec, SimError> {
    let m = match pick(d, 4) {
        0 => {
            let dim = 1 + pick(d, 2);
            zoo(
                "switching_ou",
                &params([
                    ("dim", dim.into()),
                    ("beta", json!([uniform(d, -0.5, 2.0), uniform(d, -0.5, 2.0), uniform(d, 0.0, 2.0)])),
                    ("a", json!([uniform(d, -1.0, 1.0), 0.0, uniform(d, -1.0, 1.0)])),
                    ("s", json!([uniform(d, 0.3, 1.5), uniform(d, 0.3, 1.5), 1.0])),
                ]),
            )
        }
        1 => zoo("birth_death_switch", &params([("up", uniform(d, 0.2, 1.5).into()), ("down", uniform(d, 0.2, 1.5).into())])),
        2 => zoo("degenerate_regime", &params([("rate12", uniform(d, 0.2, 2.0).into()), ("rate21", uniform(d, 0.2, 2.0).into())])),
        _ => zoo(
            "nonlipschitz_log",
            &params([("k", uniform(d, 0.2, 2.0).into()), ("r_amp", uniform(d, 0.0, 1.0).into())]),
        ),
    }?;
    Ok(m)
}

fn random_point(d: &mut Draws, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim).map(|_| uniform(d, -half_width, half_width)).collect()
}

fn random_regime(d: &mut Draws, m: &ModelSpec) -> Regime {
    1 + pick(d, m.q.n_states.unwrap_or(3).min(3))
}

/// A bounded test function from one of three families.
fn random_test_function(d: &mut Draws, dim: usize, positive: bool) -> TestFunction {
    match pick(d, if positive { 2 } else { 3 }) {
        0 => {
            let a = uniform(d, 0.2, 2.0);
            let c = random_point(d, dim, 1.0);
            let w = vec![uniform(d, 0.2, 1.0), uniform(d, 0.2, 1.0), uniform(d, 0.2, 1.0)];
            TestFunction::gaussian_bump(a, c, w)
        }
        1 => {
            let s = uniform(d, 0.5, 3.0);
            let v = random_point(d, dim, 1.0);
            let w = vec![uniform(d, 1.2, 2.0), uniform(d, 1.2, 2.0), uniform(d, 1.2, 2.0)];
            TestFunction::tanh_ridge(s, v, w)
        }
        _ => TestFunction::positive_first_coordinate(),
    }
}

/// Jump-function distance against its Lipschitz bound on random
/// sinusoidal chains. Exact arithmetic: no failure is tolerated.
pub fn lemma21_suite(seed: u64, cases: usize) -> Result<SuiteResult, SimError> {
    let mut records = Vec::with_capacity(cases);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for c in 0..cases as u64 {
        let r = lemma21_sweep_case(seed, c)?;
        failures += usize::from(!r.pass);
        worst = worst.min(r.margin / r.rhs.max(1e-300));
        records.push(r.json_line());
    }
    Ok(SuiteResult {
        name: "lemma21",
        pass: failures == 0,
        summary: format!("{cases} cases, {failures} failures, smallest relative margin {worst:.3}"),
        records,
    })
}

/// A random banded chain of the given size with constant rates.
pub fn random_constant_chain(d: &mut Draws, n: usize) -> Result<QMatrixSpec, SimError> {
    let kappa = 1 + pick(d, 2);
    let table: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j || i.abs_diff(j) > kappa || d.uniform() < 0.15 {
                        0.0
                    } else {
                        uniform(d, 0.2, 2.0)
                    }
                })
                .collect()
        })
        .collect();
    Ok(QMatrixSpec::constant(&table)?)
}

/// Empirical chain marginals against uniformization for every start state.
/// Passes when at least 99% of entries lie within three standard errors.
pub fn chain_marginal_suite(seed: u64, sizes: &[usize], times: &[f64], n: usize) -> Result<SuiteResult, SimError> {
    let mut records = Vec::new();
    let (mut total, mut inside) = (0usize, 0usize);
    for (c, &size) in sizes.iter().enumerate() {
        let q = random_constant_chain(&mut case_draws(seed, c as u64), size)?;
        for i in 1..=size {
            for (k, &t) in times.iter().enumerate() {
                let run_seed = derive_seed(seed, ((c * 100 + i) * 10 + k) as u64);
                let entries = chain_marginal_check(&q, i, t, n, run_seed)?;
                total += entries.len();
                inside += entries.iter().filter(|e| e.within).count();
                records.push(json!({"checker": "chain_marginal", "chain": c, "size": size, "entries": entries}).to_string());
            }
        }
    }
    let share = inside as f64 / total as f64;
    Ok(SuiteResult {
        name: "chain_marginal",
        pass: share >= 0.99,
        summary: format!("{inside}/{total} entries within 3 standard errors ({:.2}%)", 100.0 * share),
        records,
    })
}

/// Shared-noise paths from identical data must coincide bit for bit and
/// never separate.
pub fn pathwise_uniqueness_suite(seed: u64, cases: usize) -> Result<SuiteResult, SimError> {
    let mut records = Vec::with_capacity(cases);
    let mut failures = 0;
    for c in 0..cases as u64 {
        let mut d = case_draws(seed, c);
        let m = random_zoo_model(&mut d)?;
        let x = random_point(&mut d, m.dim, 2.0);
        let i = random_regime(&mut d, &m);
        let cfg = SimConfig::new(1.0, 0.01, derive_seed(seed, c)).with_record(RecordMode::Full);
        let p = coupled_simulate(&m, (&x, i), (&x, i), &cfg, &NoiseStream::new(cfg.seed), 0)?;
        let same = p.first.bitwise_eq(&p.second) && p.zeta.is_none();
        failures += usize::from(!same);
        records.push(
            json!({"checker": "pathwise", "case": c, "model": m.id, "identical": same, "jumps": p.first.jumps.len(), "zeta": p.zeta})
                .to_string(),
        );
    }
    Ok(SuiteResult {
        name: "pathwise_uniqueness",
        pass: failures == 0,
        summary: format!("{cases} coupled pairs, {failures} differing"),
        records,
    })
}

/// Truncated vs original paths under shared noise, then the exit
/// probability against its Chebyshev bound.
pub fn truncation_suite(seed: u64, cases: usize, n: usize, dt: f64) -> Result<SuiteResult, SimError> {
    let mut records = Vec::new();
    let (mut mismatches, mut bound_failures) = (0, 0);
    let mut exits = 0;
    for c in 0..cases as u64 {
        let mut d = case_draws(seed, 1000 + c);
        let m = random_zoo_model(&mut d)?;
        let k = 3 + pick(&mut d, 4);
        let x = random_point(&mut d, m.dim, 0.8 / (m.dim as f64).sqrt());
        let i = 1 + pick(&mut d, 2.min(k - 2));
        let cfg = SimConfig::new(2.0, 0.01, derive_seed(seed, 1000 + c));
        let ok = truncation_consistency(&m, &x, i, k, &cfg, 0)?;
        mismatches += usize::from(!ok);
        let probe = crate::engine::simulate_truncated(&m, &x, i, k, &cfg, &NoiseStream::new(cfg.seed), 0)?;
        exits += usize::from(probe.tau.is_some());
        records.push(json!({"checker": "truncation_paths", "case": c, "model": m.id, "K": k, "agree": ok, "tau": probe.tau}).to_string());
    }
    let probes: [(&str, Params, usize, f64); 4] = [
        ("birth_death_switch", Params::new(), 4, 0.5),
        ("birth_death_switch", Params::new(), 4, 1.0),
        ("switching_ou", Params::new(), 3, 1.0),
        ("nonlipschitz_log", Params::new(), 3, 1.0),
    ];
    for (name, p, k, t) in probes {
        let m = zoo(name, &p)?;
        let x = vec![0.5; m.dim];
        let cfg = SimConfig::new(t, dt, derive_seed(seed, 7));
        let r = truncation_exit_check(&m, &x, 1, k, t, n, &cfg, DEFAULT_BDG_CONSTANT)?;
        bound_failures += usize::from(!r.pass);
        records.push(r.json_line());
    }
    Ok(SuiteResult {
        name: "truncation",
        pass: mismatches == 0 && bound_failures == 0,
        summary: format!("{cases} path pairs ({exits} exiting), {mismatches} mismatches; {bound_failures} exit-bound failures"),
        records,
    })
}

/// The second-moment bound on every zoo model at each horizon.
pub fn moment_suite(seed: u64, horizons: &[f64], n: usize, dt: f64) -> Result<SuiteResult, SimError> {
    let mut records = Vec::new();
    let mut failures = 0;
    let mut smallest = f64::INFINITY;
    for name in crate::models::zoo_names() {
        let m = zoo(name, &Params::new())?;
        let x = vec![0.5; m.dim];
        for &t in horizons {
            let cfg = SimConfig::new(t, dt, derive_seed(seed, 17));
            let r = moment_bound_check(&m, &x, 1, t, n, &cfg, DEFAULT_BDG_CONSTANT)?;
            failures += usize::from(!r.pass);
            smallest = smallest.min(r.margin);
            records.push(r.json_line());
        }
    }
    Ok(SuiteResult {
        name: "moments",
        pass: failures == 0,
        summary: format!("{} reports, {failures} failures, smallest margin {smallest:.4e}", records.len()),
        records,
    })
}

/// Holding-time lower bounds for every `k <= K` on the birth-death model
/// and, with state-dependent rates, on the log-Lipschitz model.
pub fn holding_suite(seed: u64, levels: &[usize], grid: &[f64], n: usize, dt: f64) -> Result<SuiteResult, SimError> {
    let mut records = Vec::new();
    let mut failures = 0;
    for name in ["birth_death_switch", "nonlipschitz_log"] {
        let m = zoo(name, &Params::new())?;
        let top = m.q.n_states.unwrap_or(usize::MAX);
        for &level in levels {
            for k in 1..=level.min(top) {
                let cfg = SimConfig::new(1.0, dt, derive_seed(seed, k as u64));
                for r in holding_time_check(&m, &[0.5], k, level, grid, n, &cfg)? {
                    failures += usize::from(!r.pass);
                    records.push(r.json_line());
                }
            }
        }
    }
    Ok(SuiteResult {
        name: "holding",
        pass: failures == 0,
        summary: format!("{} grid points, {failures} failures", records.len()),
        records,
    })
}

/// Log-Harnack inequality on random `(x, y, T, f)` for the switching OU
/// model. Passes when at least 99% of cases pass and every failure is
/// within four standard errors.
pub fn harnack_suite(seed: u64, cases: usize, n: usize, dt: f64) -> Result<SuiteResult, SimError> {
    let mut records = Vec::with_capacity(cases);
    let (mut passed, mut hard) = (0, 0);
    for c in 0..cases as u64 {
        let mut d = case_draws(seed, 2000 + c);
        let dim = 1 + pick(&mut d, 2);
        let m = zoo("switching_ou", &params([("dim", dim.into())]))?;
        let x = random_point(&mut d, dim, 2.0);
        let dir = random_point(&mut d, dim, 1.0);
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
        let r = uniform(&mut d, 0.0, 1.5);
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, v)| a + r * v / len).collect();
        let i = 1 + pick(&mut d, 2);
        let t = uniform(&mut d, 0.25, 1.0);
        let f = random_test_function(&mut d, dim, true);
        let cfg = SimConfig::new(t, dt, derive_seed(seed, 2000 + c)).with_scheme(SchemeKind::EventDrivenExact);
        let rep = harnack_check(&m, &f, &x, &y, i, t, n, &cfg, DEFAULT_POSITIVITY_FLOOR)?;
        passed += usize::from(rep.pass);
        hard += usize::from(!rep.pass && !rep.statistical);
        records.push(rep.json_line());
    }
    let rate = passed as f64 / cases as f64;
    Ok(SuiteResult {
        name: "harnack",
        pass: rate >= 0.99 && hard == 0,
        summary: format!("{passed}/{cases} pass ({:.1}%), {hard} failures beyond 4 standard errors", 100.0 * rate),
        records,
    })
}

/// Shared-noise gap probes: vanishing on the elliptic model, a plateau at
/// `e^{-t}` on the model whose first regime has no noise.
pub fn feller_suite(seed: u64, n: usize, dt: f64) -> Result<SuiteResult, SimError> {
    let f = TestFunction::positive_first_coordinate();
    let t = 1.0;
    let ou = zoo("switching_ou", &Params::new())?;
    let cfg = SimConfig::new(t, dt, derive_seed(seed, 31));
    let smooth = feller_modulus(&ou, &f, t, &[0.0], 1, &[0.1, 0.01, 1e-3], n, &cfg, Anchor::Offset)?;
    let deg = zoo("degenerate_regime", &Params::new())?;
    let cfg = cfg.with_scheme(SchemeKind::EventDrivenExact);
    let rough = feller_modulus(&deg, &f, t, &[0.0], 1, &[0.1, 0.01, 1e-3], n, &cfg, Anchor::Straddle)?;
    let a = smooth.points.last().expect("radii").gap;
    let b = rough.points.last().expect("radii").gap;
    let plateau = (-t).exp();
    let smooth_ok = a.mean < 0.02;
    let rough_ok = (b.mean - plateau).abs() <= 3.0 * b.stderr + 0.01 && rough.discontinuous;
    let records = vec![
        json!({"checker": "feller", "probe": smooth}).to_string(),
        json!({"checker": "feller", "probe": rough}).to_string(),
    ];
    Ok(SuiteResult {
        name: "feller",
        pass: smooth_ok && rough_ok,
        summary: format!(
            "elliptic gap {:.4} (< 0.02: {smooth_ok}); degenerate gap {:.4} +- {:.4} vs {plateau:.4}, witness {}",
            a.mean, b.mean, b.stderr, rough.discontinuous
        ),
        records,
    })
}

/// First-jump decomposition against the direct estimate on random
/// state-independent cases. A case fails hard beyond four combined
/// standard errors.
pub fn first_jump_suite(seed: u64, cases: usize, n: usize, dt: f64) -> Result<SuiteResult, SimError> {
    let mut records = Vec::with_capacity(cases);
    let (mut within, mut hard) = (0, 0);
    for c in 0..cases as u64 {
        let mut d = case_draws(seed, 3000 + c);
        let m = loop {
            let m = random_zoo_model(&mut d)?;
            if m.q.state_independent {
                break m;
            }
        };
        let f = random_test_function(&mut d, m.dim, false);
        let t = uniform(&mut d, 0.25, 1.0);
        let x = random_point(&mut d, m.dim, 1.0);
        let i = random_regime(&mut d, &m);
        let cfg = SimConfig::new(t, dt, derive_seed(seed, 3000 + c)).with_scheme(SchemeKind::EventDrivenExact);
        let a = first_jump_estimate(&m, &f, t, &x, i, n, &cfg)?;
        let b = semigroup_estimate(&m, &f, t, &x, i, n, &cfg)?;
        let se = a.combined_stderr(&b);
        let diff = (a.mean - b.mean).abs();
        within += usize::from(diff <= 3.0 * se);
        hard += usize::from(diff > 4.0 * se);
        records.push(
            json!({"checker": "first_jump", "case": c, "model": m.id, "f": f.label, "t": t, "x": x, "i": i,
                   "first_jump": a, "direct": b, "within_3se": diff <= 3.0 * se})
            .to_string(),
        );
    }
    Ok(SuiteResult {
        name: "first_jump",
        pass: hard == 0,
        summary: format!("{within}/{cases} within 3 combined standard errors, {hard} beyond 4"),
        records,
    })
}
