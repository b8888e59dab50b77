//! Sampled falsification of the regularity conditions.
//!
//! Every check evaluates the condition on a finite plan of points, pairs,
//! times and regimes. A pass means no counterexample was found on the plan,
//! nothing more.

use serde::Serialize;

use super::spec::ModelSpec;
use super::uclass::UClass;
use crate::noise::{Lane, NoiseStream};
use crate::regime_graph::norm;
use crate::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// `q_ij = 0` for `|j - i| > kappa`.
    Banded,
    /// Rates finite and nonnegative.
    NonnegativeRates,
    /// Rates constant in `x` when declared state independent.
    StateIndependent,
    /// `|q_ij(x) - q_ij(y)| <= c_q |x - y|`.
    LipschitzRates,
    /// `<x, b> <= c(t)(1 + |x|^2)` and `|sigma|^2 <= c(t)(1 + |x|^2)`.
    LinearGrowth,
    /// `q_i(x) <= alpha i + beta |x|`.
    LinearRateBound,
    /// `sup_x q_i(x) <= alpha i`.
    UniformRateBound,
    /// `<x-y, b(x)-b(y)> + |sigma(x)-sigma(y)|^2 / 2 <= C_i |x-y|^2 u(|x-y|^2)`.
    OneSidedModulus,
    /// `|sigma(x)-sigma(y)|^2 <= C~_i |x-y|^2 u~(|x-y|)^2`.
    DiffusionModulus,
    /// `u' <= 0` for the drift modulus.
    NonIncreasingModulus,
    /// `|sigma y| >= lambda(t) |y|`.
    Ellipticity,
    /// `sup_i |b(t,0,i)| + |sigma(t,0,i)| < inf`.
    BoundedAtOrigin,
    /// `0 < inf_i C_i(t) <= sup_i C_i(t) < inf`.
    ModulusConstantsBounded,
    /// `phi(s) <= gamma s u(s)^2`.
    PhiDomination,
    /// `u` and `u~` belong to the admissible class.
    UClassMembership,
}

impl Assumption {
    pub const ALL: [Assumption; 15] = [
        Assumption::Banded,
        Assumption::NonnegativeRates,
        Assumption::StateIndependent,
        Assumption::LipschitzRates,
        Assumption::LinearGrowth,
        Assumption::LinearRateBound,
        Assumption::UniformRateBound,
        Assumption::OneSidedModulus,
        Assumption::DiffusionModulus,
        Assumption::NonIncreasingModulus,
        Assumption::Ellipticity,
        Assumption::BoundedAtOrigin,
        Assumption::ModulusConstantsBounded,
        Assumption::PhiDomination,
        Assumption::UClassMembership,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Assumption::Banded => "banded",
            Assumption::NonnegativeRates => "nonnegative_rates",
            Assumption::StateIndependent => "state_independent",
            Assumption::LipschitzRates => "lipschitz_rates",
            Assumption::LinearGrowth => "linear_growth",
            Assumption::LinearRateBound => "linear_rate_bound",
            Assumption::UniformRateBound => "uniform_rate_bound",
            Assumption::OneSidedModulus => "one_sided_modulus",
            Assumption::DiffusionModulus => "diffusion_modulus",
            Assumption::NonIncreasingModulus => "non_increasing_modulus",
            Assumption::Ellipticity => "ellipticity",
            Assumption::BoundedAtOrigin => "bounded_at_origin",
            Assumption::ModulusConstantsBounded => "modulus_constants_bounded",
            Assumption::PhiDomination => "phi_domination",
            Assumption::UClassMembership => "u_class_membership",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable, or the metadata needed to state it is missing.
    Skipped,
}

/// The first sampled counterexample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub regime: Option<Regime>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub status: CheckStatus,
    /// Largest sampled excess of the left side over the right side.
    pub max_violation: f64,
    pub samples: usize,
    pub witness: Option<Witness>,
    /// Regimes in which at least one violation was sampled.
    pub failing_regimes: Vec<Regime>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub model: String,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }

    pub fn passes(&self, a: Assumption) -> bool {
        self.get(a).is_some_and(|c| c.status == CheckStatus::Pass)
    }

    /// Advertised assumptions that were falsified.
    pub fn advertised_failures<'a>(&'a self, spec: &'a ModelSpec) -> impl Iterator<Item = &'a AssumptionCheck> {
        self.checks
            .iter()
            .filter(move |c| spec.advertised.contains(&c.assumption) && c.status != CheckStatus::Pass)
    }
}

/// Where the checkers look.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub pairs: usize,
    pub radius: f64,
    pub times: Vec<f64>,
    pub max_regime: Regime,
    /// Fraction of pairs drawn at log-uniform separation in `[1e-8, 1]`.
    pub close_fraction: f64,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn with_horizon(horizon: f64) -> Self {
        Self { times: vec![0.0, 0.5 * horizon, horizon], ..Self::default() }
    }
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            pairs: 10_000,
            radius: 10.0,
            times: vec![0.0, 0.5, 1.0],
            max_regime: 20,
            close_fraction: 0.5,
            seed: 0x5EED_A551_0000_0001,
        }
    }
}

struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn draw_samples(plan: &SamplingPlan, dim: usize) -> Vec<Sample> {
    let noise = NoiseStream::new(plan.seed);
    let close = (plan.pairs as f64 * plan.close_fraction).round() as usize;
    (0..plan.pairs)
        .map(|k| {
            let mut d = noise.draws(Lane::Sampling, dim as u64, k as u64);
            let ball = |d: &mut crate::noise::Draws| {
                let mut v = vec![0.0; dim];
                d.fill_normal(&mut v, 1.0);
                let n = norm(&v).max(1e-300);
                let r = plan.radius * d.uniform().powf(1.0 / dim as f64);
                v.iter_mut().for_each(|c| *c *= r / n);
                v
            };
            let x = ball(&mut d);
            let y = if k < close {
                let mut dir = vec![0.0; dim];
                d.fill_normal(&mut dir, 1.0);
                let n = norm(&dir).max(1e-300);
                let r = 10f64.powf(-8.0 * d.uniform());
                x.iter().zip(&dir).map(|(a, b)| a + r * b / n).collect()
            } else {
                ball(&mut d)
            };
            Sample { x, y }
        })
        .collect()
}

/// Accumulates a single check.
struct Tally {
    assumption: Assumption,
    max_violation: f64,
    samples: usize,
    witness: Option<Witness>,
    failing: Vec<Regime>,
    note: String,
}

impl Tally {
    fn new(assumption: Assumption) -> Self {
        Self {
            assumption,
            max_violation: f64::NEG_INFINITY,
            samples: 0,
            witness: None,
            failing: Vec::new(),
            note: String::new(),
        }
    }

    /// Record `lhs - rhs`; a violation is any excess beyond a relative slack.
    fn observe(&mut self, excess: f64, scale: f64, witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        let excess = if excess.is_nan() { f64::INFINITY } else { excess };
        if excess > self.max_violation {
            self.max_violation = excess;
        }
        if excess > 1e-9 * scale.abs().max(1.0) {
            let w = witness();
            if let Some(r) = w.regime {
                if !self.failing.contains(&r) {
                    self.failing.push(r);
                }
            }
            if self.witness.is_none() {
                self.witness = Some(w);
            }
        }
    }

    fn finish(mut self) -> AssumptionCheck {
        self.failing.sort_unstable();
        let status = if self.witness.is_some() { CheckStatus::Fail } else { CheckStatus::Pass };
        AssumptionCheck {
            assumption: self.assumption,
            status,
            max_violation: self.max_violation.max(0.0),
            samples: self.samples,
            witness: self.witness,
            failing_regimes: self.failing,
            note: self.note,
        }
    }

    fn skipped(assumption: Assumption, note: &str) -> AssumptionCheck {
        AssumptionCheck {
            assumption,
            status: CheckStatus::Skipped,
            max_violation: 0.0,
            samples: 0,
            witness: None,
            failing_regimes: Vec::new(),
            note: note.into(),
        }
    }
}

fn witness(t: f64, x: &[f64], y: Option<&[f64]>, regime: Option<Regime>, detail: String) -> Witness {
    Witness { t, x: x.to_vec(), y: y.map(<[f64]>::to_vec), regime, detail }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn frobenius_sq(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

fn mat_vec(a: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|r| dot(&a[r * d..(r + 1) * d], v)).collect()
}

fn regimes(spec: &ModelSpec, plan: &SamplingPlan) -> Vec<Regime> {
    let top = spec.q.n_states.map_or(plan.max_regime, |n| n.min(plan.max_regime));
    (1..=top).collect()
}

fn log_grid() -> impl Iterator<Item = f64> {
    (-120..=60).map(|k| 10f64.powf(k as f64 / 10.0))
}

/// Run every check on `plan`.
pub fn check_assumptions(spec: &ModelSpec, plan: &SamplingPlan) -> AssumptionReport {
    let samples = draw_samples(plan, spec.dim);
    let regs = regimes(spec, plan);
    let checks = Assumption::ALL
        .iter()
        .map(|&a| run_check(a, spec, plan, &samples, &regs))
        .collect();
    AssumptionReport { model: spec.id.clone(), checks }
}

/// Run a single check on `plan`.
pub fn check_one(a: Assumption, spec: &ModelSpec, plan: &SamplingPlan) -> AssumptionCheck {
    let samples = draw_samples(plan, spec.dim);
    let regs = regimes(spec, plan);
    run_check(a, spec, plan, &samples, &regs)
}

fn run_check(a: Assumption, spec: &ModelSpec, plan: &SamplingPlan, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    match a {
        Assumption::Banded => banded(spec, samples, regs),
        Assumption::NonnegativeRates => nonnegative(spec, samples, regs),
        Assumption::StateIndependent => state_independent(spec, samples, regs),
        Assumption::LipschitzRates => lipschitz(spec, samples, regs),
        Assumption::LinearGrowth => linear_growth(spec, plan, samples, regs),
        Assumption::LinearRateBound => rate_bound(spec, samples, regs, true),
        Assumption::UniformRateBound => rate_bound(spec, samples, regs, false),
        Assumption::OneSidedModulus => one_sided(spec, plan, samples, regs),
        Assumption::DiffusionModulus => diffusion_modulus(spec, plan, samples, regs),
        Assumption::NonIncreasingModulus => non_increasing(spec),
        Assumption::Ellipticity => ellipticity(spec, plan, samples, regs),
        Assumption::BoundedAtOrigin => bounded_at_origin(spec, plan, regs),
        Assumption::ModulusConstantsBounded => constants_bounded(spec, plan, regs),
        Assumption::PhiDomination => phi_domination(spec),
        Assumption::UClassMembership => membership(spec),
    }
}

fn banded(spec: &ModelSpec, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let q = &spec.q;
    let mut t = Tally::new(Assumption::Banded);
    for s in samples.iter().take(200) {
        for &i in regs {
            let reach = i + 2 * q.bandwidth + 1;
            for j in (1..=reach).filter(|&j| j.abs_diff(i) > q.bandwidth) {
                let r = q.rate(&s.x, i, j);
                t.observe(r.abs(), 1.0, || witness(0.0, &s.x, None, Some(i), format!("q_{i}{j} = {r}")));
            }
        }
    }
    t.finish()
}

fn nonnegative(spec: &ModelSpec, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let mut t = Tally::new(Assumption::NonnegativeRates);
    for s in samples {
        for &i in regs {
            match spec.q.row(&s.x, i) {
                Ok(row) => {
                    for (j, r) in row {
                        t.observe(-r, 1.0, || witness(0.0, &s.x, None, Some(i), format!("q_{i}{j} = {r}")));
                    }
                }
                Err(e) => t.observe(f64::INFINITY, 1.0, || witness(0.0, &s.x, None, Some(i), e.to_string())),
            }
        }
    }
    t.finish()
}

fn state_independent(spec: &ModelSpec, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    if !spec.q.state_independent {
        return Tally::skipped(Assumption::StateIndependent, "rates declared state dependent");
    }
    let q = &spec.q;
    let origin = vec![0.0; spec.dim];
    let mut t = Tally::new(Assumption::StateIndependent);
    for s in samples {
        for &i in regs {
            for j in q.band(i) {
                let (a, b) = (q.rate(&s.x, i, j), q.rate(&origin, i, j));
                t.observe((a - b).abs(), b, || {
                    witness(0.0, &s.x, None, Some(i), format!("q_{i}{j}: {a} here, {b} at the origin"))
                });
            }
        }
    }
    t.finish()
}

fn lipschitz(spec: &ModelSpec, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let q = &spec.q;
    let cq = q.lipschitz_cq;
    let mut t = Tally::new(Assumption::LipschitzRates);
    for s in samples {
        let dist: f64 = norm(&s.x.iter().zip(&s.y).map(|(a, b)| a - b).collect::<Vec<_>>());
        for &i in regs {
            for j in q.band(i) {
                let (a, b) = (q.rate(&s.x, i, j), q.rate(&s.y, i, j));
                let excess = (a - b).abs() - cq * dist;
                t.observe(excess, a.abs().max(b.abs()), || {
                    witness(0.0, &s.x, Some(&s.y), Some(i), format!("|q_{i}{j}(x) - q_{i}{j}(y)| = {}", (a - b).abs()))
                });
            }
        }
    }
    t.finish()
}

fn linear_growth(spec: &ModelSpec, plan: &SamplingPlan, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let Some(c) = &spec.growth else {
        return Tally::skipped(Assumption::LinearGrowth, "no growth envelope");
    };
    let mut t = Tally::new(Assumption::LinearGrowth);
    for &time in &plan.times {
        let ct = c(time);
        for s in samples {
            let r2 = 1.0 + dot(&s.x, &s.x);
            for &i in regs {
                let b = spec.drift(time, &s.x, i);
                let sig = spec.diffusion(time, &s.x, i);
                let (lhs_b, lhs_s) = (dot(&s.x, &b), frobenius_sq(&sig));
                t.observe(lhs_b - ct * r2, ct * r2, || {
                    witness(time, &s.x, None, Some(i), format!("<x,b> = {lhs_b} > {}", ct * r2))
                });
                t.observe(lhs_s - ct * r2, ct * r2, || {
                    witness(time, &s.x, None, Some(i), format!("|sigma|^2 = {lhs_s} > {}", ct * r2))
                });
            }
        }
    }
    t.finish()
}

fn rate_bound(spec: &ModelSpec, samples: &[Sample], regs: &[Regime], with_beta: bool) -> AssumptionCheck {
    let q = &spec.q;
    let (alpha, beta) = (q.linear_bound_alpha, if with_beta { q.linear_bound_beta } else { 0.0 });
    let a = if with_beta { Assumption::LinearRateBound } else { Assumption::UniformRateBound };
    let mut t = Tally::new(a);
    for s in samples {
        let nx = norm(&s.x);
        for &i in regs {
            let qi = q.exit_rate(&s.x, i);
            let bound = alpha * i as f64 + beta * nx;
            t.observe(qi - bound, bound, || witness(0.0, &s.x, None, Some(i), format!("q_{i} = {qi} > {bound}")));
        }
    }
    t.finish()
}

fn modulus_pair(spec: &ModelSpec, time: f64, s: &Sample, i: Regime) -> (f64, f64, f64) {
    let bx = spec.drift(time, &s.x, i);
    let by = spec.drift(time, &s.y, i);
    let sx = spec.diffusion(time, &s.x, i);
    let sy = spec.diffusion(time, &s.y, i);
    let dx: Vec<f64> = s.x.iter().zip(&s.y).map(|(a, b)| a - b).collect();
    let db: Vec<f64> = bx.iter().zip(&by).map(|(a, b)| a - b).collect();
    let ds: f64 = sx.iter().zip(&sy).map(|(a, b)| (a - b) * (a - b)).sum();
    (dot(&dx, &dx), dot(&dx, &db), ds)
}

fn one_sided(spec: &ModelSpec, plan: &SamplingPlan, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let (Some(c), Ok(u)) = (&spec.modulus, spec.u()) else {
        return Tally::skipped(Assumption::OneSidedModulus, "no modulus constants or unknown u");
    };
    let mut t = Tally::new(Assumption::OneSidedModulus);
    for &time in &plan.times {
        for s in samples {
            for &i in regs {
                let (r2, inner, ds) = modulus_pair(spec, time, s, i);
                if r2 == 0.0 {
                    continue;
                }
                let lhs = inner + 0.5 * ds;
                let rhs = c(time, i) * r2 * u.u(r2);
                t.observe(lhs - rhs, rhs, || {
                    witness(time, &s.x, Some(&s.y), Some(i), format!("lhs {lhs} > rhs {rhs}"))
                });
            }
        }
    }
    t.finish()
}

fn diffusion_modulus(spec: &ModelSpec, plan: &SamplingPlan, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let (Some(c), Ok(u)) = (&spec.diffusion_modulus, spec.u_tilde()) else {
        return Tally::skipped(Assumption::DiffusionModulus, "no diffusion modulus constants or unknown u~");
    };
    let mut t = Tally::new(Assumption::DiffusionModulus);
    for &time in &plan.times {
        for s in samples {
            for &i in regs {
                let (r2, _, ds) = modulus_pair(spec, time, s, i);
                if r2 == 0.0 {
                    continue;
                }
                let rhs = c(time, i) * r2 * u.u(r2.sqrt()).powi(2);
                t.observe(ds - rhs, rhs, || {
                    witness(time, &s.x, Some(&s.y), Some(i), format!("|dsigma|^2 {ds} > {rhs}"))
                });
            }
        }
    }
    t.finish()
}

fn non_increasing(spec: &ModelSpec) -> AssumptionCheck {
    let Ok(u) = spec.u() else {
        return Tally::skipped(Assumption::NonIncreasingModulus, "unknown u");
    };
    let mut t = Tally::new(Assumption::NonIncreasingModulus);
    if !u.non_increasing() {
        let detail = format!("`{}` is not declared non-increasing", u.id());
        t.observe(f64::INFINITY, 1.0, || witness(0.0, &[], None, None, detail));
    }
    for s in log_grid() {
        let d = u.derivative(s);
        t.observe(d, u.u(s), || witness(0.0, &[s], None, None, format!("u'({s}) = {d}")));
    }
    t.finish()
}

fn ellipticity(spec: &ModelSpec, plan: &SamplingPlan, samples: &[Sample], regs: &[Regime]) -> AssumptionCheck {
    let mut t = Tally::new(Assumption::Ellipticity);
    let mut inf = f64::INFINITY;
    for &time in &plan.times {
        let lambda = spec.ellipticity.as_ref().map(|l| l(time));
        for s in samples.iter().take(2_000) {
            // The far half of each pair doubles as a direction.
            let ny = norm(&s.y);
            if ny == 0.0 {
                continue;
            }
            for &i in regs {
                let sig = spec.diffusion(time, &s.x, i);
                let ratio = norm(&mat_vec(&sig, &s.y)) / ny;
                inf = inf.min(ratio);
                let floor = lambda.unwrap_or(0.0);
                // Without a declared lambda only a vanishing |sigma y| is a counterexample.
                let excess = if lambda.is_some() { floor - ratio } else if ratio <= 1e-12 { f64::INFINITY } else { -ratio };
                t.observe(excess, floor, || {
                    witness(time, &s.x, Some(&s.y), Some(i), format!("|sigma y| / |y| = {ratio}"))
                });
            }
        }
    }
    if spec.ellipticity.is_none() {
        t.note = format!("no lambda declared; sampled infimum {inf}");
    }
    t.finish()
}

fn bounded_at_origin(spec: &ModelSpec, plan: &SamplingPlan, regs: &[Regime]) -> AssumptionCheck {
    let origin = vec![0.0; spec.dim];
    let mut t = Tally::new(Assumption::BoundedAtOrigin);
    let mut sup: f64 = 0.0;
    for &time in &plan.times {
        for &i in regs {
            let v = norm(&spec.drift(time, &origin, i)) + frobenius_sq(&spec.diffusion(time, &origin, i)).sqrt();
            let excess = if v.is_finite() { 0.0 } else { f64::INFINITY };
            sup = sup.max(v);
            t.observe(excess, 1.0, || witness(time, &origin, None, Some(i), format!("value {v}")));
        }
    }
    t.note = format!("sampled supremum {sup}");
    t.finish()
}

fn constants_bounded(spec: &ModelSpec, plan: &SamplingPlan, regs: &[Regime]) -> AssumptionCheck {
    let Some(c) = &spec.modulus else {
        return Tally::skipped(Assumption::ModulusConstantsBounded, "no modulus constants");
    };
    let mut t = Tally::new(Assumption::ModulusConstantsBounded);
    for &time in plan.times.iter().filter(|&&s| s > 0.0) {
        let vals: Vec<f64> = regs.iter().map(|&i| c(time, i)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let excess = if lo > 0.0 && hi.is_finite() { 0.0 } else { f64::INFINITY };
        t.observe(excess, 1.0, || witness(time, &[], None, None, format!("inf {lo}, sup {hi}")));
    }
    t.finish()
}

fn phi_domination(spec: &ModelSpec) -> AssumptionCheck {
    let Ok(u) = spec.u() else {
        return Tally::skipped(Assumption::PhiDomination, "unknown u");
    };
    let gamma = u.gamma();
    let mut t = Tally::new(Assumption::PhiDomination);
    for s in log_grid() {
        let (phi, rhs) = (u.phi(s), gamma * s * u.u(s).powi(2));
        t.observe(phi - rhs, rhs, || witness(0.0, &[s], None, None, format!("phi({s}) = {phi} > {rhs}")));
    }
    t.finish()
}

/// Log-grid evidence for `int_0^1 ds/(s u(s)) = inf` and
/// `liminf_{r -> 0} (u(r) + r u'(r)) > 0`.
pub fn u_class_violation(u: &dyn UClass) -> Option<String> {
    // Decade increments of the divergent integral, by quadrature in log(1/s).
    for k in 1..=30 {
        let (a, b) = (k as f64 * std::f64::consts::LN_10, (k + 1) as f64 * std::f64::consts::LN_10);
        let inc = crate::numeric::adaptive_simpson(|v: f64| 1.0 / u.u((-v).exp()), a, b, 1e-10);
        if (k as f64) * inc < 0.1 {
            return Some(format!("integral increment over decade {k} is {inc}: looks convergent"));
        }
    }
    for k in 1..=30 {
        let r = 10f64.powi(-k);
        let v = u.u(r) + r * u.derivative(r);
        if !(v > 1e-3) {
            return Some(format!("u(r) + r u'(r) = {v} at r = {r}"));
        }
    }
    None
}

fn membership(spec: &ModelSpec) -> AssumptionCheck {
    let mut t = Tally::new(Assumption::UClassMembership);
    for id in [&spec.u_id, &spec.u_tilde_id] {
        match super::uclass::lookup(id) {
            None => t.observe(f64::INFINITY, 1.0, || witness(0.0, &[], None, None, format!("unknown u-class `{id}`"))),
            Some(u) => {
                let v = u_class_violation(&*u);
                let excess = if v.is_some() { 1.0 } else { 0.0 };
                t.observe(excess, 1.0, || witness(0.0, &[], None, None, v.clone().unwrap_or_default()));
            }
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::models::uclass::Custom;
    use crate::models::FnCoefficients;
    use crate::regime_graph::QMatrixSpec;

    fn small_plan() -> SamplingPlan {
        SamplingPlan { pairs: 500, ..SamplingPlan::default() }
    }

    #[test]
    fn zero_diffusion_fails_ellipticity() {
        let coeffs = FnCoefficients::new(|_, _, _, b| b.fill(0.0), |_, _, _, s| s.fill(0.0));
        let q = QMatrixSpec::constant(&[vec![0.0]]).unwrap();
        let m = ModelSpec::new("frozen", 2, Arc::new(coeffs), q);
        let c = check_one(Assumption::Ellipticity, &m, &small_plan());
        assert_eq!(c.status, CheckStatus::Fail);
        assert_eq!(c.failing_regimes, vec![1]);
        assert!(c.witness.is_some());
    }

    #[test]
    fn quadratic_rates_break_uniform_bound() {
        let coeffs = FnCoefficients::new(|_, _, _, b| b.fill(0.0), |_, _, _, s| s.fill(0.0));
        let rates = |_: &[f64], i: Regime, j: Regime| if j == i + 1 { (i * i) as f64 } else { 0.0 };
        let q = QMatrixSpec::new(Arc::new(rates), 1, None).unwrap().with_linear_bound(3.0, 0.0);
        let m = ModelSpec::new("quadratic", 1, Arc::new(coeffs), q);
        let c = check_one(Assumption::UniformRateBound, &m, &small_plan());
        assert_eq!(c.status, CheckStatus::Fail);
        let w = c.witness.unwrap();
        assert_eq!(w.regime, Some(4));
        assert!(c.failing_regimes.iter().all(|&i| i > 3));
    }

    #[test]
    fn summable_modulus_is_not_admissible() {
        let u = Custom { id: "sq", u: |s: f64| (1.0 + (1.0 / s).ln().max(0.0)).powi(2), gamma: 4.0, non_increasing: true };
        assert!(u_class_violation(&u).is_some());
        assert!(u_class_violation(&super::super::uclass::LogPlus).is_none());
        assert!(u_class_violation(&super::super::uclass::Constant).is_none());
    }
}
