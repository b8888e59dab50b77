use serde_json::{json, Value};
use switchdiff::estimators::{
    chain_marginal_check, feller_modulus, harnack_check, holding_time_check, moment_bound_check, truncation_consistency,
    truncation_exit_check, Anchor, TestFunction, DEFAULT_BDG_CONSTANT, DEFAULT_POSITIVITY_FLOOR,
};
use switchdiff::models::ModelSpec;
use switchdiff::noise::derive_seed;
use switchdiff::suites::lemma21_suite;

use super::{Context, Task, TaskOutput};
use crate::error::CliError;

fn start(ctx: &Context, m: &ModelSpec) -> (Vec<f64>, usize) {
    (ctx.cfg.task.x.clone().unwrap_or_else(|| vec![0.0; m.dim]), ctx.cfg.task.i.unwrap_or(1))
}

fn test_function(ctx: &Context, default: TestFunction) -> Result<TestFunction, CliError> {
    ctx.cfg.task.f.as_ref().map_or(Ok(default), |f| f.build())
}

/// Randomized sweep of the jump-function Lipschitz bound (`task.cases`, default 1000).
pub struct Lemma21;

impl Task for Lemma21 {
    fn family(&self) -> &'static str {
        "lemma21"
    }
    fn name(&self) -> &'static str {
        "lemma21"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["cases"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let r = lemma21_suite(ctx.sim.seed, ctx.cfg.task.cases.unwrap_or(1000))?;
        Ok(TaskOutput {
            records: r.records.iter().map(|l| serde_json::from_str(l).expect("own output")).collect(),
            pass: r.pass,
            summary: r.summary,
            ..TaskOutput::default()
        })
    }
}

/// Second-moment bound at each horizon in `task.times` (default `sim.horizon`).
pub struct Moments;

impl Task for Moments {
    fn family(&self) -> &'static str {
        "moments"
    }
    fn name(&self) -> &'static str {
        "moments"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["x", "i", "times", "bdg"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let (x, i) = start(ctx, &m);
        let horizons = ctx.cfg.task.times.clone().unwrap_or_else(|| vec![ctx.sim.horizon]);
        let bdg = ctx.cfg.task.bdg.unwrap_or(DEFAULT_BDG_CONSTANT);
        let reports = horizons
            .iter()
            .map(|&t| moment_bound_check(&m, &x, i, t, ctx.cfg.sim.replicas, &ctx.sim, bdg))
            .collect::<Result<Vec<_>, _>>()?;
        let worst = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        Ok(TaskOutput::from_reports(&reports, format!("{} horizons, smallest margin {worst:.4e}", reports.len())))
    }
}

/// Holding-time lower bound for each `k` in `task.regimes` and `K` in
/// `task.levels` (default `sim.k`, else 3) on the grid `task.times`
/// (default five points on `[0, sim.horizon]`).
pub struct Holding;

impl Task for Holding {
    fn family(&self) -> &'static str {
        "holding"
    }
    fn name(&self) -> &'static str {
        "holding"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["x", "regimes", "levels", "times"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let x = ctx.cfg.task.x.clone().unwrap_or_else(|| vec![0.0; m.dim]);
        let levels = ctx.cfg.task.levels.clone().unwrap_or_else(|| vec![ctx.sim.truncation.unwrap_or(3)]);
        let h = ctx.sim.horizon;
        let grid = ctx.cfg.task.times.clone().unwrap_or_else(|| (0..5).map(|k| h * k as f64 / 4.0).collect());
        let top = m.q.n_states.unwrap_or(usize::MAX);
        let mut reports = Vec::new();
        for &level in &levels {
            let ks: Vec<usize> = match &ctx.cfg.task.regimes {
                Some(ks) => ks.iter().copied().filter(|&k| k <= level).collect(),
                None => (1..=level.min(top)).collect(),
            };
            for k in ks {
                let sim = ctx.sim.clone().with_truncation(None);
                reports.extend(holding_time_check(&m, &x, k, level, &grid, ctx.cfg.sim.replicas, &sim)?);
            }
        }
        let failed = reports.iter().filter(|r| !r.pass).count();
        Ok(TaskOutput::from_reports(&reports, format!("{} grid points, {failed} failures", reports.len())))
    }
}

/// Log-Harnack inequality at `task.x`, `task.y`, `task.i`, horizon `sim.horizon`.
pub struct Harnack;

impl Task for Harnack {
    fn family(&self) -> &'static str {
        "harnack"
    }
    fn name(&self) -> &'static str {
        "harnack"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["x", "y", "i", "f", "floor"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let (x, i) = start(ctx, &m);
        let y = ctx.cfg.task.y.clone().ok_or_else(|| CliError::Config("harnack needs task.y".into()))?;
        let gauss = TestFunction::new("gauss", 1.0, |x, _| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
        let f = test_function(ctx, gauss)?;
        let floor = ctx.cfg.task.floor.unwrap_or(DEFAULT_POSITIVITY_FLOOR);
        let r = harnack_check(&m, &f, &x, &y, i, ctx.sim.horizon, ctx.cfg.sim.replicas, &ctx.sim, floor)?;
        let summary = format!("lhs {:.5} vs rhs {:.5}, margin {:.4e}", r.lhs.mean, r.rhs, r.margin);
        Ok(TaskOutput::from_reports(&[r], summary))
    }
}

/// Shared-noise gap probe along `task.radii` at time `task.t`.
pub struct Feller;

impl Task for Feller {
    fn family(&self) -> &'static str {
        "feller"
    }
    fn name(&self) -> &'static str {
        "feller"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["x", "i", "t", "radii", "anchor", "f"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let (x, i) = start(ctx, &m);
        let t = ctx.cfg.task.t.unwrap_or(ctx.sim.horizon);
        let radii = ctx.cfg.task.radii.clone().unwrap_or_else(|| vec![0.1, 0.01, 1e-3]);
        let anchor = ctx.cfg.task.anchor.unwrap_or(Anchor::Offset);
        let f = test_function(ctx, TestFunction::positive_first_coordinate())?;
        let p = feller_modulus(&m, &f, t, &x, i, &radii, ctx.cfg.sim.replicas, &ctx.sim, anchor)?;
        // Either the gaps shrink with the radius or a discontinuity is certified.
        let pass = p.monotone || p.discontinuous;
        let records = p
            .points
            .iter()
            .map(|pt| {
                json!({
                    "checker": "feller",
                    "model": m.id,
                    "params": {"f": f.label, "x": x, "i": i, "t": t, "radius": pt.radius, "anchor": anchor, "seed": ctx.sim.seed},
                    "lhs": pt.gap.mean,
                    "stderr": pt.gap.stderr,
                    "n_replicas": pt.gap.n_replicas,
                    "n_aborted": pt.gap.n_aborted,
                    "monotone": p.monotone,
                    "discontinuous": p.discontinuous,
                    "pass": pass,
                })
            })
            .collect();
        let last = p.points.last().expect("radii").gap;
        Ok(TaskOutput {
            records,
            pass,
            summary: format!(
                "gap {:.4} +- {:.4} at radius {}; monotone {}, discontinuity witness {}",
                last.mean,
                last.stderr,
                radii.last().expect("radii"),
                p.monotone,
                p.discontinuous
            ),
            aborted: p.points.iter().any(|pt| pt.gap.flagged()),
            trajectory: None,
        })
    }
}

/// Chain marginals from each start in `task.regimes` (default all) at each
/// time in `task.times` (default `sim.horizon`). Passes when at least 99% of
/// entries are within three standard errors.
pub struct ChainMarginal;

impl Task for ChainMarginal {
    fn family(&self) -> &'static str {
        "chain_marginal"
    }
    fn name(&self) -> &'static str {
        "chain-marginal"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["regimes", "times"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let n = m.q.n_states.ok_or_else(|| CliError::Config("chain-marginal needs a finite state space".into()))?;
        let starts = ctx.cfg.task.regimes.clone().unwrap_or_else(|| (1..=n).collect());
        let times = ctx.cfg.task.times.clone().unwrap_or_else(|| vec![ctx.sim.horizon]);
        let mut records: Vec<Value> = Vec::new();
        let (mut total, mut inside) = (0usize, 0usize);
        for &i in &starts {
            for (k, &t) in times.iter().enumerate() {
                let seed = derive_seed(ctx.sim.seed, (i * 1000 + k) as u64);
                for e in chain_marginal_check(&m.q, i, t, ctx.cfg.sim.replicas, seed)? {
                    total += 1;
                    inside += usize::from(e.within);
                    let mut v = serde_json::to_value(&e).expect("entry");
                    v["checker"] = "chain_marginal".into();
                    v["model"] = m.id.clone().into();
                    v["pass"] = e.within.into();
                    records.push(v);
                }
            }
        }
        let share = inside as f64 / total.max(1) as f64;
        Ok(TaskOutput {
            records,
            pass: share >= 0.99,
            summary: format!("{inside}/{total} entries within 3 standard errors"),
            ..TaskOutput::default()
        })
    }
}

/// Truncated against original paths (`task.cases` pairs, default 100), then
/// the exit probability at each `task.times` against its bound. Needs `sim.k`.
pub struct TruncationCheck;

impl Task for TruncationCheck {
    fn family(&self) -> &'static str {
        "truncation"
    }
    fn name(&self) -> &'static str {
        "truncation-check"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["x", "i", "times", "cases", "bdg"]
    }
    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let (x, i) = start(ctx, &m);
        let k = ctx.sim.truncation.ok_or_else(|| CliError::Config("truncation-check needs sim.k".into()))?;
        let base = ctx.sim.clone().with_truncation(None);
        let cases = ctx.cfg.task.cases.unwrap_or(100);
        let mut records: Vec<Value> = Vec::new();
        let mut mismatches = 0;
        for c in 0..cases as u64 {
            let sim = base.clone().with_horizon(ctx.sim.horizon);
            let sim = switchdiff::engine::SimConfig { seed: derive_seed(ctx.sim.seed, c), ..sim };
            let ok = truncation_consistency(&m, &x, i, k, &sim, 0)?;
            mismatches += usize::from(!ok);
            records.push(json!({"checker": "truncation_paths", "model": m.id, "case": c, "K": k, "agree": ok, "pass": ok}));
        }
        let times = ctx.cfg.task.times.clone().unwrap_or_else(|| vec![ctx.sim.horizon]);
        let bdg = ctx.cfg.task.bdg.unwrap_or(DEFAULT_BDG_CONSTANT);
        let reports = times
            .iter()
            .map(|&t| truncation_exit_check(&m, &x, i, k, t, ctx.cfg.sim.replicas, &base, bdg))
            .collect::<Result<Vec<_>, _>>()?;
        let bound = TaskOutput::from_reports(&reports, String::new());
        records.extend(bound.records);
        Ok(TaskOutput {
            records,
            pass: mismatches == 0 && bound.pass,
            summary: format!("{cases} path pairs, {mismatches} mismatches; exit bound pass {}", bound.pass),
            aborted: bound.aborted,
            trajectory: None,
        })
    }
}
