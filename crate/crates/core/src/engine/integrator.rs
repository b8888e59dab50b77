//! The shared stepping loop. Switch events inside an Euler step split the
//! step; the Gaussian increment is split with a Brownian bridge so that the
//! pieces add up to the full-step increment.

use super::config::{RecordMode, SimConfig};
use super::euler::EulerWorkspace;
use super::trajectory::{JumpRecord, SampleKind, Trajectory};
use crate::error::{ModelError, SimError};
use crate::models::ModelSpec;
use crate::noise::{Lane, NoiseStream};
use crate::regime_graph::{norm, row_block, QMatrixSpec};
use crate::Regime;

/// Step-level `dt * q` above which the single-switch approximation is flagged.
pub const STIFF_STEP_THRESHOLD: f64 = 0.1;

/// Hard cap on skeleton length, against explosive chains.
pub const MAX_SKELETON_JUMPS: usize = 10_000_000;

pub(crate) enum Switching<'a> {
    /// Exponential clock at rates frozen at the start of each step.
    Frozen,
    /// Pre-sampled switches, sorted by time.
    Scheduled(&'a [JumpRecord]),
}

/// `q_i(x)` with every entry of the row validated.
pub(crate) fn checked_exit_rate(q: &QMatrixSpec, x: &[f64], i: Regime) -> Result<f64, ModelError> {
    let mut acc = 0.0;
    for j in q.band(i) {
        let r = q.rate(x, i, j);
        if !r.is_finite() {
            return Err(ModelError::NonFiniteRate { x: x.to_vec(), from: i, to: j });
        }
        if r < 0.0 {
            return Err(ModelError::NegativeRate { x: x.to_vec(), from: i, to: j, rate: r });
        }
        acc += r;
    }
    Ok(acc)
}

/// Destination selected by relative offset `u * q_i(x)` on the row-`i`
/// block at `x`. Returns `(to, absolute mark)` or `None` for an empty row.
pub(crate) fn select_target(q: &QMatrixSpec, x: &[f64], i: Regime, u: f64) -> Result<Option<(Regime, f64)>, ModelError> {
    let block = row_block(q, x, i)?;
    let Some(first) = block.entries().first() else { return Ok(None) };
    let mark = first.left + u * block.total();
    let entry = block.locate(mark).or(block.entries().last()).expect("non-empty block");
    Ok(Some((entry.to, mark)))
}

/// Jump skeleton of a state-independent chain on `(t0, horizon)`: holding
/// time `E / q_i` and destination by a uniform mark on the row block, one
/// address of the skeleton lane per jump.
pub fn sample_skeleton(
    q: &QMatrixSpec,
    x_ref: &[f64],
    t0: f64,
    i0: Regime,
    horizon: f64,
    noise: &NoiseStream,
    replica: u64,
) -> Result<Vec<JumpRecord>, ModelError> {
    if !q.state_independent {
        return Err(ModelError::Unsupported("exact skeleton needs state-independent rates".into()));
    }
    let mut out = Vec::new();
    let (mut t, mut i) = (t0, i0);
    for n in 0.. {
        if n >= MAX_SKELETON_JUMPS {
            return Err(ModelError::InvalidArgument(format!("more than {MAX_SKELETON_JUMPS} jumps before {horizon}")));
        }
        let qi = checked_exit_rate(q, x_ref, i)?;
        if qi <= 0.0 {
            break;
        }
        let mut d = noise.draws(Lane::Skeleton, replica, n as u64);
        let (e, u) = (d.exp1(), d.uniform());
        t += e / qi;
        if t >= horizon {
            break;
        }
        let Some((to, mark)) = select_target(q, x_ref, i, u)? else { break };
        out.push(JumpRecord { time: t, from: i, to, mark });
        i = to;
    }
    Ok(out)
}

struct State<'a> {
    m: &'a ModelSpec,
    record: RecordMode,
    level: Option<f64>,
    traj: Trajectory,
}

impl State<'_> {
    fn exceeds(&self, x: &[f64], i: Regime) -> bool {
        self.level.is_some_and(|k| norm(x) + i as f64 > k)
    }

    fn observe(&mut self, t: f64, x: &[f64], i: Regime, kind: SampleKind) {
        let n = norm(x);
        if n > self.traj.sup_norm {
            self.traj.sup_norm = n;
        }
        if i > self.traj.sup_regime {
            self.traj.sup_regime = i;
        }
        if self.traj.tau.is_none() && self.exceeds(x, i) {
            self.traj.tau = Some(t);
        }
        if self.record == RecordMode::Full {
            self.traj.push(t, x, i, kind);
        }
    }

    fn jump(&mut self, s: f64, x: &[f64], from: Regime, to: Regime, mark: f64) {
        // The pre-jump state (X_s, L_{s-}) counts for the exit time as well.
        if self.traj.tau.is_none() && self.exceeds(x, from) {
            self.traj.tau = Some(s);
        }
        debug_assert!(from.abs_diff(to) <= self.m.q.bandwidth);
        self.traj.jumps.push(JumpRecord { time: s, from, to, mark });
        self.traj.eta.get_or_insert(s);
        self.observe(s, x, to, SampleKind::Jump);
    }
}

/// Integrate from `(t0, x0, i0)` to `cfg.horizon`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate(
    m: &ModelSpec,
    cfg: &SimConfig,
    noise: &NoiseStream,
    replica: u64,
    t0: f64,
    x0: &[f64],
    i0: Regime,
    switching: Switching<'_>,
) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    if x0.len() != m.dim {
        return Err(ModelError::DimensionMismatch { expected: m.dim, got: x0.len() }.into());
    }
    if !m.q.contains(i0) {
        return Err(ModelError::InvalidArgument(format!("initial regime {i0} outside the state space")).into());
    }
    let d = m.dim;
    let q = &m.q;
    let steps = cfg.steps_from(t0);
    let mut st = State {
        m,
        record: cfg.record,
        level: cfg.truncation.map(|k| k as f64),
        traj: Trajectory::empty(d, t0, x0, i0, cfg.truncation),
    };
    st.observe(t0, x0, i0, SampleKind::Start);

    let mut ws = EulerWorkspace::new(d);
    let mut x = x0.to_vec();
    let mut i = i0;
    let mut dw = vec![0.0; d];
    let mut piece = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut scheduled_at = 0usize;
    let schedule: &[JumpRecord] = match switching {
        Switching::Scheduled(s) => s,
        Switching::Frozen => &[],
    };
    let frozen = matches!(switching, Switching::Frozen);

    for k in 0..steps {
        let t = t0 + k as f64 * cfg.dt;
        let t_next = if k + 1 == steps { cfg.horizon } else { t0 + (k + 1) as f64 * cfg.dt };
        let h = t_next - t;
        let mut bm = noise.draws(Lane::Brownian, replica, k as u64);
        bm.fill_normal(&mut dw, h.sqrt());

        // Candidate switch of the frozen-rate clock.
        let mut candidate = None;
        if frozen {
            let qi = checked_exit_rate(q, &x, i)?;
            if h * qi > STIFF_STEP_THRESHOLD {
                st.traj.stiff_steps += 1;
            }
            if qi > 0.0 {
                let mut clock = noise.draws(Lane::Clock, replica, k as u64);
                let (e, u) = (clock.exp1(), clock.uniform());
                let wait = e / qi;
                if wait < h {
                    candidate = Some((t + wait, u));
                }
            }
        }

        let mut cur = t;
        loop {
            // Next switch inside [cur, t_next), if any.
            let next = if frozen {
                candidate.take()
            } else {
                match schedule.get(scheduled_at) {
                    Some(rec) if rec.time < t_next => Some((rec.time.max(cur), f64::NAN)),
                    _ => None,
                }
            };
            let Some((s, u)) = next else { break };
            let span = t_next - cur;
            let a = s - cur;
            let w = a / span;
            let sd = (a * (t_next - s) / span).max(0.0).sqrt();
            bm.fill_normal(&mut z, 1.0);
            for r in 0..d {
                piece[r] = w * dw[r] + sd * z[r];
                dw[r] -= piece[r];
            }
            ws.step(m, cur, &mut x, i, a, &piece)?;
            if frozen {
                if let Some((to, mark)) = select_target(q, &x, i, u)? {
                    st.jump(s, &x, i, to, mark);
                    i = to;
                }
            } else {
                let rec = schedule[scheduled_at];
                scheduled_at += 1;
                debug_assert_eq!(rec.from, i);
                st.jump(s, &x, i, rec.to, rec.mark);
                i = rec.to;
            }
            cur = s;
            if cfg.stop_at_first_switch && st.traj.eta.is_some() {
                st.traj.steps += 1;
                return Ok(finish(st.traj, s, x, i, replica));
            }
        }
        ws.step(m, cur, &mut x, i, t_next - cur, &dw)?;
        st.traj.steps += 1;
        st.observe(t_next, &x, i, SampleKind::Grid);
    }

    let t_end = if steps == 0 { t0 } else { cfg.horizon };
    Ok(finish(st.traj, t_end, x, i, replica))
}

fn finish(mut traj: Trajectory, t_end: f64, x: Vec<f64>, i: Regime, replica: u64) -> Trajectory {
    traj.final_time = t_end;
    traj.final_x = x;
    traj.final_regime = i;
    if traj.stiff_steps > 0 {
        log::debug!("replica {replica}: {} steps with dt * q above {STIFF_STEP_THRESHOLD}", traj.stiff_steps);
    }
    traj
}
