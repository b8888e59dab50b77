use serde_json::json;
use switchdiff::engine::{simulate, RecordMode};
use switchdiff::noise::NoiseStream;

use super::{Context, Task, TaskOutput};
use crate::error::CliError;

/// One full path from `task.x`, `task.i` (defaults: origin, regime 1).
pub struct Simulate;

impl Task for Simulate {
    fn family(&self) -> &'static str {
        "simulate"
    }
    fn name(&self) -> &'static str {
        "simulate"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["x", "i"]
    }

    fn run(&self, ctx: &Context) -> Result<TaskOutput, CliError> {
        let m = ctx.cfg.build_model()?;
        let x = ctx.cfg.task.x.clone().unwrap_or_else(|| vec![0.0; m.dim]);
        let i = ctx.cfg.task.i.unwrap_or(1);
        let sim = ctx.sim.clone().with_record(RecordMode::Full);
        let path = simulate(&m, &x, i, &sim, &NoiseStream::new(sim.seed), 0)?;
        let record = json!({
            "checker": "simulate",
            "model": m.id,
            "params": {"x": x, "i": i, "T": sim.horizon, "dt": sim.dt, "K": sim.truncation, "seed": sim.seed, "scheme": sim.scheme},
            "final_time": path.final_time,
            "final_regime": path.final_regime,
            "final_x": path.final_x,
            "jumps": path.jumps.len(),
            "eta": path.eta,
            "tau": path.tau,
            "steps": path.steps,
            "stiff_steps": path.stiff_steps,
            "pass": true,
        });
        Ok(TaskOutput {
            summary: format!("{} samples, {} switches", path.len(), path.jumps.len()),
            records: vec![record],
            pass: true,
            trajectory: Some(path),
            aborted: false,
        })
    }
}
