//! Command-line front end: scenario files, one subcommand per checker or
//! simulator, JSON-lines reports, CSV tables and binary trajectory logs.
//!
//! Exit status: 0 when every check passes, 1 when one fails, 2 for a
//! configuration or usage error, 3 when a model assumption fails (the
//! witness is printed), 4 on numerical blow-up or too many aborted replicas.

pub mod config;
pub mod error;
pub mod output;
pub mod tasks;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{Overrides, ScenarioConfig, DEFAULT_SEED};
pub use error::CliError;
pub use output::{emit_plot_data, PlotTable};
pub use tasks::{task, task_names, Context, Task, TaskOutput};

/// What a finished run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub config_hash: String,
}

/// Load, override, validate and run one subcommand, writing every output
/// file named by the scenario.
pub fn run(subcommand: &str, config_path: &Path, overrides: Overrides) -> Result<RunOutcome, CliError> {
    let mut cfg = ScenarioConfig::load(config_path)?;
    cfg.apply(overrides);
    run_config(subcommand, cfg)
}

pub fn run_config(subcommand: &str, cfg: ScenarioConfig) -> Result<RunOutcome, CliError> {
    let t = task(subcommand)?;
    tasks::check_task_keys(t.as_ref(), &cfg)?;
    cfg.validate()?;
    let (config_hash, config_digest) = cfg.hash()?;
    let sim = cfg.sim.sim_config();
    let ctx = Context { cfg, sim, config_hash: config_hash.clone(), config_digest };
    log::info!("{subcommand}: config {config_hash}");
    let out = t.run(&ctx)?;

    let dir = &ctx.cfg.output.dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let records: Vec<_> = out.records.iter().map(|r| output::stamp(r.clone(), &config_hash)).collect();
    let reports = dir.join(&ctx.cfg.output.reports);
    output::write_json_lines(&reports, &records)?;
    files.push(reports);

    if let Some(traj) = &out.trajectory {
        if let Some(name) = &ctx.cfg.output.trajectory_csv {
            let path = dir.join(name);
            output::write_trajectory_csv(fs::File::create(&path)?, traj)?;
            files.push(path);
        }
        if let Some(name) = &ctx.cfg.output.trajectory_bin {
            let path = dir.join(name);
            let w = std::io::BufWriter::new(fs::File::create(&path)?);
            traj.write_binary(w, ctx.sim.seed, &config_digest)?;
            files.push(path);
        }
    }
    if let Some(name) = &ctx.cfg.output.plot_csv {
        let family: Vec<_> = out.records.iter().filter(|r| r["checker"] == t.family()).cloned().collect();
        let table = emit_plot_data(&family)?;
        let path = dir.join(name);
        table.write_csv(fs::File::create(&path)?)?;
        files.push(path);
    }

    let exit_code = if out.aborted {
        4
    } else if out.pass {
        0
    } else {
        1
    };
    let manifest = json!({
        "subcommand": subcommand,
        "config_hash": config_hash,
        "seed": ctx.sim.seed,
        "pass": out.pass,
        "exit_code": exit_code,
        "summary": out.summary,
        "files": files.iter().map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).map_err(std::io::Error::from)? + "\n")?;
    files.push(manifest_path);
    Ok(RunOutcome { exit_code, summary: out.summary, files, config_hash })
}
