//! Report, trajectory and plot-table writers.

use std::io::Write;
use std::path::Path;

use serde_json::Value;
use switchdiff::engine::Trajectory;

use crate::error::CliError;

/// Append the configuration hash to a report record.
pub fn stamp(mut record: Value, config_hash: &str) -> Value {
    if let Value::Object(map) = &mut record {
        map.insert("config_hash".into(), Value::String(config_hash.into()));
    }
    record
}

pub fn write_json_lines(path: &Path, records: &[Value]) -> Result<(), CliError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Rows `time, regime, x1..xd, event`; `event` is `start`, `grid` or `jump`.
pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["time".to_string(), "regime".to_string()];
    header.extend((1..=traj.dim).map(|k| format!("x{k}")));
    header.push("event".into());
    out.write_record(&header)?;
    for k in 0..traj.len() {
        let mut row = vec![traj.times[k].to_string(), traj.regimes[k].to_string()];
        row.extend(traj.x(k).iter().map(f64::to_string));
        row.push(traj.kinds[k].label().into());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// A tidy table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    pub family: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl PlotTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn field<'a>(r: &'a Value, path: &[&str]) -> &'a Value {
    path.iter().fold(r, |v, k| v.get(k).unwrap_or(&Value::Null))
}

/// One plot table from the reports of a single checker family.
pub fn emit_plot_data(records: &[Value]) -> Result<PlotTable, CliError> {
    let family = match records.first().map(|r| field(r, &["checker"])) {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(CliError::Config("no checker records to tabulate".into())),
    };
    if let Some(other) = records.iter().map(|r| cell(field(r, &["checker"]))).find(|c| *c != family) {
        return Err(CliError::Config(format!("mixed checker families: {family} and {other}")));
    }
    let columns: &[(&'static str, &[&str])] = match family.as_str() {
        "feller" => &[("radius", &["params", "radius"]), ("gap", &["lhs"])],
        "holding" => &[
            ("k", &["params", "k"]),
            ("K", &["params", "K"]),
            ("t", &["params", "t"]),
            ("empirical", &["lhs"]),
            ("bound", &["rhs"]),
            ("pass", &["pass"]),
        ],
        "harnack" => &[("case", &["params", "case"]), ("lhs", &["lhs"]), ("rhs", &["rhs"]), ("margin", &["margin"])],
        "lemma21" => &[("case", &["params", "case"]), ("lhs", &["lhs"]), ("rhs", &["rhs"]), ("margin", &["margin"])],
        "moments" => &[("T", &["params", "T"]), ("lhs", &["lhs"]), ("rhs", &["rhs"]), ("margin", &["margin"])],
        "truncation" => &[("K", &["params", "K"]), ("t", &["params", "t"]), ("lhs", &["lhs"]), ("rhs", &["rhs"]), ("margin", &["margin"])],
        "chain_marginal" => &[
            ("from", &["from"]),
            ("to", &["to"]),
            ("t", &["t"]),
            ("empirical", &["empirical"]),
            ("oracle", &["oracle"]),
            ("stderr", &["stderr"]),
        ],
        other => return Err(CliError::Config(format!("no plot table for `{other}` records"))),
    };
    let rows = records.iter().map(|r| columns.iter().map(|(_, p)| cell(field(r, p))).collect()).collect();
    Ok(PlotTable { family, headers: columns.iter().map(|c| c.0).collect(), rows })
}
