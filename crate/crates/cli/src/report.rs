//! Report envelopes, JSON-lines and CSV emission, and the stdout table.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use chanbench::verification::CheckReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::runner::{MeasureRow, Outcome};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One JSON-lines entry for a check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRecord {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub wall_clock_ms: u64,
    pub tolerance: f64,
    pub outcome: String,
    pub report: CheckReport,
}

/// One JSON-lines entry for a capacity or decomposition result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub wall_clock_ms: u64,
    pub kind: String,
    pub result: Value,
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Searches cannot prove a bound, so a pass is phrased as absence of evidence.
pub fn outcome_text(r: &CheckReport) -> String {
    if r.passed {
        format!("no violation found in {} trials (seed {})", r.trials, r.seed)
    } else {
        format!("violation {:.3e} exceeds tolerance {:.1e} (seed {})", r.max_violation, r.tolerance, r.seed)
    }
}

pub fn envelope(r: &CheckReport, config_hash: &str, wall_clock_ms: u64) -> ReportRecord {
    ReportRecord {
        tool_version: TOOL_VERSION.into(),
        config_hash: config_hash.into(),
        seed: r.seed,
        timestamp_unix: now_unix(),
        wall_clock_ms,
        tolerance: r.tolerance,
        outcome: outcome_text(r),
        report: r.clone(),
    }
}

fn append_line(path: &Path, line: &str) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path).with_context(|| format!("opening {}", path.display()))?;
    writeln!(f, "{line}")?;
    Ok(())
}

/// Appends each check to `<dir>/<check_name>.jsonl`, results to
/// `<dir>/<kind>.jsonl`, and rows to `<dir>/summary.csv`.
pub fn write_outputs(dir: &Path, outcome: &Outcome, seed: u64, config_hash: &str, wall_clock_ms: u64) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in &outcome.checks {
        let rec = envelope(r, config_hash, wall_clock_ms);
        append_line(&dir.join(format!("{}.jsonl", r.check_name)), &serde_json::to_string(&rec)?)?;
    }
    for rec in &outcome.records {
        let out = ResultRecord {
            tool_version: TOOL_VERSION.into(),
            config_hash: config_hash.into(),
            seed,
            timestamp_unix: now_unix(),
            wall_clock_ms,
            kind: rec.kind.clone(),
            result: rec.body.clone(),
        };
        append_line(&dir.join(format!("{}.jsonl", rec.kind)), &serde_json::to_string(&out)?)?;
    }
    if !outcome.checks.is_empty() {
        let path = dir.join("summary.csv");
        let fresh = !path.exists();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            w.write_record(["check_name", "trials", "max_violation", "passed", "tolerance", "seed", "runtime_ms", "config_hash"])?;
        }
        for r in &outcome.checks {
            w.write_record([
                r.check_name.clone(),
                r.trials.to_string(),
                format!("{:e}", r.max_violation),
                r.passed.to_string(),
                format!("{:e}", r.tolerance),
                r.seed.to_string(),
                r.runtime_ms.to_string(),
                config_hash.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if !outcome.rows.is_empty() {
        let path = dir.join("capacity.csv");
        let fresh = !path.exists();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            w.write_record(["channel", "measure", "p", "method", "value", "units", "label"])?;
        }
        for (channel, rows) in &outcome.rows {
            for row in rows {
                w.write_record([
                    channel.clone(),
                    row.measure.clone(),
                    row.p.map(|p| p.to_string()).unwrap_or_default(),
                    row.method.clone(),
                    format!("{:.10}", row.value),
                    row.units.clone().unwrap_or_default(),
                    row.label.clone(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

pub fn print_checks(reports: &[CheckReport]) {
    if reports.is_empty() {
        return;
    }
    println!("{:<28} {:>8} {:>14} {:>10}  result", "check", "trials", "max violation", "tolerance");
    for r in reports {
        println!(
            "{:<28} {:>8} {:>14.3e} {:>10.1e}  {}",
            r.check_name,
            r.trials,
            r.max_violation,
            r.tolerance,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
}

pub fn print_measures(channel: &str, rows: &[MeasureRow]) {
    println!("channel {channel}");
    println!("  {:<10} {:>5} {:<18} {:>14} {:<6} bound", "measure", "p", "method", "value", "units");
    for r in rows {
        println!(
            "  {:<10} {:>5} {:<18} {:>14.8} {:<6} {}",
            r.measure,
            r.p.map(|p| p.to_string()).unwrap_or_default(),
            r.method,
            r.value,
            r.units.as_deref().unwrap_or(""),
            r.label
        );
    }
}

/// Parses every non-empty line of a JSON-lines report file.
pub fn read_records(path: &Path) -> Result<Vec<ReportRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1)))
        .collect()
}
