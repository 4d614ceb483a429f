//! CSV tables written by `run`. Floats use Rust's shortest round-trip
//! formatting, so equal values always produce equal bytes.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::harness::{ExperimentSummary, TrialRecord};

pub const TRIALS_HEADER: [&str; 6] = ["config_id", "trial", "seed", "checkpoint", "error", "status"];
pub const SUMMARY_HEADER: [&str; 5] = ["config_id", "checkpoint", "mean", "stderr", "count"];
pub const BEST_HEADER: [&str; 6] = ["checkpoint", "family", "config_id", "mean", "stderr", "count"];
pub const COMPARISON_HEADER: [&str; 12] = [
    "checkpoint",
    "family_a",
    "config_a",
    "mean_a",
    "family_b",
    "config_b",
    "mean_b",
    "t",
    "df",
    "p_value",
    "significant",
    "winner",
];

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trials<W: Write>(out: W, checkpoints: &[u64], records: &[TrialRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER)?;
    for r in records {
        for (c, e) in checkpoints.iter().zip(&r.errors) {
            w.write_record([
                r.config_id.clone(),
                r.trial.to_string(),
                r.seed.to_string(),
                c.to_string(),
                opt(*e),
                r.status.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, summary: &ExperimentSummary) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for c in &summary.configs {
        for s in &c.stats {
            w.write_record([
                c.config_id.clone(),
                s.checkpoint.to_string(),
                opt(s.mean),
                opt(s.stderr),
                s.count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_best<W: Write>(out: W, summary: &ExperimentSummary) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BEST_HEADER)?;
    for b in &summary.best {
        w.write_record([
            b.checkpoint.to_string(),
            b.family.to_string(),
            b.config_id.clone(),
            b.mean.to_string(),
            b.stderr.to_string(),
            b.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparisons<W: Write>(out: W, summary: &ExperimentSummary) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for c in &summary.comparisons {
        let (t, df, p) = match c.test {
            Some(r) => (r.t.to_string(), r.df.to_string(), r.p_value.to_string()),
            None => Default::default(),
        };
        w.write_record([
            c.checkpoint.to_string(),
            c.first.family.to_string(),
            c.first.config_id.clone(),
            c.first.mean.to_string(),
            c.second.family.to_string(),
            c.second.config_id.clone(),
            c.second.mean.to_string(),
            t,
            df,
            p,
            c.significant().to_string(),
            c.winner().map(|f| f.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub config_id: String,
    pub checkpoint: u64,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

pub fn summary_rows(summary: &ExperimentSummary) -> Vec<SummaryRow> {
    summary
        .configs
        .iter()
        .flat_map(|c| {
            c.stats.iter().map(|s| SummaryRow {
                config_id: c.config_id.clone(),
                checkpoint: s.checkpoint,
                mean: s.mean,
                stderr: s.stderr,
                count: s.count,
            })
        })
        .collect()
}

/// Reads `summary.csv`, checking the header exactly.
pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(format!(
            "expected header {:?}, found {:?}",
            SUMMARY_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        ));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| e.to_string()))
        .collect()
}
