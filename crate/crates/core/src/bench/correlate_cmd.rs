//! Correlation matrices between IQ and PQ tables.

use std::path::PathBuf;

use super::write_file;
use crate::correlate::{correlation_report, CorrelationMode, CorrelationReport, MetricTable};
use crate::error::{Error, Result};

/// Count columns of the PQ table, never used as quality series.
const PQ_COUNT_COLUMNS: [&str; 4] = ["tp", "fp", "fn", "n"];

#[derive(Debug, Clone)]
pub struct CorrelateOptions {
    pub iqa_csv: PathBuf,
    pub pq_csv: PathBuf,
    pub mode: CorrelationMode,
    /// Output directory for `correlation.json` and `correlation.md`.
    pub out: PathBuf,
    /// IQ columns; default every numeric column of the IQ table.
    pub iq_columns: Option<Vec<String>>,
    /// PQ columns; default `pq` when present, else every non-count column.
    pub pq_columns: Option<Vec<String>>,
}

pub fn cmd_correlate(opts: &CorrelateOptions) -> Result<CorrelationReport> {
    let iq = MetricTable::read_csv(&opts.iqa_csv)?;
    let pq = MetricTable::read_csv(&opts.pq_csv)?;
    let iq_cols = opts.iq_columns.clone().unwrap_or_else(|| iq.columns.clone());
    let pq_cols = match &opts.pq_columns {
        Some(c) => c.clone(),
        None if pq.column_index("pq").is_some() => vec!["pq".to_string()],
        None => pq
            .columns
            .iter()
            .filter(|c| !PQ_COUNT_COLUMNS.contains(&c.as_str()))
            .cloned()
            .collect(),
    };
    if iq_cols.is_empty() || pq_cols.is_empty() {
        return Err(Error::InvalidArgument("no numeric columns to correlate".into()));
    }
    let report = correlation_report(&iq, &pq, &iq_cols, &pq_cols, opts.mode)?;
    for u in &report.undefined {
        log::warn!("undefined correlation: {u}");
    }
    write_file(
        &opts.out.join("correlation.json"),
        (serde_json::to_string_pretty(&report)? + "\n").as_bytes(),
    )?;
    write_file(&opts.out.join("correlation.md"), report.to_markdown().as_bytes())?;
    Ok(report)
}
