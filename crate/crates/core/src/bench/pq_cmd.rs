//! Panoptic-quality tables over a prediction tree.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{degraded_groups, read_dir_sorted, stem_of, thread_pool, write_file};
use crate::error::{Error, Result};
use crate::panoptic::load_panoptic;
use crate::pq::{aggregate_scores, match_segments, Averaging, PqStats};

#[derive(Debug, Clone)]
pub struct PqOptions {
    /// Ground truth as `<stem>.png` + `<stem>.json` pairs.
    pub gt: PathBuf,
    /// Root of a `<factor>/s<severity>/<stem>.{png,json}` prediction tree.
    pub pred_root: PathBuf,
    /// Output directory for `pq.csv`, `pq_summary.csv` and `pq_report.json`.
    pub out: PathBuf,
    pub averaging: Averaging,
    pub workers: usize,
}

/// Scores are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqRow {
    pub image_id: String,
    pub factor: String,
    pub severity: u8,
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Per-(factor, severity) aggregate: mean and population variance of the
/// per-image PQ, plus PQ / SQ / RQ of the counts pooled over the images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqSummaryRow {
    pub factor: String,
    pub severity: u8,
    pub n: usize,
    pub apq: f64,
    pub vpq: f64,
    pub dataset_pq: f64,
    pub dataset_sq: f64,
    pub dataset_rq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingPrediction {
    pub image_id: String,
    pub factor: String,
    pub severity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqOutcome {
    pub averaging: Averaging,
    pub rows: Vec<PqRow>,
    pub summary: Vec<PqSummaryRow>,
    /// Ground-truth images without a prediction; excluded from aggregates.
    pub missing: Vec<MissingPrediction>,
}

fn panoptic_pairs(dir: &Path) -> Result<BTreeMap<String, (PathBuf, PathBuf)>> {
    let mut out = BTreeMap::new();
    for p in read_dir_sorted(dir)? {
        if !p.is_file() || p.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        let json = p.with_extension("json");
        if !json.is_file() {
            return Err(Error::Panoptic(format!("{} has no companion {}", p.display(), json.display())));
        }
        if let Some(stem) = stem_of(&p) {
            out.insert(stem, (p, json));
        }
    }
    Ok(out)
}

pub fn cmd_pq(opts: &PqOptions) -> Result<PqOutcome> {
    let gt = panoptic_pairs(&opts.gt)?;
    if gt.is_empty() {
        return Err(Error::InvalidArgument(format!("no panoptic ground truth in {}", opts.gt.display())));
    }
    let mut tasks = Vec::new();
    let mut missing = Vec::new();
    for (factor, severity, dir) in degraded_groups(&opts.pred_root)? {
        let preds = panoptic_pairs(&dir)?;
        if let Some(stem) = preds.keys().find(|s| !gt.contains_key(*s)) {
            return Err(Error::Panoptic(format!("prediction {stem} in {} has no ground truth", dir.display())));
        }
        for (stem, g) in &gt {
            match preds.get(stem) {
                Some(p) => tasks.push((factor, severity, stem.clone(), p.clone(), g.clone())),
                None => missing.push(MissingPrediction {
                    image_id: stem.clone(),
                    factor: factor.name().to_string(),
                    severity: severity.get(),
                }),
            }
        }
    }
    if tasks.is_empty() {
        return Err(Error::InvalidArgument(format!("no predictions under {}", opts.pred_root.display())));
    }
    let pool = thread_pool(opts.workers)?;
    let scored: Vec<Result<(PqRow, PqStats)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(factor, severity, stem, (pp, pj), (gp, gj))| {
                let pred = load_panoptic(pp, pj)?;
                let gt = load_panoptic(gp, gj)?;
                let m = match_segments(&pred, &gt)?;
                let stats = PqStats::from_matching(&pred, &gt, &m);
                let r = stats.summarize(opts.averaging);
                Ok((
                    PqRow {
                        image_id: stem.clone(),
                        factor: factor.name().to_string(),
                        severity: severity.get(),
                        pq: 100.0 * r.pq,
                        sq: 100.0 * r.sq,
                        rq: 100.0 * r.rq,
                        tp: r.tp,
                        fp: r.fp,
                        fn_: r.fn_,
                    },
                    stats,
                ))
            })
            .collect()
    });
    let scored = scored.into_iter().collect::<Result<Vec<_>>>()?;

    let mut groups: BTreeMap<(usize, u8), (String, Vec<f64>, PqStats)> = BTreeMap::new();
    for ((factor, severity, ..), (row, stats)) in tasks.iter().zip(&scored) {
        let g = groups
            .entry((*factor as usize, severity.get()))
            .or_insert_with(|| (row.factor.clone(), Vec::new(), PqStats::default()));
        g.1.push(row.pq);
        g.2.merge(stats);
    }
    let mut summary = Vec::new();
    for ((_, severity), (factor, pqs, stats)) in groups {
        let (apq, vpq) = aggregate_scores(&pqs)?;
        let d = stats.summarize(opts.averaging);
        summary.push(PqSummaryRow {
            factor,
            severity,
            n: pqs.len(),
            apq,
            vpq,
            dataset_pq: 100.0 * d.pq,
            dataset_sq: 100.0 * d.sq,
            dataset_rq: 100.0 * d.rq,
        });
    }
    let outcome = PqOutcome {
        averaging: opts.averaging,
        rows: scored.into_iter().map(|(r, _)| r).collect(),
        summary,
        missing,
    };
    for m in &outcome.missing {
        log::warn!("no prediction for {} at {} s{}", m.image_id, m.factor, m.severity);
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &outcome.rows {
        w.serialize(r)?;
    }
    write_file(&opts.out.join("pq.csv"), &w.into_inner().map_err(|e| Error::Encode(e.to_string()))?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &outcome.summary {
        w.serialize(r)?;
    }
    write_file(&opts.out.join("pq_summary.csv"), &w.into_inner().map_err(|e| Error::Encode(e.to_string()))?)?;
    write_file(
        &opts.out.join("pq_report.json"),
        (serde_json::to_string_pretty(&outcome)? + "\n").as_bytes(),
    )?;
    Ok(outcome)
}
