//! Markdown report over the manifest, IQ, PQ and correlation outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::manifest::Manifest;
use super::write_file;
use crate::correlate::{CorrelationReport, MetricTable};
use crate::degrade::{Factor, Operator, Severity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub manifest: Option<PathBuf>,
    /// Per-image IQ CSV from the `iqa` step.
    pub iqa: Option<PathBuf>,
    /// Per-image PQ CSV from the `pq` step.
    pub pq: Option<PathBuf>,
    /// `correlation.json` from the `correlate` step.
    pub correlation: Option<PathBuf>,
    pub out: PathBuf,
}

type Groups = BTreeMap<(String, u8), Vec<f64>>;

fn column_groups(table: &MetricTable, column: &str) -> Groups {
    let mut out = Groups::new();
    if let Some(c) = table.column_index(column) {
        for (k, v) in &table.rows {
            if let Some(v) = v[c] {
                out.entry((k.factor.clone(), k.severity)).or_default().push(v);
            }
        }
    }
    out
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}

fn require(path: &Option<PathBuf>) -> Result<Option<&Path>> {
    match path {
        Some(p) if !p.is_file() => Err(Error::InvalidArgument(format!("report input {} does not exist", p.display()))),
        Some(p) => Ok(Some(p.as_path())),
        None => Ok(None),
    }
}

fn fmt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.decimals$}"))
}

/// Renders `<out>/report.md` and returns its text. Missing inputs leave
/// their sections out and are flagged at the top.
pub fn cmd_report(opts: &ReportOptions) -> Result<String> {
    let manifest = require(&opts.manifest)?.map(Manifest::load).transpose()?;
    let iqa = require(&opts.iqa)?.map(MetricTable::read_csv).transpose()?;
    let pq = require(&opts.pq)?.map(MetricTable::read_csv).transpose()?;
    let correlation: Option<CorrelationReport> = require(&opts.correlation)?
        .map(|p| -> Result<CorrelationReport> {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        })
        .transpose()?;
    if manifest.is_none() && iqa.is_none() && pq.is_none() && correlation.is_none() {
        return Err(Error::InvalidArgument("report needs at least one input".into()));
    }

    let mut s = String::from("# Degradation benchmark report\n\n");
    let mut omitted = Vec::new();
    if manifest.is_none() {
        omitted.push("generation manifest");
    }
    if iqa.is_none() {
        omitted.push("image-quality curves");
    }
    if pq.is_none() {
        omitted.push("panoptic-quality curves");
    }
    if correlation.is_none() {
        omitted.push("correlation matrices");
    }
    for o in &omitted {
        let _ = writeln!(s, "> **Omitted:** {o} (input not supplied).");
    }
    if !omitted.is_empty() {
        s.push('\n');
    }

    if let Some(m) = &manifest {
        let _ = writeln!(s, "## Generation\n");
        let _ = writeln!(s, "- tool: {} {}", m.tool, m.version);
        let _ = writeln!(s, "- global seed: {}", m.global_seed);
        let _ = writeln!(
            s,
            "- working size: {}",
            m.size.map_or_else(|| "source size".to_string(), |[w, h]| format!("{w}x{h}"))
        );
        let _ = writeln!(s, "- outputs: {}", m.records.len());
        let _ = writeln!(s, "- skipped tasks: {}", m.skipped.len());
        let surrogates = m.records.iter().filter(|r| r.surrogate).count();
        let _ = writeln!(s, "- outputs from surrogate operators: {surrogates}\n");
    }

    let iq_cols = ["psnr", "ssim", "cw_ssim", "fsim"];
    let iq_groups: Vec<Groups> = iq_cols
        .iter()
        .map(|c| iqa.as_ref().map(|t| column_groups(t, c)).unwrap_or_default())
        .collect();
    let pq_groups = pq.as_ref().map(|t| column_groups(t, "pq")).unwrap_or_default();

    let _ = writeln!(s, "## Factors\n");
    for factor in Factor::ALL {
        let _ = writeln!(s, "### {}\n", factor.name());
        let _ = writeln!(
            s,
            "Cause: {}. Surrogate: {}. {}.\n",
            factor.cause().label(),
            if factor.is_surrogate() { "yes" } else { "no" },
            factor.description()
        );
        let mut params: Vec<BTreeMap<String, f64>> = Vec::new();
        for sev in Severity::ALL {
            let from_manifest = manifest.as_ref().and_then(|m| {
                m.records
                    .iter()
                    .find(|r| r.factor == factor.name() && r.severity == sev.get())
                    .map(|r| r.parameters.clone())
            });
            params.push(match from_manifest {
                Some(p) => p,
                None => Operator::resolve(factor, sev, &BTreeMap::new())?.params(),
            });
        }
        if !params[0].is_empty() {
            let _ = writeln!(s, "| parameter | s1 | s2 | s3 |\n|---|---:|---:|---:|");
            for key in params[0].keys() {
                let vals: Vec<String> = params.iter().map(|p| fmt(p.get(key).copied(), 4)).collect();
                let _ = writeln!(s, "| {key} | {} |", vals.join(" | "));
            }
            s.push('\n');
        }
        let mut header = String::from("| severity | native |");
        let mut rule = String::from("|---:|---:|");
        if iqa.is_some() {
            header.push_str(" PSNR | SSIM | CW-SSIM | FSIM |");
            rule.push_str("---:|---:|---:|---:|");
        }
        if pq.is_some() {
            header.push_str(" aPQ | vPQ |");
            rule.push_str("---:|---:|");
        }
        let _ = writeln!(s, "{header}\n{rule}");
        for sev in Severity::ALL {
            let key = (factor.name().to_string(), sev.get());
            let mut line = format!("| {} | {} |", sev.get(), factor.native_severity(sev));
            if iqa.is_some() {
                for (g, decimals) in iq_groups.iter().zip([2, 4, 4, 4]) {
                    let _ = write!(line, " {} |", fmt(g.get(&key).map(|v| mean_var(v).0), decimals));
                }
            }
            if pq.is_some() {
                let mv = pq_groups.get(&key).map(|v| mean_var(v));
                let _ = write!(line, " {} | {} |", fmt(mv.map(|m| m.0), 2), fmt(mv.map(|m| m.1), 2));
            }
            let _ = writeln!(s, "{line}");
        }
        s.push('\n');
    }

    if let Some(c) = &correlation {
        let _ = writeln!(s, "## Correlation\n");
        for line in c.to_markdown().lines() {
            if line.starts_with("# ") {
                continue;
            }
            match line.strip_prefix("## ") {
                Some(rest) => {
                    let _ = writeln!(s, "### {rest}");
                }
                None => {
                    let _ = writeln!(s, "{line}");
                }
            }
        }
    }
    while s.ends_with("\n\n") {
        s.pop();
    }
    write_file(&opts.out.join("report.md"), s.as_bytes())?;
    Ok(s)
}
