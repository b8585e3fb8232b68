//! Batch pipeline: corpus generation, metric tables, correlation and
//! reporting over a directory layout.

mod correlate_cmd;
mod degrade_cmd;
mod iqa_cmd;
mod manifest;
mod pq_cmd;
mod report_cmd;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use correlate_cmd::{cmd_correlate, CorrelateOptions};
pub use degrade_cmd::{cmd_degrade, DegradeOptions, DegradeOutcome};
pub use iqa_cmd::{cmd_iqa, summarize, summary_path, IqaOptions, IqaRow, IqaSummaryRow};
pub use manifest::{Manifest, ManifestRecord, SkippedTask};
pub use pq_cmd::{cmd_pq, MissingPrediction, PqOptions, PqOutcome, PqRow, PqSummaryRow};
pub use report_cmd::{cmd_report, ReportOptions};

use crate::degrade::{Factor, Severity};
use crate::error::{Error, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CAMROBUST_WORKERS";
/// Target size applied before degradation unless `original` is requested.
pub const DEFAULT_SIZE: (usize, usize) = (1024, 512);

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Parses `WIDTHxHEIGHT`, or `original` for no resizing.
pub fn parse_size(s: &str) -> Result<Option<(usize, usize)>> {
    if s.eq_ignore_ascii_case("original") {
        return Ok(None);
    }
    let bad = || Error::InvalidArgument(format!("size must be WIDTHxHEIGHT or `original`, got `{s}`"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w = w.trim().parse::<usize>().map_err(|_| bad())?;
    let h = h.trim().parse::<usize>().map_err(|_| bad())?;
    Ok(Some((w, h)))
}

/// Parses a comma-separated factor list; `all` selects the whole catalog.
pub fn parse_factors(s: &str) -> Result<Vec<Factor>> {
    if s.trim() == "all" {
        return Ok(Factor::ALL.to_vec());
    }
    let mut out: Vec<Factor> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidArgument("no factors selected".into()));
    }
    Ok(out)
}

pub fn parse_severities(s: &str) -> Result<Vec<Severity>> {
    if s.trim() == "all" {
        return Ok(Severity::ALL.to_vec());
    }
    let mut out: Vec<Severity> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u8>()
                .map_err(|_| Error::InvalidArgument(format!("bad severity `{t}`")))
                .and_then(Severity::new)
        })
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidArgument("no severities selected".into()));
    }
    Ok(out)
}

/// Worker count from the environment, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn stem_of(path: &Path) -> Option<String> {
    path.file_stem().and_then(|s| s.to_str()).map(str::to_string)
}

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Image files of `dir` keyed by stem. Two files sharing a stem are an error.
pub fn list_images(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for p in read_dir_sorted(dir)? {
        if !p.is_file() || !has_extension(&p, &IMAGE_EXTENSIONS) {
            continue;
        }
        let stem = stem_of(&p).ok_or_else(|| Error::InvalidArgument(format!("bad file name {}", p.display())))?;
        if let Some(prev) = out.insert(stem.clone(), p.clone()) {
            return Err(Error::InvalidArgument(format!(
                "stem `{stem}` is shared by {} and {}",
                prev.display(),
                p.display()
            )));
        }
    }
    Ok(out)
}

/// `(factor, severity, directory)` for every `<root>/<factor>/s<n>` present.
/// Directories that do not name a catalog factor are reported and skipped.
pub(crate) fn degraded_groups(root: &Path) -> Result<Vec<(Factor, Severity, PathBuf)>> {
    let mut out = Vec::new();
    for fdir in read_dir_sorted(root)? {
        if !fdir.is_dir() {
            continue;
        }
        let name = fdir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let Ok(factor) = name.parse::<Factor>() else {
            log::warn!("ignoring directory {} (not a degradation factor)", fdir.display());
            continue;
        };
        for sdir in read_dir_sorted(&fdir)? {
            let sname = sdir.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let level = sname.strip_prefix('s').and_then(|l| l.parse::<u8>().ok());
            match level.map(Severity::new) {
                Some(Ok(s)) if sdir.is_dir() => out.push((factor, s, sdir)),
                _ => log::warn!("ignoring {} (expected s1, s2 or s3)", sdir.display()),
            }
        }
    }
    out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(out)
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("1024x512").unwrap(), Some((1024, 512)));
        assert_eq!(parse_size("original").unwrap(), None);
        assert!(parse_size("1024").is_err());
    }

    #[test]
    fn factor_lists() {
        assert_eq!(parse_factors("all").unwrap().len(), 19);
        assert_eq!(parse_factors("fog, rain,fog").unwrap(), vec![Factor::Rain, Factor::Fog]);
        assert!(parse_factors("fog,hail").is_err());
        assert_eq!(parse_severities("3,1").unwrap(), vec![Severity::new(1).unwrap(), Severity::new(3).unwrap()]);
        assert!(parse_severities("4").is_err());
    }
}
