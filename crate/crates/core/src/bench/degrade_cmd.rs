//! Corpus generation over every (image, factor, severity) task.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{sha256_hex, Manifest, ManifestRecord, SkippedTask, MANIFEST_FILE};
use super::{list_images, thread_pool, write_file, DEFAULT_SIZE};
use crate::degrade::{Factor, Operator, Severity};
use crate::depth::{load_depth, DepthIngest, DepthMap};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::io::{encode_image, load_image, ImageFormat};
use crate::resize::resize_bicubic;
use crate::seed::derive_seed;

#[derive(Debug, Clone)]
pub struct DegradeOptions {
    pub input: PathBuf,
    /// Directory of `<stem>.png` 16-bit depth maps.
    pub depth: Option<PathBuf>,
    pub depth_ingest: DepthIngest,
    pub out: PathBuf,
    pub factors: Vec<Factor>,
    pub severities: Vec<Severity>,
    pub seed: u64,
    /// Working size; `None` keeps each source size.
    pub size: Option<(usize, usize)>,
    /// Parameter overrides per factor.
    pub overrides: BTreeMap<Factor, BTreeMap<String, f64>>,
    pub workers: usize,
}

impl DegradeOptions {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            depth: None,
            depth_ingest: DepthIngest::default(),
            out: out.into(),
            factors: Factor::ALL.to_vec(),
            severities: Severity::ALL.to_vec(),
            seed: 0,
            size: Some(DEFAULT_SIZE),
            overrides: BTreeMap::new(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DegradeOutcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

impl DegradeOutcome {
    /// True when some weather task was skipped for lack of depth.
    pub fn is_partial(&self) -> bool {
        !self.manifest.skipped.is_empty()
    }
}

pub fn output_path(factor: Factor, severity: Severity, stem: &str) -> String {
    format!("{}/s{}/{stem}.png", factor.name(), severity.get())
}

struct Source {
    stem: String,
    image: ImageBuffer,
    depth: Option<DepthMap>,
    missing_depth: Option<String>,
}

fn load_source(stem: &str, path: &Path, opts: &DegradeOptions) -> Result<Source> {
    let raw = load_image(path)?;
    let (mut depth, mut missing_depth) = (None, None);
    if opts.factors.iter().any(|f| f.needs_depth()) {
        match &opts.depth {
            None => missing_depth = Some("no depth directory given".to_string()),
            Some(dir) => {
                let p = dir.join(format!("{stem}.png"));
                if p.is_file() {
                    let d = load_depth(&p, opts.depth_ingest)?;
                    if (d.width(), d.height()) != (raw.width(), raw.height()) {
                        return Err(Error::DimensionMismatch(format!(
                            "depth {} is {}x{} but image {} is {}x{}",
                            p.display(),
                            d.width(),
                            d.height(),
                            path.display(),
                            raw.width(),
                            raw.height()
                        )));
                    }
                    depth = Some(d);
                } else {
                    missing_depth = Some(format!("no depth map {}", p.display()));
                }
            }
        }
    }
    let image = if raw.channels() == 3 { raw } else { raw.to_rgb() };
    let (image, depth) = match opts.size {
        Some((w, h)) if (w, h) != (image.width(), image.height()) => {
            (resize_bicubic(&image, w, h)?, depth.map(|d| d.resize(w, h)).transpose()?)
        }
        _ => (image, depth),
    };
    Ok(Source {
        stem: stem.to_string(),
        image,
        depth,
        missing_depth,
    })
}

enum TaskResult {
    Done(ManifestRecord),
    Skipped(SkippedTask),
}

fn run_task(src: &Source, factor: Factor, severity: Severity, op: &Operator, opts: &DegradeOptions) -> Result<TaskResult> {
    if factor.needs_depth() && src.depth.is_none() {
        return Ok(TaskResult::Skipped(SkippedTask {
            image_id: src.stem.clone(),
            factor: factor.name().to_string(),
            severity: severity.get(),
            reason: src.missing_depth.clone().unwrap_or_default(),
        }));
    }
    let seed = derive_seed(opts.seed, &src.stem, factor.name(), severity.get());
    let out = op.apply(&src.image, src.depth.as_ref(), seed)?;
    let bytes = encode_image(&out, ImageFormat::Png)?;
    let rel = output_path(factor, severity, &src.stem);
    write_file(&opts.out.join(&rel), &bytes)?;
    Ok(TaskResult::Done(ManifestRecord {
        image_id: src.stem.clone(),
        factor: factor.name().to_string(),
        severity: severity.get(),
        native_severity: factor.native_severity(severity),
        seed,
        path: rel,
        sha256: sha256_hex(&bytes),
        parameters: op.params(),
        surrogate: factor.is_surrogate(),
    }))
}

/// Writes `<out>/<factor>/s<severity>/<stem>.png` for every task plus
/// `<out>/manifest.json`. Weather tasks without a depth map are skipped and
/// listed in the manifest.
pub fn cmd_degrade(opts: &DegradeOptions) -> Result<DegradeOutcome> {
    if opts.factors.is_empty() || opts.severities.is_empty() {
        return Err(Error::InvalidArgument("no factors or severities selected".into()));
    }
    let images = list_images(&opts.input)?;
    if images.is_empty() {
        return Err(Error::InvalidArgument(format!("no PNG or JPEG images in {}", opts.input.display())));
    }
    let mut ops = Vec::new();
    for &f in &opts.factors {
        let ov = opts.overrides.get(&f).cloned().unwrap_or_default();
        for &s in &opts.severities {
            ops.push((f, s, Operator::resolve(f, s, &ov)?));
        }
    }
    for f in opts.overrides.keys() {
        if !opts.factors.contains(f) {
            return Err(Error::InvalidArgument(format!("overrides given for unselected factor {f}")));
        }
    }

    let pool = thread_pool(opts.workers)?;
    let results: Vec<Result<Vec<TaskResult>>> = pool.install(|| {
        images
            .par_iter()
            .map(|(stem, path)| {
                let src = load_source(stem, path, opts)?;
                ops.par_iter()
                    .map(|(f, s, op)| run_task(&src, *f, *s, op, opts))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    });

    let (mut records, mut skipped) = (Vec::new(), Vec::new());
    for r in results {
        for t in r? {
            match t {
                TaskResult::Done(rec) => records.push(rec),
                TaskResult::Skipped(s) => skipped.push(s),
            }
        }
    }
    let order = |f: &str| f.parse::<Factor>().ok();
    records.sort_by(|a, b| (order(&a.factor), a.severity, &a.image_id).cmp(&(order(&b.factor), b.severity, &b.image_id)));
    skipped.sort_by(|a, b| (order(&a.factor), a.severity, &a.image_id).cmp(&(order(&b.factor), b.severity, &b.image_id)));
    let mut per_factor: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &skipped {
        *per_factor.entry(s.factor.as_str()).or_default() += 1;
    }
    for (factor, n) in &per_factor {
        log::warn!("skipped {n} {factor} task(s): no depth map");
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        global_seed: opts.seed,
        size: opts.size.map(|(w, h)| [w, h]),
        records,
        skipped,
    };
    let manifest_path = opts.out.join(MANIFEST_FILE);
    write_file(&manifest_path, manifest.to_json()?.as_bytes())?;
    Ok(DegradeOutcome {
        manifest,
        manifest_path,
    })
}
