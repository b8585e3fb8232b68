//! Image-quality tables over a degraded tree.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{degraded_groups, list_images, thread_pool, write_file};
use crate::degrade::Factor;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::io::load_image;
use crate::iqa::{iq_suite_with, IqReport, IqaConfig};
use crate::resize::resize_bicubic;

#[derive(Debug, Clone)]
pub struct IqaOptions {
    /// Clean reference images.
    pub reference: PathBuf,
    /// Root of a `<factor>/s<severity>/<stem>.png` tree.
    pub test_root: PathBuf,
    /// Per-image CSV; the summary goes next to it as `<stem>_summary.csv`.
    pub out_csv: PathBuf,
    pub config: IqaConfig,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqaRow {
    pub image_id: String,
    pub factor: String,
    pub severity: u8,
    pub psnr: f64,
    pub ssim: f64,
    pub cw_ssim: f64,
    pub fsim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqaSummaryRow {
    pub factor: String,
    pub severity: u8,
    pub n: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub cw_ssim: f64,
    pub fsim: f64,
}

fn to_rgb(img: ImageBuffer) -> ImageBuffer {
    if img.channels() == 3 {
        img
    } else {
        img.to_rgb()
    }
}

pub fn summary_path(out_csv: &std::path::Path) -> PathBuf {
    let stem = out_csv.file_stem().and_then(|s| s.to_str()).unwrap_or("iqa");
    out_csv.with_file_name(format!("{stem}_summary.csv"))
}

/// Scores every degraded image against its reference. References are
/// resized (bicubic) when the degraded tree was produced at another size.
pub fn cmd_iqa(opts: &IqaOptions) -> Result<Vec<IqaRow>> {
    let refs = list_images(&opts.reference)?;
    if refs.is_empty() {
        return Err(Error::InvalidArgument(format!("no reference images in {}", opts.reference.display())));
    }
    let mut tasks = Vec::new();
    let mut unmatched = Vec::new();
    for (factor, severity, dir) in degraded_groups(&opts.test_root)? {
        for (stem, path) in list_images(&dir)? {
            match refs.get(&stem) {
                Some(r) => tasks.push((factor, severity, stem, path, r.clone())),
                None => unmatched.push(path.display().to_string()),
            }
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "degraded images without a reference: {}",
            unmatched.join(", ")
        )));
    }
    if tasks.is_empty() {
        return Err(Error::InvalidArgument(format!("no degraded images under {}", opts.test_root.display())));
    }
    let pool = thread_pool(opts.workers)?;
    let rows: Vec<Result<IqaRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(factor, severity, stem, path, ref_path)| {
                let test = to_rgb(load_image(path)?);
                let mut reference = to_rgb(load_image(ref_path)?);
                if !reference.same_shape(&test) {
                    reference = resize_bicubic(&reference, test.width(), test.height())?;
                }
                let r: IqReport = iq_suite_with(&reference, &test, &opts.config)?;
                Ok(IqaRow {
                    image_id: stem.clone(),
                    factor: factor.name().to_string(),
                    severity: severity.get(),
                    psnr: r.psnr,
                    ssim: r.ssim,
                    cw_ssim: r.cw_ssim,
                    fsim: r.fsim,
                })
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    write_file(&opts.out_csv, &w.into_inner().map_err(|e| Error::Encode(e.to_string()))?)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for s in summarize(&rows) {
        w.serialize(s)?;
    }
    write_file(&summary_path(&opts.out_csv), &w.into_inner().map_err(|e| Error::Encode(e.to_string()))?)?;
    Ok(rows)
}

/// Column means per `(factor, severity)`, in catalog order.
pub fn summarize(rows: &[IqaRow]) -> Vec<IqaSummaryRow> {
    let mut groups: BTreeMap<(Option<Factor>, &str, u8), Vec<&IqaRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.factor.parse().ok(), &r.factor, r.severity))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((_, factor, severity), members)| {
            let n = members.len();
            let mean = |f: fn(&IqaRow) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / n as f64;
            IqaSummaryRow {
                factor: factor.to_string(),
                severity,
                n,
                psnr: mean(|r| r.psnr),
                ssim: mean(|r| r.ssim),
                cw_ssim: mean(|r| r.cw_ssim),
                fsim: mean(|r| r.fsim),
            }
        })
        .collect()
}
