//! Full-reference image quality: PSNR, SSIM, CW-SSIM and FSIM.

mod cwssim;
mod fft;
mod fsim;
mod gabor;
mod ssim;

use serde::{Deserialize, Serialize};

pub use cwssim::{cw_ssim, cw_ssim_with, CwSsimConfig};
pub use fsim::{fsim, fsim_with, phase_congruency, scharr_magnitude, FsimConfig};
pub use gabor::{log_gabor_bank, Band, GaborConfig, LogGaborBank};
pub use ssim::{psnr, ssim, ssim_components, ssim_with, SsimComponents, SsimConfig, PSNR_CAP_DB};

use crate::error::Result;
use crate::image::ImageBuffer;
use cwssim::CwAccumulator;
use fsim::{fsim_from_maps, PcAccumulator, FSIM_SCALE};
use ssim::luma_plane;

/// Window and filter-bank settings of every metric.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IqaConfig {
    pub ssim: SsimConfig,
    pub gabor: GaborConfig,
    pub cw_ssim: CwSsimConfig,
    pub fsim: FsimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqReport {
    pub psnr: f64,
    pub ssim: f64,
    pub cw_ssim: f64,
    pub fsim: f64,
}

impl IqReport {
    pub const COLUMNS: [&'static str; 4] = ["psnr", "ssim", "cw_ssim", "fsim"];

    pub fn values(&self) -> [f64; 4] {
        [self.psnr, self.ssim, self.cw_ssim, self.fsim]
    }
}

/// All four metrics; CW-SSIM and FSIM share one pass over the filter bank.
pub fn iq_suite_with(reference: &ImageBuffer, test: &ImageBuffer, config: &IqaConfig) -> Result<IqReport> {
    let psnr = psnr(reference, test)?;
    let ssim = ssim_with(reference, test, &config.ssim)?;
    let (w, h) = (reference.width(), reference.height());
    let (l1, l2) = (luma_plane(reference), luma_plane(test));
    let bank = LogGaborBank::shared(w, h, config.gabor)?;
    let noise = bank.noise_sums();
    let mut cw = CwAccumulator::new(w, h, config.cw_ssim)?;
    let mut a1 = PcAccumulator::new(w * h, FSIM_SCALE);
    let mut a2 = PcAccumulator::new(w * h, FSIM_SCALE);
    bank.paired_orientations(&l1, &l2, |o, ba, bb| {
        for (cx, cy) in ba.iter().zip(bb) {
            cw.add_band(cx, cy);
        }
        a1.add_orientation(ba, &noise[o], &config.fsim);
        a2.add_orientation(bb, &noise[o], &config.fsim);
    });
    let y1: Vec<f64> = l1.iter().map(|v| v * FSIM_SCALE).collect();
    let y2: Vec<f64> = l2.iter().map(|v| v * FSIM_SCALE).collect();
    Ok(IqReport {
        psnr,
        ssim,
        cw_ssim: cw.finish(),
        fsim: fsim_from_maps(&a1.finish(), &a2.finish(), &y1, &y2, w, h, &config.fsim),
    })
}

pub fn iq_suite(reference: &ImageBuffer, test: &ImageBuffer) -> Result<IqReport> {
    iq_suite_with(reference, test, &IqaConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pair() {
        let a = ImageBuffer::from_fn(32, 32, 3, |x, y, c| ((x * 3 + y * 5 + c) % 17) as f64 / 16.0);
        let r = iq_suite(&a, &a).unwrap();
        assert_eq!(r.psnr, 100.0);
        assert!((r.ssim - 1.0).abs() < 1e-9);
        assert!((r.cw_ssim - 1.0).abs() < 1e-6);
        assert!((r.fsim - 1.0).abs() < 1e-6);
    }

    #[test]
    fn suite_matches_individual_metrics() {
        let a = ImageBuffer::from_fn(32, 24, 3, |x, y, c| ((x * 3 + y * 5 + c) % 17) as f64 / 16.0);
        let b = a.map(|v| (v * 0.8 + 0.05).clamp(0.0, 1.0));
        let r = iq_suite(&a, &b).unwrap();
        assert_eq!(r.psnr, psnr(&a, &b).unwrap());
        assert_eq!(r.ssim, ssim(&a, &b).unwrap());
        assert_eq!(r.cw_ssim, cw_ssim(&a, &b).unwrap());
        assert_eq!(r.fsim, fsim(&a, &b).unwrap());
    }
}
