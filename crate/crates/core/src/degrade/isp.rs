//! ISP failures: JPEG compression, over-sharpening, missing demosaic and
//! missing Bayer filter.

use super::catalog::Severity;
use super::params::{ensure, ParamSet, ParamSlot};
use crate::error::Result;
use crate::image::{ImageBuffer, LUMA_WEIGHTS};
use crate::io::{decode_image_bytes, encode_image, ImageFormat};
use crate::kernel::{filter_image, Kernel2D};

/// JPEG quality per severity; severity 3 compresses hardest.
pub const JPEG_QUALITY: [u32; 3] = [80, 50, 20];
pub const SHARPEN_ALPHA: [f64; 3] = [0.25, 0.5, 0.75];
pub const SHARPEN_LIGHTNESS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JpegParams {
    pub quality: u32,
}

impl JpegParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            quality: severity.pick(JPEG_QUALITY),
        }
    }
}

impl ParamSet for JpegParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("quality", ParamSlot::Count(&mut self.quality));
    }

    fn validate(&self) -> Result<()> {
        ensure((1..=100).contains(&self.quality), || {
            format!("jpeg quality {} outside 1..=100", self.quality)
        })
    }
}

/// Encodes to JPEG at `quality` and decodes back.
pub fn jpeg_with(img: &ImageBuffer, params: &JpegParams) -> Result<ImageBuffer> {
    params.validate()?;
    let bytes = encode_image(img, ImageFormat::Jpeg { quality: params.quality as u8 })?;
    decode_image_bytes(&bytes)
}

pub fn jpeg_cycle(img: &ImageBuffer, severity: Severity) -> Result<ImageBuffer> {
    jpeg_with(img, &JpegParams::for_severity(severity))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpenParams {
    pub alpha: f64,
    pub lightness: f64,
}

impl SharpenParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            alpha: severity.pick(SHARPEN_ALPHA),
            lightness: SHARPEN_LIGHTNESS,
        }
    }

    /// `(1 - alpha) * identity + alpha * [[-1,-1,-1],[-1,8+L,-1],[-1,-1,-1]]`.
    pub fn kernel(&self) -> Kernel2D {
        let a = self.alpha;
        let mut w = vec![-a; 9];
        w[4] = (1.0 - a) + a * (8.0 + self.lightness);
        Kernel2D::new(3, 3, w)
    }
}

impl ParamSet for SharpenParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("alpha", ParamSlot::Real(&mut self.alpha));
        f("lightness", ParamSlot::Real(&mut self.lightness));
    }

    fn validate(&self) -> Result<()> {
        ensure((0.0..=1.0).contains(&self.alpha), || "sharpen alpha must lie in [0, 1]".into())
    }
}

pub fn sharpen_with(img: &ImageBuffer, params: &SharpenParams) -> Result<ImageBuffer> {
    params.validate()?;
    if params.alpha == 0.0 {
        return Ok(img.clone());
    }
    Ok(filter_image(img, &params.kernel()).clip())
}

pub fn oversharpen(img: &ImageBuffer, severity: Severity) -> Result<ImageBuffer> {
    sharpen_with(img, &SharpenParams::for_severity(severity))
}

/// Channel kept at `(x, y)` by an RGGB colour filter array.
#[inline]
pub fn rggb_channel(x: usize, y: usize) -> usize {
    match (y % 2, x % 2) {
        (0, 0) => 0,
        (1, 1) => 2,
        _ => 1,
    }
}

/// RGGB mosaic left in three planes: each pixel keeps only the channel its
/// filter passes.
pub fn no_demosaic(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.ensure_rgb("no-demosaic")?;
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let keep = rggb_channel(x, y);
            for (c, v) in out.pixel_mut(x, y).iter_mut().enumerate() {
                if c != keep {
                    *v = 0.0;
                }
            }
        }
    }
    Ok(out)
}

/// Luma with the fixed grayscale weights, replicated to three channels.
pub fn no_bayer(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.ensure_rgb("no-Bayer")?;
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(3) {
        let l = (LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2]).clamp(0.0, 1.0);
        px.iter_mut().for_each(|v| *v = l);
    }
    Ok(out)
}
