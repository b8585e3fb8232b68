//! Peak signal-to-noise ratio and structural similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::kernel::gaussian_1d;

pub const PSNR_CAP_DB: f64 = 100.0;

/// `10 log10(1 / MSE)` over all samples, capped at [`PSNR_CAP_DB`].
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let n = reference.data().len() as f64;
    let mse = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

/// Window means of the luminance term, the contrast-structure term and
/// their product (the SSIM score).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimComponents {
    pub luminance: f64,
    pub contrast_structure: f64,
    pub ssim: f64,
}

/// Luma plane of a 1- or 3-channel image.
pub(crate) fn luma_plane(img: &ImageBuffer) -> Vec<f64> {
    if img.channels() == 1 {
        img.data().to_vec()
    } else {
        img.luma().into_data()
    }
}

/// Separable filtering keeping only positions where the window fits.
fn valid_filter(plane: &[f64], width: usize, height: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = k.len();
    let (ow, oh) = (width + 1 - n, height + 1 - n);
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let src = &plane[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&src[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (i, w) in k.iter().enumerate() {
            let src = &rows[(y + i) * ow..(y + i + 1) * ow];
            for (o, s) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }
    (out, ow, oh)
}

pub fn ssim_components(reference: &ImageBuffer, test: &ImageBuffer, config: &SsimConfig) -> Result<SsimComponents> {
    reference.ensure_same_shape(test)?;
    let (w, h) = (reference.width(), reference.height());
    if config.window % 2 == 0 || config.window == 0 {
        return Err(Error::InvalidArgument("SSIM window must be odd".into()));
    }
    if w.min(h) < config.window {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs both sides >= {}, got {w}x{h}",
            config.window
        )));
    }
    let x = luma_plane(reference);
    let y = luma_plane(test);
    let k = gaussian_1d(config.sigma, config.window / 2);
    let f = |p: &[f64]| valid_filter(p, w, h, &k).0;
    let prod = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).collect::<Vec<_>>();
    let mx = f(&x);
    let my = f(&y);
    let sxx = f(&prod(&x, &x));
    let syy = f(&prod(&y, &y));
    let sxy = f(&prod(&x, &y));
    let c1 = config.k1 * config.k1;
    let c2 = config.k2 * config.k2;
    let (mut lum, mut cs, mut total) = (0.0, 0.0, 0.0);
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cxy = sxy[i] - ux * uy;
        let l = (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
        let c = (2.0 * cxy + c2) / (vx + vy + c2);
        lum += l;
        cs += c;
        total += l * c;
    }
    let n = mx.len() as f64;
    Ok(SsimComponents {
        luminance: lum / n,
        contrast_structure: cs / n,
        ssim: total / n,
    })
}

pub fn ssim_with(reference: &ImageBuffer, test: &ImageBuffer, config: &SsimConfig) -> Result<f64> {
    Ok(ssim_components(reference, test, config)?.ssim)
}

/// Mean SSIM over 11x11 Gaussian windows of the luma planes.
pub fn ssim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    ssim_with(reference, test, &SsimConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_closed_forms() {
        let a = ImageBuffer::from_fn(16, 16, 3, |x, y, c| (x + y + c) as f64 / 64.0);
        assert_eq!(psnr(&a, &a).unwrap(), 100.0);
        let b = a.map(|v| v + 0.1);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        assert!(psnr(&a, &ImageBuffer::filled(8, 8, 3, 0.0)).is_err());
    }

    #[test]
    fn ssim_of_constants() {
        let a = ImageBuffer::filled(16, 16, 1, 0.5);
        let b = ImageBuffer::filled(16, 16, 1, 0.25);
        let expected = (2.0 * 0.5 * 0.25 + 1e-4) / (0.3125 + 1e-4);
        assert!((ssim(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_small() {
        let a = ImageBuffer::filled(10, 30, 1, 0.5);
        assert!(ssim(&a, &a).is_err());
    }

    #[test]
    fn valid_region_size() {
        let p = vec![1.0; 20 * 15];
        let (out, w, h) = valid_filter(&p, 20, 15, &gaussian_1d(1.5, 5));
        assert_eq!((w, h), (10, 5));
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}
