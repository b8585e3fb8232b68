//! Complex-wavelet SSIM over the log-Gabor bank.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gabor::{GaborConfig, LogGaborBank};
use super::ssim::luma_plane;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwSsimConfig {
    pub window: usize,
    pub k: f64,
}

impl Default for CwSsimConfig {
    fn default() -> Self {
        Self { window: 7, k: 0.01 }
    }
}

/// Summed-area table with a zero first row and column.
fn integral<T: Copy + Default + std::ops::Add<Output = T> + std::ops::Sub<Output = T>>(
    v: &[T],
    w: usize,
    h: usize,
) -> Vec<T> {
    let mut s = vec![T::default(); (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = T::default();
        for x in 0..w {
            row = row + v[y * w + x];
            s[(y + 1) * (w + 1) + x + 1] = s[y * (w + 1) + x + 1] + row;
        }
    }
    s
}

fn box_sum<T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>>(
    s: &[T],
    w: usize,
    x: usize,
    y: usize,
    n: usize,
) -> T {
    let stride = w + 1;
    s[(y + n) * stride + x + n] - s[y * stride + x + n] - s[(y + n) * stride + x] + s[y * stride + x]
}

/// Running mean of the per-window index over bands.
pub(crate) struct CwAccumulator {
    width: usize,
    height: usize,
    config: CwSsimConfig,
    total: f64,
    count: usize,
}

impl CwAccumulator {
    pub(crate) fn new(width: usize, height: usize, config: CwSsimConfig) -> Result<Self> {
        let n = config.window;
        if n == 0 || width < n || height < n {
            return Err(Error::InvalidArgument(format!(
                "CW-SSIM needs both sides >= {n}, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            config,
            total: 0.0,
            count: 0,
        })
    }

    pub(crate) fn add_band(&mut self, cx: &[Complex64], cy: &[Complex64]) {
        let (w, h, n) = (self.width, self.height, self.config.window);
        let cross: Vec<Complex64> = cx.iter().zip(cy).map(|(a, b)| a * b.conj()).collect();
        let energy: Vec<f64> = cx.iter().zip(cy).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        let ic = integral(&cross, w, h);
        let ie = integral(&energy, w, h);
        for y in 0..=h - n {
            for x in 0..=w - n {
                let c = box_sum(&ic, w, x, y, n).norm();
                let e = box_sum(&ie, w, x, y, n).max(0.0);
                self.total += ((2.0 * c + self.config.k) / (e + self.config.k)).min(1.0);
                self.count += 1;
            }
        }
    }

    pub(crate) fn finish(&self) -> f64 {
        self.total / self.count as f64
    }
}

/// Mean over bands and fully contained windows of
/// `(2 |Σ cx conj(cy)| + K) / (Σ |cx|² + Σ |cy|² + K)`.
pub fn cw_ssim_with(
    reference: &ImageBuffer,
    test: &ImageBuffer,
    gabor: &GaborConfig,
    config: &CwSsimConfig,
) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let (w, h) = (reference.width(), reference.height());
    let mut acc = CwAccumulator::new(w, h, *config)?;
    let bank = LogGaborBank::shared(w, h, *gabor)?;
    bank.paired_orientations(&luma_plane(reference), &luma_plane(test), |_, ba, bb| {
        for (cx, cy) in ba.iter().zip(bb) {
            acc.add_band(cx, cy);
        }
    });
    Ok(acc.finish())
}

pub fn cw_ssim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    cw_ssim_with(reference, test, &GaborConfig::default(), &CwSsimConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texture() -> ImageBuffer {
        ImageBuffer::from_fn(40, 32, 1, |x, y, _| {
            (0.5 + 0.3 * (x as f64 * 0.9).sin() * (y as f64 * 0.6).cos() + 0.1 * ((x * y) % 7) as f64 / 7.0).clamp(0.0, 1.0)
        })
    }

    #[test]
    fn identical_scores_one() {
        let a = texture();
        assert!((cw_ssim(&a, &a).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn symmetric_and_bounded() {
        let a = texture();
        let b = a.map(|v| (v * 0.7 + 0.1).clamp(0.0, 1.0));
        let ab = cw_ssim(&a, &b).unwrap();
        assert!((ab - cw_ssim(&b, &a).unwrap()).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn integral_box() {
        let v: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let s = integral(&v, 4, 3);
        assert_eq!(box_sum(&s, 4, 1, 1, 2), 5.0 + 6.0 + 9.0 + 10.0);
    }
}
