//! Feature similarity from phase congruency and gradient magnitude.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gabor::{GaborConfig, LogGaborBank, NoiseSums};
use super::ssim::luma_plane;
use crate::error::Result;
use crate::image::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsimConfig {
    pub t1: f64,
    /// Gradient constant on the 0-255 scale.
    pub t2: f64,
    /// Noise threshold in standard deviations above the mean noise energy.
    pub noise_k: f64,
    /// Divisor applied to the noise threshold.
    pub noise_divisor: f64,
    pub epsilon: f64,
}

impl Default for FsimConfig {
    fn default() -> Self {
        Self {
            t1: 0.85,
            t2: 160.0,
            noise_k: 2.0,
            noise_divisor: 1.7,
            epsilon: 1e-4,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let m = *m;
    if n % 2 == 1 {
        m
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + m) / 2.0
    }
}

/// Accumulates noise-compensated local energy and amplitude over
/// orientations; responses are multiplied by `scale` first.
pub(crate) struct PcAccumulator {
    energy_all: Vec<f64>,
    an_all: Vec<f64>,
    scale: f64,
}

impl PcAccumulator {
    pub(crate) fn new(n: usize, scale: f64) -> Self {
        Self {
            energy_all: vec![0.0; n],
            an_all: vec![0.0; n],
            scale,
        }
    }

    pub(crate) fn add_orientation(&mut self, bands: &[Vec<Complex64>], noise: &NoiseSums, config: &FsimConfig) {
        let n = self.energy_all.len();
        let k = self.scale;
        let mut sum_e = vec![0.0; n];
        let mut sum_o = vec![0.0; n];
        let mut sum_an = vec![0.0; n];
        for b in bands {
            for i in 0..n {
                let eo = b[i] * k;
                sum_e[i] += eo.re;
                sum_o[i] += eo.im;
                sum_an[i] += eo.norm();
            }
        }
        let mut energy = vec![0.0; n];
        for i in 0..n {
            let x = (sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]).sqrt() + config.epsilon;
            let (me, mo) = (sum_e[i] / x, sum_o[i] / x);
            for b in bands {
                let eo = b[i] * k;
                energy[i] += eo.re * me + eo.im * mo - (eo.re * mo - eo.im * me).abs();
            }
        }
        let mut e2: Vec<f64> = bands[0].iter().map(|c| (c * k).norm_sqr()).collect();
        let mean_e2n = -median(&mut e2) / 0.5f64.ln();
        let noise_power = mean_e2n / noise.em_n;
        let noise_energy2 = 2.0 * noise_power * noise.sum_an2 + 4.0 * noise_power * noise.sum_aiaj;
        let tau = (noise_energy2 / 2.0).max(0.0).sqrt();
        let noise_mean = tau * (std::f64::consts::PI / 2.0).sqrt();
        let noise_sigma = ((2.0 - std::f64::consts::PI / 2.0) * tau * tau).sqrt();
        let t = (noise_mean + config.noise_k * noise_sigma) / config.noise_divisor;
        for i in 0..n {
            self.energy_all[i] += (energy[i] - t).max(0.0);
            self.an_all[i] += sum_an[i];
        }
    }

    pub(crate) fn finish(self) -> Vec<f64> {
        self.energy_all
            .iter()
            .zip(&self.an_all)
            .map(|(e, a)| if *a > 0.0 { (e / a).clamp(0.0, 1.0) } else { 0.0 })
            .collect()
    }
}

/// Phase congruency map: orientation-summed noise-compensated local energy
/// over summed amplitude.
pub fn phase_congruency(plane: &[f64], bank: &LogGaborBank, config: &FsimConfig) -> Vec<f64> {
    let (w, h) = bank.dims();
    let g = *bank.config();
    let spec = bank.spectrum(plane);
    let mut acc = PcAccumulator::new(w * h, 1.0);
    for (o, noise) in bank.noise_sums().iter().enumerate() {
        let bands: Vec<_> = (0..g.scales).map(|s| bank.band_from_spectrum(&spec, s, o)).collect();
        acc.add_orientation(&bands, noise, config);
    }
    acc.finish()
}

/// Scharr gradient magnitude with zero padding.
pub fn scharr_magnitude(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    const K: [[f64; 3]; 3] = [[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]];
    let at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            plane[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..3 {
                for i in 0..3 {
                    let v = at(x + 1 - i as isize, y + 1 - j as isize);
                    gx += K[j][i] * v;
                    gy += K[i][j] * v;
                }
            }
            out[y as usize * w + x as usize] = (gx * gx + gy * gy).sqrt() / 16.0;
        }
    }
    out
}

/// Luma samples are scaled to 0-255 before phase congruency and gradients.
pub(crate) const FSIM_SCALE: f64 = 255.0;

/// Pools the similarity maps of two phase-congruency maps and 0-255 luma
/// planes.
pub(crate) fn fsim_from_maps(pc1: &[f64], pc2: &[f64], y1: &[f64], y2: &[f64], w: usize, h: usize, config: &FsimConfig) -> f64 {
    let g1 = scharr_magnitude(y1, w, h);
    let g2 = scharr_magnitude(y2, w, h);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..w * h {
        let spc = (2.0 * pc1[i] * pc2[i] + config.t1) / (pc1[i] * pc1[i] + pc2[i] * pc2[i] + config.t1);
        let sg = (2.0 * g1[i] * g2[i] + config.t2) / (g1[i] * g1[i] + g2[i] * g2[i] + config.t2);
        let pcm = pc1[i].max(pc2[i]);
        num += spc * sg * pcm;
        den += pcm;
    }
    if den == 0.0 {
        return 1.0;
    }
    (num / den).clamp(0.0, 1.0)
}

pub fn fsim_with(reference: &ImageBuffer, test: &ImageBuffer, gabor: &GaborConfig, config: &FsimConfig) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let (w, h) = (reference.width(), reference.height());
    let (l1, l2) = (luma_plane(reference), luma_plane(test));
    let bank = LogGaborBank::shared(w, h, *gabor)?;
    let noise = bank.noise_sums();
    let mut a1 = PcAccumulator::new(w * h, FSIM_SCALE);
    let mut a2 = PcAccumulator::new(w * h, FSIM_SCALE);
    bank.paired_orientations(&l1, &l2, |o, ba, bb| {
        a1.add_orientation(ba, &noise[o], config);
        a2.add_orientation(bb, &noise[o], config);
    });
    let y1: Vec<f64> = l1.iter().map(|v| v * FSIM_SCALE).collect();
    let y2: Vec<f64> = l2.iter().map(|v| v * FSIM_SCALE).collect();
    Ok(fsim_from_maps(&a1.finish(), &a2.finish(), &y1, &y2, w, h, config))
}

pub fn fsim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    fsim_with(reference, test, &GaborConfig::default(), &FsimConfig::default())
}
