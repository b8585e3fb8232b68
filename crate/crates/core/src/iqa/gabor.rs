//! Frequency-domain log-Gabor filter bank.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::Fft2;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborConfig {
    pub scales: usize,
    pub orientations: usize,
    /// Wavelength of the finest scale, in pixels.
    pub min_wavelength: f64,
    /// Wavelength ratio between successive scales.
    pub mult: f64,
    /// Ratio of the radial Gaussian width to the centre frequency.
    pub sigma_on_f: f64,
    /// Orientation spacing over the angular Gaussian sigma.
    pub d_theta_on_sigma: f64,
    pub lowpass_cutoff: f64,
    pub lowpass_order: i32,
}

impl Default for GaborConfig {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 6,
            min_wavelength: 6.0,
            mult: 2.0,
            sigma_on_f: 0.55,
            d_theta_on_sigma: 1.2,
            lowpass_cutoff: 0.45,
            lowpass_order: 15,
        }
    }
}

/// Complex response of one filter.
#[derive(Debug, Clone)]
pub struct Band {
    pub scale: usize,
    pub orientation: usize,
    pub coeffs: Vec<Complex64>,
}

/// Per-orientation sums over the spatial filters that scale the noise
/// energy estimate of phase congruency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NoiseSums {
    /// Squared transfer function of the finest scale, summed.
    pub(crate) em_n: f64,
    /// `Σ_s Σ_x a_s(x)²`
    pub(crate) sum_an2: f64,
    /// `Σ_{i<j} Σ_x a_i(x) a_j(x)`
    pub(crate) sum_aiaj: f64,
}

/// Filters laid out in unshifted FFT order, indexed `[orientation][scale]`.
pub struct LogGaborBank {
    width: usize,
    height: usize,
    config: GaborConfig,
    filters: Vec<Vec<Vec<f64>>>,
    fft: Fft2,
    noise: OnceLock<Vec<NoiseSums>>,
}

/// Normalized frequency of FFT bin `i` of `n`, in `[-0.5, 0.5)`.
fn freq(i: usize, n: usize) -> f64 {
    let k = if i < n.div_ceil(2) { i as isize } else { i as isize - n as isize };
    if n % 2 == 1 {
        k as f64 / (n - 1).max(1) as f64
    } else {
        k as f64 / n as f64
    }
}

impl LogGaborBank {
    pub fn new(width: usize, height: usize, config: GaborConfig) -> Result<Self> {
        if width < 2 || height < 2 || config.scales == 0 || config.orientations == 0 {
            return Err(Error::InvalidArgument("log-Gabor bank needs at least a 2x2 grid and one filter".into()));
        }
        let theta_sigma = std::f64::consts::PI / config.orientations as f64 / config.d_theta_on_sigma;
        let n = width * height;
        let (mut radius, mut theta, mut lowpass) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for y in 0..height {
            let fy = freq(y, height);
            for x in 0..width {
                let fx = freq(x, width);
                let r = (fx * fx + fy * fy).sqrt();
                let i = y * width + x;
                radius[i] = if i == 0 { 1.0 } else { r };
                theta[i] = (-fy).atan2(fx);
                lowpass[i] = 1.0 / (1.0 + (r / config.lowpass_cutoff).powi(2 * config.lowpass_order));
            }
        }
        let log_sigma_sq = 2.0 * config.sigma_on_f.ln().powi(2);
        let radial: Vec<Vec<f64>> = (0..config.scales)
            .map(|s| {
                let fo = 1.0 / (config.min_wavelength * config.mult.powi(s as i32));
                let mut g: Vec<f64> = radius
                    .iter()
                    .zip(&lowpass)
                    .map(|(r, lp)| (-(r / fo).ln().powi(2) / log_sigma_sq).exp() * lp)
                    .collect();
                g[0] = 0.0;
                g
            })
            .collect();
        let filters = (0..config.orientations)
            .map(|o| {
                let angle = o as f64 * std::f64::consts::PI / config.orientations as f64;
                let (sa, ca) = angle.sin_cos();
                let spread: Vec<f64> = theta
                    .iter()
                    .map(|t| {
                        let (st, ct) = t.sin_cos();
                        let ds = st * ca - ct * sa;
                        let dc = ct * ca + st * sa;
                        let d = ds.atan2(dc).abs();
                        (-d * d / (2.0 * theta_sigma * theta_sigma)).exp()
                    })
                    .collect();
                radial
                    .iter()
                    .map(|g| g.iter().zip(&spread).map(|(a, b)| a * b).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            width,
            height,
            config,
            filters,
            fft: Fft2::new(width, height),
            noise: OnceLock::new(),
        })
    }

    /// Bank for `(width, height, config)` from a small process-wide cache.
    pub fn shared(width: usize, height: usize, config: GaborConfig) -> Result<Arc<Self>> {
        type Key = (usize, usize, [u64; 5], usize, usize, i32);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<LogGaborBank>>>> = OnceLock::new();
        let c = config;
        let key = (
            width,
            height,
            [c.min_wavelength, c.mult, c.sigma_on_f, c.d_theta_on_sigma, c.lowpass_cutoff].map(f64::to_bits),
            c.scales,
            c.orientations,
            c.lowpass_order,
        );
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().expect("bank cache").get(&key) {
            return Ok(b.clone());
        }
        let bank = Arc::new(Self::new(width, height, config)?);
        let mut guard = cache.lock().expect("bank cache");
        if guard.len() >= 8 {
            guard.clear();
        }
        Ok(guard.entry(key).or_insert(bank).clone())
    }

    pub(crate) fn noise_sums(&self) -> &[NoiseSums] {
        self.noise.get_or_init(|| {
            let n = self.width * self.height;
            let root_n = (n as f64).sqrt();
            self.filters
                .iter()
                .map(|scales| {
                    let spatial: Vec<Vec<f64>> = scales
                        .iter()
                        .map(|f| {
                            let mut c: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                            self.fft.inverse(&mut c);
                            c.iter().map(|v| v.re * root_n).collect()
                        })
                        .collect();
                    let (mut sum_an2, mut sum_aiaj) = (0.0, 0.0);
                    for i in 0..n {
                        for si in 0..spatial.len() {
                            sum_an2 += spatial[si][i] * spatial[si][i];
                            for sj in si + 1..spatial.len() {
                                sum_aiaj += spatial[si][i] * spatial[sj][i];
                            }
                        }
                    }
                    NoiseSums {
                        em_n: scales[0].iter().map(|f| f * f).sum(),
                        sum_an2,
                        sum_aiaj,
                    }
                })
                .collect()
        })
    }

    pub fn config(&self) -> &GaborConfig {
        &self.config
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Transfer function of filter `(scale, orientation)` in FFT order.
    pub fn filter(&self, scale: usize, orientation: usize) -> &[f64] {
        &self.filters[orientation][scale]
    }

    pub(crate) fn spectrum(&self, plane: &[f64]) -> Vec<Complex64> {
        let mut spec: Vec<Complex64> = plane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut spec);
        spec
    }

    pub(crate) fn band_from_spectrum(&self, spectrum: &[Complex64], scale: usize, orientation: usize) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = spectrum
            .iter()
            .zip(self.filter(scale, orientation))
            .map(|(c, f)| c * f)
            .collect();
        self.fft.inverse(&mut out);
        out
    }

    /// Calls `f(orientation, bands_a, bands_b)` with the responses of two
    /// planes at every scale of one orientation at a time.
    pub(crate) fn paired_orientations(
        &self,
        a: &[f64],
        b: &[f64],
        mut f: impl FnMut(usize, &[Vec<Complex64>], &[Vec<Complex64>]),
    ) {
        let sa = self.spectrum(a);
        let sb = self.spectrum(b);
        for o in 0..self.config.orientations {
            let ba: Vec<_> = (0..self.config.scales).map(|s| self.band_from_spectrum(&sa, s, o)).collect();
            let bb: Vec<_> = (0..self.config.scales).map(|s| self.band_from_spectrum(&sb, s, o)).collect();
            f(o, &ba, &bb);
        }
    }

    /// Complex responses of every filter, ordered by orientation then scale.
    pub fn responses(&self, plane: &[f64]) -> Result<Vec<Band>> {
        if plane.len() != self.width * self.height {
            return Err(Error::DimensionMismatch(format!(
                "plane of {} samples for a {}x{} bank",
                plane.len(),
                self.width,
                self.height
            )));
        }
        let spec = self.spectrum(plane);
        let mut bands = Vec::with_capacity(self.config.scales * self.config.orientations);
        for o in 0..self.config.orientations {
            for s in 0..self.config.scales {
                bands.push(Band {
                    scale: s,
                    orientation: o,
                    coeffs: self.band_from_spectrum(&spec, s, o),
                });
            }
        }
        Ok(bands)
    }
}

/// Bank responses of a single-channel image with the default configuration.
pub fn log_gabor_bank(img: &ImageBuffer) -> Result<Vec<Band>> {
    if img.channels() != 1 {
        return Err(Error::InvalidArgument("log-Gabor bank expects a single-channel image".into()));
    }
    LogGaborBank::new(img.width(), img.height(), GaborConfig::default())?.responses(img.data())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn energy(b: &Band) -> f64 {
        b.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    #[test]
    fn constant_has_no_response() {
        let bands = log_gabor_bank(&ImageBuffer::filled(32, 24, 1, 0.7)).unwrap();
        assert_eq!(bands.len(), 24);
        assert!(bands.iter().all(|b| b.coeffs.iter().all(|c| c.norm() < 1e-12)));
    }

    #[test]
    fn sinusoid_lands_in_its_band() {
        // horizontal frequency 1/12 = centre of scale 1, orientation 0
        let img = ImageBuffer::from_fn(96, 96, 1, |x, _, _| 0.5 + 0.4 * (2.0 * std::f64::consts::PI * x as f64 / 12.0).cos());
        let bands = log_gabor_bank(&img).unwrap();
        let best = bands.iter().max_by(|a, b| energy(a).total_cmp(&energy(b))).unwrap();
        assert_eq!((best.scale, best.orientation), (1, 0));
        let runner_up = bands
            .iter()
            .filter(|b| (b.scale, b.orientation) != (1, 0))
            .map(energy)
            .fold(0.0, f64::max);
        assert!(energy(best) > 3.0 * runner_up);
    }

    #[test]
    fn linear_in_input() {
        let img = ImageBuffer::from_fn(20, 16, 1, |x, y, _| ((x * 7 + y * 3) % 11) as f64 / 10.0);
        let scaled = ImageBuffer::new(20, 16, 1, img.data().iter().map(|v| v * 0.5).collect()).unwrap();
        let a = log_gabor_bank(&img).unwrap();
        let b = log_gabor_bank(&scaled).unwrap();
        for (ba, bb) in a.iter().zip(&b) {
            for (ca, cb) in ba.coeffs.iter().zip(&bb.coeffs) {
                assert!((ca * 0.5 - cb).norm() < 1e-12);
            }
        }
    }
}
