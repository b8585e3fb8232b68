//! Internal sensor noise: Gaussian, uniform, impulse and Poisson.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::catalog::Severity;
use super::params::{ensure, ParamSet, ParamSlot};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::seed::SeedStreams;

pub const GAUSSIAN_SIGMA: [f64; 3] = [0.08, 0.18, 0.38];
/// Uniform-noise standard deviations in 8-bit units.
pub const UNIFORM_SIGMA_8BIT: [f64; 3] = [25.0, 50.0, 75.0];
pub const IMPULSE_FRACTION: [f64; 3] = [0.03, 0.09, 0.27];
pub const POISSON_LAMBDA: [f64; 3] = [5.0, 10.0, 15.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Uniform,
    Impulse,
    Poisson,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Uniform => "uniform",
            NoiseKind::Impulse => "impulse",
            NoiseKind::Poisson => "poisson",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "uniform" => Ok(NoiseKind::Uniform),
            "impulse" => Ok(NoiseKind::Impulse),
            "poisson" => Ok(NoiseKind::Poisson),
            other => Err(Error::InvalidArgument(format!("unknown noise kind `{other}`"))),
        }
    }
}

/// `amount` is sigma (Gaussian, uniform; both on the `[0, 1]` scale), the
/// replaced pixel fraction (impulse) or lambda in 8-bit units (Poisson).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub kind: NoiseKind,
    pub amount: f64,
}

impl NoiseParams {
    pub fn for_severity(kind: NoiseKind, severity: Severity) -> Self {
        let amount = match kind {
            NoiseKind::Gaussian => severity.pick(GAUSSIAN_SIGMA),
            NoiseKind::Uniform => severity.pick(UNIFORM_SIGMA_8BIT) / 255.0,
            NoiseKind::Impulse => severity.pick(IMPULSE_FRACTION),
            NoiseKind::Poisson => severity.pick(POISSON_LAMBDA),
        };
        Self { kind, amount }
    }

    fn key(&self) -> &'static str {
        match self.kind {
            NoiseKind::Gaussian | NoiseKind::Uniform => "sigma",
            NoiseKind::Impulse => "fraction",
            NoiseKind::Poisson => "lambda",
        }
    }
}

impl ParamSet for NoiseParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        let key = self.key();
        f(key, ParamSlot::Real(&mut self.amount));
    }

    fn validate(&self) -> Result<()> {
        ensure(self.amount >= 0.0, || format!("{} must be >= 0", self.key()))?;
        if self.kind == NoiseKind::Impulse {
            ensure(self.amount <= 1.0, || "impulse fraction must be <= 1".into())?;
        }
        Ok(())
    }
}

const STREAM_NOISE: u64 = 1;
const STREAM_IMPULSE_SELECT: u64 = 2;
const STREAM_IMPULSE_VALUE: u64 = 3;

/// The additive noise samples (before clipping) for Gaussian, uniform and
/// Poisson noise; one value per image sample.
pub fn additive_noise_field(params: &NoiseParams, len: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = SeedStreams::new(seed).stream(STREAM_NOISE);
    let a = params.amount;
    Ok(match params.kind {
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, a).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            (0..len).map(|_| normal.sample(&mut rng)).collect()
        }
        NoiseKind::Uniform => {
            let half = a * 3f64.sqrt();
            if half == 0.0 {
                vec![0.0; len]
            } else {
                (0..len).map(|_| rng.random_range(-half..half)).collect()
            }
        }
        NoiseKind::Poisson => {
            if a == 0.0 {
                vec![0.0; len]
            } else {
                let poisson = Poisson::new(a).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                (0..len).map(|_| poisson.sample(&mut rng) / 255.0).collect()
            }
        }
        NoiseKind::Impulse => {
            return Err(Error::InvalidArgument(
                "impulse noise replaces pixels and has no additive field".into(),
            ))
        }
    })
}

pub fn noise_with(img: &ImageBuffer, params: &NoiseParams, seed: u64) -> Result<ImageBuffer> {
    params.validate()?;
    let mut out = img.clone();
    match params.kind {
        NoiseKind::Impulse => {
            let streams = SeedStreams::new(seed);
            let mut select = streams.stream(STREAM_IMPULSE_SELECT);
            let mut value = streams.stream(STREAM_IMPULSE_VALUE);
            let ch = img.channels();
            for px in out.data_mut().chunks_exact_mut(ch) {
                if select.random_bool(params.amount) {
                    let v = if value.random_bool(0.5) { 1.0 } else { 0.0 };
                    px.iter_mut().for_each(|s| *s = v);
                }
            }
        }
        _ => {
            let field = additive_noise_field(params, img.data().len(), seed)?;
            for (v, n) in out.data_mut().iter_mut().zip(field) {
                *v = (*v + n).clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

pub fn add_noise(img: &ImageBuffer, kind: NoiseKind, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    noise_with(img, &NoiseParams::for_severity(kind, severity), seed)
}
