//! Vehicle-motion blur: defocus (disk) and linear motion.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::catalog::Severity;
use super::params::{ensure, ParamSet, ParamSlot};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::kernel::{filter_image, gaussian_1d, Kernel2D};
use crate::seed::SeedStreams;

/// Disk radius and anti-aliasing sigma per severity.
pub const DEFOCUS: [(f64, f64); 3] = [(3.0, 0.1), (6.0, 0.5), (10.0, 0.5)];
/// Motion radius (taps = 2 r + 1) and Gaussian tap-weight sigma per severity.
pub const MOTION: [(f64, f64); 3] = [(10.0, 3.0), (15.0, 8.0), (20.0, 15.0)];
pub const MOTION_ANGLE_MAX_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlurKind {
    Defocus,
    Motion,
}

impl fmt::Display for BlurKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlurKind::Defocus => "defocus",
            BlurKind::Motion => "motion",
        })
    }
}

impl FromStr for BlurKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "defocus" => Ok(BlurKind::Defocus),
            "motion" => Ok(BlurKind::Motion),
            other => Err(Error::InvalidArgument(format!("unknown blur kind `{other}`"))),
        }
    }
}

/// `radius` and `sigma` are the disk radius and edge blur (defocus) or the
/// motion radius and tap-weight sigma (motion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurParams {
    pub kind: BlurKind,
    pub radius: f64,
    pub sigma: f64,
}

impl BlurParams {
    pub fn for_severity(kind: BlurKind, severity: Severity) -> Self {
        let (radius, sigma) = match kind {
            BlurKind::Defocus => severity.pick(DEFOCUS),
            BlurKind::Motion => severity.pick(MOTION),
        };
        Self { kind, radius, sigma }
    }
}

impl ParamSet for BlurParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("radius", ParamSlot::Real(&mut self.radius));
        f("sigma", ParamSlot::Real(&mut self.sigma));
    }

    fn validate(&self) -> Result<()> {
        ensure(self.radius >= 0.0 && self.sigma >= 0.0, || {
            "blur radius and sigma must be >= 0".into()
        })
    }
}

/// Normalized disk of `radius`, softened by a small Gaussian (3x3 for radii
/// up to 8, 5x5 beyond).
pub fn defocus_kernel(radius: f64, edge_blur: f64) -> Kernel2D {
    let r = radius.ceil() as isize;
    let side = (2 * r + 1) as usize;
    let mut disk = Vec::with_capacity(side * side);
    for y in -r..=r {
        for x in -r..=r {
            disk.push(if ((x * x + y * y) as f64) <= radius * radius { 1.0 } else { 0.0 });
        }
    }
    let disk = Kernel2D::new(side, side, disk).normalized();
    if edge_blur <= 0.0 {
        return disk;
    }
    let g = gaussian_1d(edge_blur, if radius <= 8.0 { 1 } else { 2 });
    let smooth = Kernel2D::new(
        g.len(),
        g.len(),
        g.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect(),
    );
    disk.convolve(&smooth).normalized()
}

/// Line of `2 radius + 1` taps from the center along `angle_deg`, tap `i`
/// weighted by `exp(-i^2 / (2 sigma^2))`, normalized to unit sum.
pub fn motion_kernel(radius: f64, sigma: f64, angle_deg: f64) -> Kernel2D {
    let taps = (2.0 * radius).round() as isize + 1;
    let half = taps - 1;
    let side = (2 * half + 1) as usize;
    let mut w = vec![0.0; side * side];
    let (c, s) = (angle_deg.to_radians().cos(), angle_deg.to_radians().sin());
    for i in 0..taps {
        let weight = if sigma > 0.0 {
            (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()
        } else if i == 0 {
            1.0
        } else {
            0.0
        };
        let dx = (i as f64 * c).round() as isize;
        let dy = (i as f64 * s).round() as isize;
        w[((half + dy) * side as isize + half + dx) as usize] += weight;
    }
    Kernel2D::new(side, side, w).normalized()
}

const STREAM_MOTION_ANGLE: u64 = 1;

pub fn motion_angle(seed: u64) -> f64 {
    SeedStreams::new(seed)
        .stream(STREAM_MOTION_ANGLE)
        .random_range(-MOTION_ANGLE_MAX_DEG..=MOTION_ANGLE_MAX_DEG)
}

pub fn blur_with(img: &ImageBuffer, params: &BlurParams, seed: u64) -> Result<ImageBuffer> {
    params.validate()?;
    let kernel = match params.kind {
        BlurKind::Defocus => defocus_kernel(params.radius, params.sigma),
        BlurKind::Motion => motion_kernel(params.radius, params.sigma, motion_angle(seed)),
    };
    Ok(filter_image(img, &kernel).clip())
}

pub fn blur(img: &ImageBuffer, kind: BlurKind, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    blur_with(img, &BlurParams::for_severity(kind, severity), seed)
}
