//! Adverse weather: fog, rain and snow, all driven by metric depth through
//! the Koschmieder scattering model `I t + A (1 - t)`, `t = exp(-beta d)`.

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::catalog::Severity;
use super::params::{ensure, visit_rgb, ParamSet, ParamSlot};
use crate::depth::DepthMap;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::seed::SeedStreams;

/// Fog attenuation coefficients (1/m) for severities 1..=3.
pub const FOG_BETA: [f64; 3] = [0.005, 0.01, 0.02];
pub const FOG_AIRLIGHT: [f64; 3] = [0.9, 0.9, 0.9];
/// Rain rates in mm/h for severities 1..=3.
pub const RAIN_RATE: [f64; 3] = [50.0, 100.0, 200.0];
pub const RAIN_AIRLIGHT: [f64; 3] = [0.85, 0.85, 0.85];
/// Streaks per (mm/h) per megapixel; about 2% streak coverage at 200 mm/h
/// on a 1024x512 frame.
pub const RAIN_STREAK_DENSITY: f64 = 1.6;
pub const RAIN_STREAK_OPACITY: f64 = 0.7;
/// Snow veiling coefficients (1/m), kept below the fog values.
pub const SNOW_BETA: [f64; 3] = [0.002, 0.006, 0.012];
/// Near-white, slightly cool field that snow and its veil converge to.
pub const SNOW_AIRLIGHT: [f64; 3] = [0.94, 0.96, 1.0];

/// Contrast threshold behind the `ln(20) / beta` visibility rule.
pub const VISIBILITY_CONTRAST: f64 = 0.05;

/// Reference frame the size-dependent constants are expressed in.
const REFERENCE_PIXELS: f64 = 1024.0 * 512.0;

/// Meteorological visibility for attenuation `beta`, `ln(20) / beta`.
pub fn visibility_from_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "attenuation coefficient must be positive, got {beta}"
        )));
    }
    Ok((1.0 / VISIBILITY_CONTRAST).ln() / beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterParams {
    pub beta: f64,
    pub airlight: [f64; 3],
}

impl ScatterParams {
    pub fn fog(severity: Severity) -> Self {
        Self {
            beta: severity.pick(FOG_BETA),
            airlight: FOG_AIRLIGHT,
        }
    }
}

impl ParamSet for ScatterParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("beta", ParamSlot::Real(&mut self.beta));
        visit_rgb(&mut self.airlight, ["airlight_r", "airlight_g", "airlight_b"], f);
    }

    fn validate(&self) -> Result<()> {
        ensure(self.beta >= 0.0, || format!("beta must be >= 0, got {}", self.beta))?;
        ensure(self.airlight.iter().all(|a| (0.0..=1.0).contains(a)), || {
            "airlight components must lie in [0, 1]".into()
        })
    }
}

#[inline]
fn transmission(beta: f64, depth: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        (-beta * depth).exp()
    }
}

fn check_depth(img: &ImageBuffer, depth: &DepthMap) -> Result<()> {
    if img.width() == depth.width() && img.height() == depth.height() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "image {}x{} vs depth {}x{}",
            img.width(),
            img.height(),
            depth.width(),
            depth.height()
        )))
    }
}

/// `I e^(-beta d) + A (1 - e^(-beta d))` per pixel, clipped.
pub fn scatter(img: &ImageBuffer, depth: &DepthMap, params: &ScatterParams) -> Result<ImageBuffer> {
    check_depth(img, depth)?;
    params.validate()?;
    let ch = img.channels();
    let gray_a = params.airlight.iter().sum::<f64>() / 3.0;
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(ch).enumerate() {
        let t = transmission(params.beta, depth.values()[i]);
        for (c, v) in px.iter_mut().enumerate() {
            let a = if ch == 3 { params.airlight[c] } else { gray_a };
            *v = (*v * t + a * (1.0 - t)).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

pub fn fog(img: &ImageBuffer, depth: &DepthMap, severity: Severity) -> Result<ImageBuffer> {
    scatter(img, depth, &ScatterParams::fog(severity))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainParams {
    /// Rain rate in mm/h.
    pub rate: f64,
    pub density: f64,
    pub opacity: f64,
    /// Streak length as a fraction of image height at 50 mm/h.
    pub length: f64,
    pub wind_max_deg: f64,
    pub jitter_deg: f64,
    pub airlight: [f64; 3],
}

impl RainParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            rate: severity.pick(RAIN_RATE),
            density: RAIN_STREAK_DENSITY,
            opacity: RAIN_STREAK_OPACITY,
            length: 0.012,
            wind_max_deg: 10.0,
            jitter_deg: 3.0,
            airlight: RAIN_AIRLIGHT,
        }
    }

    /// Number of streaks on a `width`x`height` frame.
    pub fn streak_count(&self, width: usize, height: usize) -> usize {
        (self.density * self.rate * (width * height) as f64 / 1e6).round() as usize
    }

    /// Attenuation of the rain veil.
    pub fn veil_beta(&self) -> f64 {
        0.001 * self.rate / 50.0
    }
}

impl ParamSet for RainParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("rate", ParamSlot::Real(&mut self.rate));
        f("density", ParamSlot::Real(&mut self.density));
        f("opacity", ParamSlot::Real(&mut self.opacity));
        f("length", ParamSlot::Real(&mut self.length));
        f("wind_max_deg", ParamSlot::Real(&mut self.wind_max_deg));
        f("jitter_deg", ParamSlot::Real(&mut self.jitter_deg));
        visit_rgb(&mut self.airlight, ["airlight_r", "airlight_g", "airlight_b"], f);
    }

    fn validate(&self) -> Result<()> {
        ensure(self.rate >= 0.0 && self.density >= 0.0, || {
            "rain rate and density must be >= 0".into()
        })?;
        ensure((0.0..=1.0).contains(&self.opacity), || "opacity must lie in [0, 1]".into())?;
        ensure(self.length >= 0.0, || "streak length must be >= 0".into())?;
        ensure(self.airlight.iter().all(|a| (0.0..=1.0).contains(a)), || {
            "airlight components must lie in [0, 1]".into()
        })
    }
}

const STREAM_RAIN_WIND: u64 = 1;
const STREAM_RAIN_STREAKS: u64 = 2;

/// Streak opacity field in `[0, 1]` (before the global streak opacity).
pub fn rain_streak_field(width: usize, height: usize, params: &RainParams, seed: u64) -> Vec<f64> {
    let streams = SeedStreams::new(seed);
    let wind = params.wind_max_deg.to_radians();
    let wind = if wind > 0.0 {
        streams.stream(STREAM_RAIN_WIND).random_range(-wind..=wind)
    } else {
        0.0
    };
    let jitter = params.jitter_deg.to_radians();
    let mut rng = streams.stream(STREAM_RAIN_STREAKS);
    let mut field = vec![0.0f64; width * height];
    let base_len = params.length * height as f64 * params.rate / 50.0;

    for _ in 0..params.streak_count(width, height) {
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let len = base_len * rng.random_range(0.75..1.25);
        let sigma = rng.random_range(1.0..=3.0) / 2.0;
        let brightness = rng.random_range(0.6..=1.0);
        let angle = wind + if jitter > 0.0 { rng.random_range(-jitter..=jitter) } else { 0.0 };
        // Direction of fall, measured from the image vertical.
        let (dx, dy) = (angle.sin(), angle.cos());
        let half = len / 2.0;
        let reach = half + 3.0 * sigma;
        let x0 = (cx - reach).floor().max(0.0) as usize;
        let x1 = ((cx + reach).ceil() as usize).min(width.saturating_sub(1));
        let y0 = (cy - reach).floor().max(0.0) as usize;
        let y1 = ((cy + reach).ceil() as usize).min(height.saturating_sub(1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let along = px * dx + py * dy;
                if along.abs() > half {
                    continue;
                }
                let across = px * dy - py * dx;
                let v = brightness * (-(across * across) / (2.0 * sigma * sigma)).exp();
                let slot = &mut field[y * width + x];
                *slot = slot.max(v);
            }
        }
    }
    field
}

pub fn rain_with(img: &ImageBuffer, depth: &DepthMap, params: &RainParams, seed: u64) -> Result<ImageBuffer> {
    check_depth(img, depth)?;
    params.validate()?;
    let field = rain_streak_field(img.width(), img.height(), params, seed);
    let ch = img.channels();
    let gray_a = params.airlight.iter().sum::<f64>() / 3.0;
    let mut streaked = img.clone();
    for (i, px) in streaked.data_mut().chunks_exact_mut(ch).enumerate() {
        let m = params.opacity * field[i];
        if m == 0.0 {
            continue;
        }
        for (c, v) in px.iter_mut().enumerate() {
            let a = if ch == 3 { params.airlight[c] } else { gray_a };
            *v = (*v * (1.0 - m) + m * a).clamp(0.0, 1.0);
        }
    }
    scatter(
        &streaked,
        depth,
        &ScatterParams {
            beta: params.veil_beta(),
            airlight: params.airlight,
        },
    )
}

pub fn rain(img: &ImageBuffer, depth: &DepthMap, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    rain_with(img, depth, &RainParams::for_severity(severity), seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlakeSize {
    Small,
    Medium,
    Large,
}

/// Procedural snowflake layout. Radii are in pixels on a 1024x512 frame and
/// rescale with image area; `count` is the flake count on that frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnowMaskParams {
    pub count: u32,
    pub radius_min: f64,
    pub radius_max: f64,
    pub elongation_min: f64,
    pub elongation_max: f64,
    pub opacity_min: f64,
    pub opacity_max: f64,
    /// Maximum deviation of the shared fall direction from vertical.
    pub direction_max_deg: f64,
    /// Multiplier on the flake count; 0 gives an empty mask.
    pub flake_density: f64,
}

impl SnowMaskParams {
    pub fn for_severity(severity: Severity) -> Self {
        let (count, r, e, o) = match severity.get() {
            1 => (2500, (0.8, 1.6), (1.0, 1.3), (0.5, 0.9)),
            2 => (1400, (1.5, 3.0), (1.1, 1.8), (0.6, 0.95)),
            _ => (800, (2.5, 5.0), (1.5, 3.0), (0.7, 1.0)),
        };
        Self {
            count,
            radius_min: r.0,
            radius_max: r.1,
            elongation_min: e.0,
            elongation_max: e.1,
            opacity_min: o.0,
            opacity_max: o.1,
            direction_max_deg: 25.0,
            flake_density: 1.0,
        }
    }

    pub fn size_class(severity: Severity) -> FlakeSize {
        severity.pick([FlakeSize::Small, FlakeSize::Medium, FlakeSize::Large])
    }
}

impl ParamSet for SnowMaskParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("flake_count", ParamSlot::Count(&mut self.count));
        f("radius_min", ParamSlot::Real(&mut self.radius_min));
        f("radius_max", ParamSlot::Real(&mut self.radius_max));
        f("elongation_min", ParamSlot::Real(&mut self.elongation_min));
        f("elongation_max", ParamSlot::Real(&mut self.elongation_max));
        f("opacity_min", ParamSlot::Real(&mut self.opacity_min));
        f("opacity_max", ParamSlot::Real(&mut self.opacity_max));
        f("direction_max_deg", ParamSlot::Real(&mut self.direction_max_deg));
        f("flake_density", ParamSlot::Real(&mut self.flake_density));
    }

    fn validate(&self) -> Result<()> {
        ensure(0.0 < self.radius_min && self.radius_min <= self.radius_max, || {
            "flake radii must satisfy 0 < min <= max".into()
        })?;
        ensure(1.0 <= self.elongation_min && self.elongation_min <= self.elongation_max, || {
            "flake elongation must satisfy 1 <= min <= max".into()
        })?;
        ensure(
            0.0 < self.opacity_min && self.opacity_min <= self.opacity_max && self.opacity_max <= 1.0,
            || "flake opacities must satisfy 0 < min <= max <= 1".into(),
        )?;
        ensure(self.flake_density >= 0.0, || "flake density must be >= 0".into())
    }
}

/// Per-pixel snow opacity `z` in `[0, 1]` plus flake metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SnowMask {
    pub width: usize,
    pub height: usize,
    pub z: Vec<f64>,
    pub flakes: usize,
    pub size_class: FlakeSize,
    /// Fall direction in degrees from vertical.
    pub direction_deg: f64,
}

impl SnowMask {
    pub fn uniform(width: usize, height: usize, z: f64) -> Self {
        Self {
            width,
            height,
            z: vec![z.clamp(0.0, 1.0); width * height],
            flakes: 0,
            size_class: FlakeSize::Small,
            direction_deg: 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.z.iter().sum::<f64>() / self.z.len() as f64
    }
}

const STREAM_SNOW_DIRECTION: u64 = 1;
const STREAM_SNOW_FLAKES: u64 = 2;

pub fn snow_mask_with(
    width: usize,
    height: usize,
    params: &SnowMaskParams,
    size_class: FlakeSize,
    seed: u64,
) -> Result<SnowMask> {
    params.validate()?;
    let streams = SeedStreams::new(seed);
    let dir_max = params.direction_max_deg.to_radians();
    let direction = if dir_max > 0.0 {
        streams.stream(STREAM_SNOW_DIRECTION).random_range(-dir_max..=dir_max)
    } else {
        0.0
    };
    // Linear scale (floored so flakes stay resolvable) and a count that keeps
    // the covered fraction independent of resolution.
    let area_ratio = (width * height) as f64 / REFERENCE_PIXELS;
    let scale = area_ratio.sqrt().max(0.5);
    let flakes = (params.count as f64 * params.flake_density * area_ratio / (scale * scale)).round() as usize;

    let (ux, uy) = (direction.sin(), direction.cos());
    let mut rng = streams.stream(STREAM_SNOW_FLAKES);
    let radius = Uniform::new_inclusive(params.radius_min * scale, params.radius_max * scale)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut clear = vec![1.0f64; width * height];
    for _ in 0..flakes {
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let r = radius.sample(&mut rng);
        let elong = rng.random_range(params.elongation_min..=params.elongation_max);
        let opacity = rng.random_range(params.opacity_min..=params.opacity_max);
        let major = r * elong;
        let reach = major.ceil() + 1.0;
        let x0 = (cx - reach).floor().max(0.0) as usize;
        let x1 = ((cx + reach).ceil() as usize).min(width - 1);
        let y0 = (cy - reach).floor().max(0.0) as usize;
        let y1 = ((cy + reach).ceil() as usize).min(height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let along = (px * ux + py * uy) / major;
                let across = (px * uy - py * ux) / r;
                let rho = (along * along + across * across).sqrt();
                if rho >= 1.0 {
                    continue;
                }
                // Solid core, smooth falloff over the outer half.
                let t = ((1.0 - rho) / 0.5).min(1.0);
                let a = opacity * t * t * (3.0 - 2.0 * t);
                clear[y * width + x] *= 1.0 - a;
            }
        }
    }
    Ok(SnowMask {
        width,
        height,
        z: clear.into_iter().map(|c| (1.0 - c).clamp(0.0, 1.0)).collect(),
        flakes,
        size_class,
        direction_deg: direction.to_degrees(),
    })
}

pub fn snow_mask(width: usize, height: usize, severity: Severity, seed: u64) -> Result<SnowMask> {
    snow_mask_with(
        width,
        height,
        &SnowMaskParams::for_severity(severity),
        SnowMaskParams::size_class(severity),
        seed,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnowParams {
    pub mask: SnowMaskParams,
    pub scatter: ScatterParams,
}

impl SnowParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            mask: SnowMaskParams::for_severity(severity),
            scatter: ScatterParams {
                beta: severity.pick(SNOW_BETA),
                airlight: SNOW_AIRLIGHT,
            },
        }
    }
}

impl ParamSet for SnowParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        self.mask.visit(f);
        self.scatter.visit(f);
    }

    fn validate(&self) -> Result<()> {
        self.mask.validate()?;
        self.scatter.validate()
    }
}

/// Blends the snow mask toward `A`, then applies the depth veil:
/// `I2 = z A + (1 - z) I`, `I2' = I2 t + A (1 - t)`.
pub fn snow_composite(
    img: &ImageBuffer,
    depth: &DepthMap,
    mask: &SnowMask,
    scatter_params: &ScatterParams,
) -> Result<ImageBuffer> {
    check_depth(img, depth)?;
    if mask.width != img.width() || mask.height != img.height() {
        return Err(Error::DimensionMismatch("snow mask vs image".into()));
    }
    let ch = img.channels();
    let gray_a = scatter_params.airlight.iter().sum::<f64>() / 3.0;
    let mut flaked = img.clone();
    for (i, px) in flaked.data_mut().chunks_exact_mut(ch).enumerate() {
        let z = mask.z[i];
        if z == 0.0 {
            continue;
        }
        for (c, v) in px.iter_mut().enumerate() {
            let a = if ch == 3 { scatter_params.airlight[c] } else { gray_a };
            *v = z * a + (1.0 - z) * *v;
        }
    }
    scatter(&flaked, depth, scatter_params)
}

pub fn snow_with(img: &ImageBuffer, depth: &DepthMap, params: &SnowParams, size_class: FlakeSize, seed: u64) -> Result<ImageBuffer> {
    params.validate()?;
    let mask = snow_mask_with(img.width(), img.height(), &params.mask, size_class, seed)?;
    snow_composite(img, depth, &mask, &params.scatter)
}

pub fn snow(img: &ImageBuffer, depth: &DepthMap, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    snow_with(
        img,
        depth,
        &SnowParams::for_severity(severity),
        SnowMaskParams::size_class(severity),
        seed,
    )
}
