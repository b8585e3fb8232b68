//! Unfavourable-light operators: low light, night light, extreme light and
//! strong light.

use rand::Rng;

use super::catalog::Severity;
use super::params::{ensure, ParamSet, ParamSlot};
use crate::error::Result;
use crate::image::ImageBuffer;
use crate::seed::SeedStreams;

/// Weight of the original value kept for pixels brighter than the
/// highlight threshold.
pub const HIGHLIGHT_KEEP: f64 = 0.8;

const LOW_LIGHT_ALPHA: [f64; 3] = [-0.1, -0.2, -0.3];
const CURVE_ITERATIONS: u32 = 8;
const HIGHLIGHT_THRESHOLD: f64 = 0.9;
/// Strength of the night-light darkening relative to low light.
const NIGHT_CURVE_SCALE: f64 = 0.75;
const STRONG_LIGHT_SHIFT: [f64; 3] = [0.1, 0.3, 0.5];
const LAMP_COLOR: [f64; 3] = [1.0, 0.85, 0.6];

/// Darkening curve `v <- v + alpha v (1 - v)` iterated `iterations` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightCurveParams {
    pub alpha: f64,
    pub iterations: u32,
    pub highlight_threshold: f64,
}

impl LightCurveParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            alpha: severity.pick(LOW_LIGHT_ALPHA),
            iterations: CURVE_ITERATIONS,
            highlight_threshold: HIGHLIGHT_THRESHOLD,
        }
    }
}

impl ParamSet for LightCurveParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("alpha", ParamSlot::Real(&mut self.alpha));
        f("iterations", ParamSlot::Count(&mut self.iterations));
        f("highlight_threshold", ParamSlot::Real(&mut self.highlight_threshold));
    }

    fn validate(&self) -> Result<()> {
        ensure(self.alpha < 0.0 && self.alpha > -1.0, || {
            format!("curve alpha must lie in (-1, 0), got {}", self.alpha)
        })?;
        ensure(self.iterations >= 1, || "curve iterations must be >= 1".into())?;
        ensure((0.0..=1.0).contains(&self.highlight_threshold), || {
            "highlight threshold must lie in [0, 1]".into()
        })
    }
}

#[inline]
pub fn darken_curve(v: f64, alpha: f64, iterations: u32) -> f64 {
    (0..iterations).fold(v, |v, _| v + alpha * v * (1.0 - v))
}

/// Applies the darkening curve; pixels whose luma exceeds the highlight
/// threshold keep [`HIGHLIGHT_KEEP`] of their original value.
pub fn darken_with(img: &ImageBuffer, params: &LightCurveParams) -> Result<ImageBuffer> {
    img.ensure_rgb("low-light darkening")?;
    params.validate()?;
    let luma = img.luma();
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        let keep = if luma.data()[i] > params.highlight_threshold {
            HIGHLIGHT_KEEP
        } else {
            0.0
        };
        for v in px {
            let dark = darken_curve(*v, params.alpha, params.iterations);
            *v = (keep * *v + (1.0 - keep) * dark).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

pub fn darken_lowlight(img: &ImageBuffer, severity: Severity) -> Result<ImageBuffer> {
    darken_with(img, &LightCurveParams::for_severity(severity))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NightParams {
    pub curve: LightCurveParams,
    /// Number of light sources.
    pub lights: u32,
    /// Halo Gaussian sigma as a fraction of image height.
    pub halo_radius: f64,
    pub halo_gain: f64,
    /// Glare ray length as a fraction of image height.
    pub streak_length: f64,
    pub streak_gain: f64,
    /// Share of light sources placed on the brightest input pixels.
    pub bright_share: f64,
}

impl NightParams {
    pub fn for_severity(severity: Severity) -> Self {
        let mut curve = LightCurveParams::for_severity(severity);
        curve.alpha *= NIGHT_CURVE_SCALE;
        Self {
            curve,
            lights: severity.pick([8, 12, 16]),
            halo_radius: severity.pick([0.015, 0.02, 0.025]),
            halo_gain: severity.pick([0.5, 0.65, 0.8]),
            streak_length: severity.pick([0.05, 0.08, 0.12]),
            streak_gain: 0.45,
            bright_share: 0.5,
        }
    }
}

impl ParamSet for NightParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("night_alpha", ParamSlot::Real(&mut self.curve.alpha));
        f("night_iterations", ParamSlot::Count(&mut self.curve.iterations));
        f("highlight_threshold", ParamSlot::Real(&mut self.curve.highlight_threshold));
        f("lights", ParamSlot::Count(&mut self.lights));
        f("halo_radius", ParamSlot::Real(&mut self.halo_radius));
        f("halo_gain", ParamSlot::Real(&mut self.halo_gain));
        f("streak_length", ParamSlot::Real(&mut self.streak_length));
        f("streak_gain", ParamSlot::Real(&mut self.streak_gain));
        f("bright_share", ParamSlot::Real(&mut self.bright_share));
    }

    fn validate(&self) -> Result<()> {
        self.curve.validate()?;
        ensure(self.halo_radius > 0.0 && self.streak_length >= 0.0, || {
            "halo radius must be positive and streak length non-negative".into()
        })?;
        ensure(self.halo_gain >= 0.0 && self.streak_gain >= 0.0, || {
            "glare gains must be non-negative".into()
        })?;
        ensure((0.0..=1.0).contains(&self.bright_share), || {
            "bright_share must lie in [0, 1]".into()
        })
    }
}

const STREAM_BRIGHT_PICK: u64 = 1;
const STREAM_STREET_PICK: u64 = 2;
const STREAM_GLARE_ANGLE: u64 = 3;

/// Chooses distinct light-source centers: a share among the brightest 1% of
/// pixels, the rest at random street-level positions.
fn light_centers(img: &ImageBuffer, params: &NightParams, streams: &SeedStreams) -> Vec<(usize, usize)> {
    let (w, h) = (img.width(), img.height());
    let wanted = (params.lights as usize).min(w * h);
    let luma = img.luma();
    let mut order: Vec<usize> = (0..w * h).collect();
    order.sort_by(|&a, &b| luma.data()[b].total_cmp(&luma.data()[a]).then(a.cmp(&b)));
    let bright_pool = &order[..((w * h) / 100).max(1)];

    let mut taken = std::collections::HashSet::new();
    let mut centers = Vec::with_capacity(wanted);
    let n_bright = ((wanted as f64 * params.bright_share).round() as usize).min(wanted);

    let mut rng = streams.stream(STREAM_BRIGHT_PICK);
    let mut attempts = 0;
    while centers.len() < n_bright && attempts < 50 * wanted {
        attempts += 1;
        let i = bright_pool[rng.random_range(0..bright_pool.len())];
        if taken.insert(i) {
            centers.push((i % w, i / w));
        }
    }

    let mut rng = streams.stream(STREAM_STREET_PICK);
    let y_lo = ((0.3 * h as f64) as usize).min(h - 1);
    let y_hi = ((0.6 * h as f64).ceil() as usize).clamp(y_lo + 1, h);
    let mut attempts = 0;
    while centers.len() < wanted && attempts < 50 * wanted {
        attempts += 1;
        let x = rng.random_range(0..w);
        let y = rng.random_range(y_lo..y_hi);
        if taken.insert(y * w + x) {
            centers.push((x, y));
        }
    }
    // Tiny images: fall back to the first free pixels in scan order.
    for i in 0..w * h {
        if centers.len() >= wanted {
            break;
        }
        if taken.insert(i) {
            centers.push((i % w, i / w));
        }
    }
    centers
}

/// Adds halos, 4-ray glare and saturated cores for each light center.
fn add_glare(out: &mut ImageBuffer, centers: &[(usize, usize)], params: &NightParams, ray_angle: f64) {
    let (w, h) = (out.width(), out.height());
    let sigma = (params.halo_radius * h as f64).max(1.0);
    let ray_len = params.streak_length * h as f64;
    let ray_width = (0.002 * h as f64).max(0.7);
    let core = (0.006 * h as f64).max(2.0);
    let (ca, sa) = (ray_angle.cos(), ray_angle.sin());
    let reach = (4.0 * sigma).max(ray_len).ceil() as isize;

    for &(cx, cy) in centers {
        let (x0, x1) = ((cx as isize - reach).max(0), (cx as isize + reach).min(w as isize - 1));
        let (y0, y1) = ((cy as isize - reach).max(0), (cy as isize + reach).min(h as isize - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = ((x - cx as isize) as f64, (y - cy as isize) as f64);
                let r2 = dx * dx + dy * dy;
                let mut gain = params.halo_gain * (-r2 / (2.0 * sigma * sigma)).exp();
                if ray_len > 0.0 {
                    let u = dx * ca + dy * sa;
                    let v = -dx * sa + dy * ca;
                    for (along, across) in [(u.abs(), v), (v.abs(), u)] {
                        if along <= ray_len {
                            gain += params.streak_gain
                                * (-3.0 * along / ray_len).exp()
                                * (-(across * across) / (2.0 * ray_width * ray_width)).exp();
                        }
                    }
                }
                let px = out.pixel_mut(x as usize, y as usize);
                if r2 <= core * core {
                    px.iter_mut().for_each(|v| *v = 1.0);
                } else {
                    for (v, c) in px.iter_mut().zip(LAMP_COLOR) {
                        *v = (*v + gain * c).clamp(0.0, 1.0);
                    }
                }
            }
        }
    }
}

pub fn night_with(img: &ImageBuffer, params: &NightParams, seed: u64) -> Result<ImageBuffer> {
    img.ensure_rgb("night light")?;
    params.validate()?;
    let streams = SeedStreams::new(seed);
    let centers = light_centers(img, params, &streams);
    let ray_angle = streams
        .stream(STREAM_GLARE_ANGLE)
        .random_range(0.0..std::f64::consts::FRAC_PI_2);
    let mut out = darken_with(img, &params.curve)?;
    add_glare(&mut out, &centers, params, ray_angle);
    Ok(out)
}

pub fn synth_nightlight(img: &ImageBuffer, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    night_with(img, &NightParams::for_severity(severity), seed)
}

/// Low-light darkening of the night-light image.
pub fn extreme_with(
    img: &ImageBuffer,
    night: &NightParams,
    curve: &LightCurveParams,
    seed: u64,
) -> Result<ImageBuffer> {
    darken_with(&night_with(img, night, seed)?, curve)
}

pub fn synth_extremelight(img: &ImageBuffer, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    extreme_with(
        img,
        &NightParams::for_severity(severity),
        &LightCurveParams::for_severity(severity),
        seed,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongLightParams {
    /// Amount added to the HSV value channel.
    pub shift: f64,
}

impl StrongLightParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            shift: severity.pick(STRONG_LIGHT_SHIFT),
        }
    }
}

impl ParamSet for StrongLightParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("shift", ParamSlot::Real(&mut self.shift));
    }
}

pub fn rgb_to_hsv(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    [h, s, max]
}

pub fn hsv_to_rgb(hsv: [f64; 3]) -> [f64; 3] {
    let [h, s, v] = hsv;
    let h6 = (h.rem_euclid(1.0)) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as u8 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

pub fn strong_light_with(img: &ImageBuffer, params: &StrongLightParams) -> Result<ImageBuffer> {
    img.ensure_rgb("strong light")?;
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(3) {
        let mut hsv = rgb_to_hsv([px[0], px[1], px[2]]);
        hsv[2] = (hsv[2] + params.shift).clamp(0.0, 1.0);
        let rgb = hsv_to_rgb(hsv);
        for (v, c) in px.iter_mut().zip(rgb) {
            *v = c.clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

pub fn brighten_stronglight(img: &ImageBuffer, severity: Severity) -> Result<ImageBuffer> {
    strong_light_with(img, &StrongLightParams::for_severity(severity))
}
