//! Lens obstructions: mud splashes and water droplets.

use rand::Rng;

use super::catalog::Severity;
use super::params::{ensure, visit_rgb, ParamSet, ParamSlot};
use crate::error::Result;
use crate::image::ImageBuffer;
use crate::kernel::{dilate_disk, gaussian_blur, gaussian_blur_plane};
use crate::seed::SeedStreams;

/// Dilation kernel sizes in pixels on a 1024-pixel-wide frame.
pub const MUD_KERNEL: [f64; 3] = [12.0, 24.0, 36.0];
pub const MUD_INTENSITY: f64 = 0.7;
pub const MUD_COLOR: [f64; 3] = [0.36, 0.27, 0.17];
/// Fewer, larger splashes as the kernel grows.
const MUD_BLOBS: [u32; 3] = [6, 4, 3];
const REFERENCE_WIDTH: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MudParams {
    pub kernel: f64,
    pub intensity: f64,
    pub blobs: u32,
    pub color: [f64; 3],
}

impl MudParams {
    pub fn for_severity(severity: Severity) -> Self {
        Self {
            kernel: severity.pick(MUD_KERNEL),
            intensity: MUD_INTENSITY,
            blobs: severity.pick(MUD_BLOBS),
            color: MUD_COLOR,
        }
    }
}

impl ParamSet for MudParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("kernel", ParamSlot::Real(&mut self.kernel));
        f("intensity", ParamSlot::Real(&mut self.intensity));
        f("blobs", ParamSlot::Count(&mut self.blobs));
        visit_rgb(&mut self.color, ["color_r", "color_g", "color_b"], f);
    }

    fn validate(&self) -> Result<()> {
        ensure(self.kernel > 0.0, || "mud kernel must be positive".into())?;
        ensure((0.0..=1.0).contains(&self.intensity), || "mud intensity must lie in [0, 1]".into())?;
        ensure(self.color.iter().all(|c| (0.0..=1.0).contains(c)), || {
            "mud colour must lie in [0, 1]".into()
        })
    }
}

const STREAM_MUD_NOISE: u64 = 1;
const STREAM_MUD_BLOBS: u64 = 2;

/// Soft occlusion mask in `[0, 1]`: noisy disks (thresholded low-pass noise
/// around random centers), dilated by the severity kernel and feathered.
pub fn mud_mask(width: usize, height: usize, params: &MudParams, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let streams = SeedStreams::new(seed);
    let kernel = (params.kernel * width as f64 / REFERENCE_WIDTH).max(1.0);

    let mut rng = streams.stream(STREAM_MUD_NOISE);
    let white: Vec<f64> = (0..width * height).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut noise = gaussian_blur_plane(&white, width, height, (kernel / 2.0).max(1.0));
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let std = (noise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / noise.len() as f64).sqrt();
    if std > 0.0 {
        noise.iter_mut().for_each(|v| *v = (*v - mean) / std);
    }

    let mut rng = streams.stream(STREAM_MUD_BLOBS);
    let mut core = vec![false; width * height];
    for _ in 0..params.blobs {
        let cx = rng.random_range(0.1..0.9) * width as f64;
        let cy = rng.random_range(0.1..0.9) * height as f64;
        let radius = kernel * rng.random_range(1.0..2.0);
        let reach = (radius * 1.5).ceil();
        let x0 = (cx - reach).max(0.0) as usize;
        let x1 = ((cx + reach) as usize).min(width - 1);
        let y0 = (cy - reach).max(0.0) as usize;
        let y1 = ((cy + reach) as usize).min(height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let i = y * width + x;
                let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt() / radius;
                if d + 0.35 * noise[i] < 1.0 {
                    core[i] = true;
                }
            }
        }
    }
    let dilated = dilate_disk(&core, width, height, kernel / 2.0);
    let hard: Vec<f64> = dilated.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    let soft = gaussian_blur_plane(&hard, width, height, (kernel / 6.0).max(0.5));
    Ok(soft.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Blends `(1 - k m) I + k m C` with intensity `k` and mud colour `C`.
pub fn mud_composite(img: &ImageBuffer, mask: &[f64], params: &MudParams) -> ImageBuffer {
    let ch = img.channels();
    let gray = params.color.iter().sum::<f64>() / 3.0;
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(ch).enumerate() {
        let m = params.intensity * mask[i];
        if m == 0.0 {
            continue;
        }
        for (c, v) in px.iter_mut().enumerate() {
            let col = if ch == 3 { params.color[c] } else { gray };
            *v = ((1.0 - m) * *v + m * col).clamp(0.0, 1.0);
        }
    }
    out
}

pub fn mud_with(img: &ImageBuffer, params: &MudParams, seed: u64) -> Result<ImageBuffer> {
    let mask = mud_mask(img.width(), img.height(), params, seed)?;
    Ok(mud_composite(img, &mask, params))
}

pub fn mud_occlusion(img: &ImageBuffer, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    mud_with(img, &MudParams::for_severity(severity), seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropletParams {
    pub count: u32,
    /// Droplet radius range as fractions of image height.
    pub radius_min: f64,
    pub radius_max: f64,
    pub magnification: f64,
    /// Blur sigma as a fraction of image height.
    pub blur: f64,
    /// Darkening at the outer rim.
    pub rim_darkening: f64,
}

impl DropletParams {
    pub fn for_severity(severity: Severity) -> Self {
        // Asset levels {2, 3, 4}, four droplets per level.
        let level = severity.pick([2, 3, 4]);
        Self {
            count: 4 * level,
            radius_min: 0.03,
            radius_max: 0.08,
            magnification: 1.3,
            blur: 0.006,
            rim_darkening: 0.35,
        }
    }
}

impl ParamSet for DropletParams {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>)) {
        f("count", ParamSlot::Count(&mut self.count));
        f("radius_min", ParamSlot::Real(&mut self.radius_min));
        f("radius_max", ParamSlot::Real(&mut self.radius_max));
        f("magnification", ParamSlot::Real(&mut self.magnification));
        f("blur", ParamSlot::Real(&mut self.blur));
        f("rim_darkening", ParamSlot::Real(&mut self.rim_darkening));
    }

    fn validate(&self) -> Result<()> {
        ensure(0.0 < self.radius_min && self.radius_min <= self.radius_max, || {
            "droplet radii must satisfy 0 < min <= max".into()
        })?;
        ensure(self.magnification > 0.0, || "magnification must be positive".into())?;
        ensure((0.0..=1.0).contains(&self.rim_darkening), || {
            "rim darkening must lie in [0, 1]".into()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Droplet {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Droplet {
    /// Normalized elliptical radius of a pixel center.
    #[inline]
    pub fn rho(&self, x: usize, y: usize) -> f64 {
        let dx = (x as f64 + 0.5 - self.cx) / self.rx;
        let dy = (y as f64 + 0.5 - self.cy) / self.ry;
        (dx * dx + dy * dy).sqrt()
    }
}

const STREAM_DROPLETS: u64 = 1;

pub fn droplet_layout(width: usize, height: usize, params: &DropletParams, seed: u64) -> Vec<Droplet> {
    let mut rng = SeedStreams::new(seed).stream(STREAM_DROPLETS);
    (0..params.count)
        .map(|_| {
            let r = rng.random_range(params.radius_min..=params.radius_max) * height as f64;
            let r = r.max(2.0);
            Droplet {
                cx: rng.random_range(0.0..width as f64),
                cy: rng.random_range(0.0..height as f64),
                rx: r * rng.random_range(0.8..=1.0),
                ry: r,
            }
        })
        .collect()
}

fn bilinear(img: &ImageBuffer, x: f64, y: f64, c: usize) -> f64 {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let x = (x - 0.5).clamp(0.0, w - 1.0);
    let y = (y - 0.5).clamp(0.0, h - 1.0);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(img.width() - 1), (y0 + 1).min(img.height() - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
    let bottom = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Each droplet shows a blurred, vertically flipped and magnified view of its
/// neighbourhood, darkened toward the rim and feathered at the edge. Pixels
/// outside every droplet are untouched.
pub fn droplets_with(img: &ImageBuffer, params: &DropletParams, seed: u64) -> Result<ImageBuffer> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let blurred = gaussian_blur(img, (params.blur * h as f64).max(1.0));
    let mut out = img.clone();
    for d in droplet_layout(w, h, params, seed) {
        let x0 = (d.cx - d.rx).floor().max(0.0) as usize;
        let x1 = ((d.cx + d.rx).ceil() as usize).min(w - 1);
        let y0 = (d.cy - d.ry).floor().max(0.0) as usize;
        let y1 = ((d.cy + d.ry).ceil() as usize).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let rho = d.rho(x, y);
                if rho >= 1.0 {
                    continue;
                }
                let alpha = if rho <= 0.85 {
                    1.0
                } else {
                    let t = (1.0 - rho) / 0.15;
                    t * t * (3.0 - 2.0 * t)
                };
                let rim = if rho <= 0.8 {
                    1.0
                } else {
                    1.0 - params.rim_darkening * (rho - 0.8) / 0.2
                };
                let ox = (x as f64 + 0.5 - d.cx) / params.magnification;
                let oy = (y as f64 + 0.5 - d.cy) / params.magnification;
                let (sx, sy) = (d.cx + ox, d.cy - oy);
                for c in 0..img.channels() {
                    let refracted = bilinear(&blurred, sx, sy, c) * rim;
                    let v = out.get(x, y, c);
                    out.set(x, y, c, (alpha * refracted + (1.0 - alpha) * v).clamp(0.0, 1.0));
                }
            }
        }
    }
    Ok(out)
}

pub fn lens_droplets(img: &ImageBuffer, severity: Severity, seed: u64) -> Result<ImageBuffer> {
    droplets_with(img, &DropletParams::for_severity(severity), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sev(s: u8) -> Severity {
        Severity::new(s).unwrap()
    }

    fn scene() -> ImageBuffer {
        ImageBuffer::from_fn(96, 64, 3, |x, y, c| ((x * 3 + y * 7 + c * 11) % 64) as f64 / 63.0)
    }

    #[test]
    fn full_cover_blend_arithmetic() {
        let img = ImageBuffer::filled(2, 2, 3, 0.8);
        let p = MudParams::for_severity(sev(1));
        let out = mud_composite(&img, &[1.0; 4], &p);
        for px in out.data().chunks_exact(3) {
            for (v, c) in px.iter().zip(MUD_COLOR) {
                assert!((v - (0.3 * 0.8 + 0.7 * c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uncovered_pixels_unchanged() {
        let img = scene();
        let p = MudParams::for_severity(sev(2));
        let mask = mud_mask(96, 64, &p, 1).unwrap();
        let out = mud_composite(&img, &mask, &p);
        for (i, &m) in mask.iter().enumerate() {
            if m == 0.0 {
                assert_eq!(out.data()[3 * i..3 * i + 3], img.data()[3 * i..3 * i + 3]);
            }
        }
        assert!(mask.iter().any(|&m| m > 0.5));
    }

    #[test]
    fn droplet_count_grows() {
        let counts: Vec<u32> = Severity::ALL.iter().map(|&s| DropletParams::for_severity(s).count).collect();
        assert!(counts[0] < counts[1] && counts[1] < counts[2]);
    }

    #[test]
    fn outside_droplets_unchanged() {
        let img = scene();
        let p = DropletParams::for_severity(sev(1));
        let out = droplets_with(&img, &p, 8).unwrap();
        let drops = droplet_layout(96, 64, &p, 8);
        let mut inside_changed = false;
        for y in 0..64 {
            for x in 0..96 {
                let inside = drops.iter().any(|d| d.rho(x, y) < 1.0);
                if !inside {
                    assert_eq!(out.pixel(x, y), img.pixel(x, y));
                } else if out.pixel(x, y) != img.pixel(x, y) {
                    inside_changed = true;
                }
            }
        }
        assert!(inside_changed);
    }
}
