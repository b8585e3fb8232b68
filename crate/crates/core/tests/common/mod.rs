#![allow(dead_code)]

use std::path::{Path, PathBuf};

use camrobust::depth::save_raw_depth;
use camrobust::{load_image, DepthMap, ImageBuffer};

pub const DEPTH_SCALE: f64 = 0.01;

pub fn natural_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/natural")
}

/// The bundled 256x256 natural images, sorted by stem.
pub fn natural_images() -> Vec<(String, ImageBuffer)> {
    let mut paths: Vec<_> = std::fs::read_dir(natural_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            (stem, load_image(&p).unwrap())
        })
        .collect()
}

/// Road-scene-like depth: near at the bottom row, ~300 m at the top.
pub fn ramp_depth_value(y: usize, h: usize) -> f64 {
    let t = 1.0 - y as f64 / h as f64;
    3.0 + 300.0 * t * t * t
}

pub fn ramp_depth(w: usize, h: usize) -> DepthMap {
    DepthMap::from_fn(w, h, |_, y| ramp_depth_value(y, h)).unwrap()
}

/// Writes the ramp as a 16-bit PNG in centimeters.
pub fn write_ramp_depth(path: &Path, w: usize, h: usize) {
    let mut raw = Vec::with_capacity(w * h);
    for y in 0..h {
        let v = (ramp_depth_value(y, h) / DEPTH_SCALE).round() as u16;
        raw.extend(std::iter::repeat(v).take(w));
    }
    save_raw_depth(path, w, h, &raw).unwrap();
}

pub fn flat(w: usize, h: usize, v: f64) -> ImageBuffer {
    ImageBuffer::filled(w, h, 3, v)
}

/// Smooth colored test pattern in `[0.1, 0.9]`.
pub fn pattern(w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, 3, |x, y, c| {
        let (fx, fy) = (x as f64 / w as f64, y as f64 / h as f64);
        let v = match c {
            0 => (fx * 7.0).sin() * (fy * 5.0).cos(),
            1 => ((fx + fy) * 9.0).cos(),
            _ => (fx * 3.0 - fy * 11.0).sin(),
        };
        0.5 + 0.4 * v
    })
}
