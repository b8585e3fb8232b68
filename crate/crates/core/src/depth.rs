//! Metric depth maps and their ingestion from 16-bit PNGs.

use std::path::Path;

use image::{DynamicImage, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resize::resize_nearest_plane;

/// Per-pixel camera distance in meters. Values are `> 0` or `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f64>,
}

/// How raw 16-bit values are turned into meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DepthMode {
    /// `depth = raw * scale`
    #[default]
    Depth,
    /// `depth = baseline_focal / (raw * scale)`
    Disparity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthIngest {
    pub mode: DepthMode,
    /// Meters (depth mode) or disparity pixels (disparity mode) per raw unit.
    pub scale: f64,
    /// Stereo baseline times focal length, in meter-pixels.
    pub baseline_focal: Option<f64>,
}

impl Default for DepthIngest {
    fn default() -> Self {
        Self {
            mode: DepthMode::Depth,
            scale: 1.0,
            baseline_focal: None,
        }
    }
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != width * height || width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} depth map needs {} values, got {}",
                width * height,
                depth.len()
            )));
        }
        if let Some(i) = depth.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::Depth(format!(
                "depth at index {i} is {} (must be > 0 or +inf)",
                depth[i]
            )));
        }
        Ok(Self {
            width,
            height,
            depth,
        })
    }

    pub fn constant(width: usize, height: usize, meters: f64) -> Result<Self> {
        Self::new(width, height, vec![meters; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut depth = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                depth.push(f(x, y));
            }
        }
        Self::new(width, height, depth)
    }

    /// Converts raw sensor values to meters and fills holes (raw 0).
    pub fn from_raw(width: usize, height: usize, raw: &[u16], ingest: DepthIngest) -> Result<Self> {
        if raw.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "raw depth has {} values for {width}x{height}",
                raw.len()
            )));
        }
        if !(ingest.scale > 0.0 && ingest.scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "depth scale must be positive, got {}",
                ingest.scale
            )));
        }
        let bf = match ingest.mode {
            DepthMode::Depth => 0.0,
            DepthMode::Disparity => match ingest.baseline_focal {
                Some(bf) if bf > 0.0 && bf.is_finite() => bf,
                _ => {
                    return Err(Error::InvalidArgument(
                        "disparity ingestion needs a positive baseline_focal".into(),
                    ))
                }
            },
        };
        let values: Vec<Option<f64>> = raw
            .iter()
            .map(|&r| {
                if r == 0 {
                    return None;
                }
                let v = r as f64 * ingest.scale;
                let d = match ingest.mode {
                    DepthMode::Depth => v,
                    DepthMode::Disparity => bf / v,
                };
                (d > 0.0).then_some(d)
            })
            .collect();
        let depth = fill_holes(width, height, values)?;
        Self::new(width, height, depth)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.depth
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.depth[y * self.width + x]
    }

    /// Nearest-neighbour resampling; depth must not blend across edges.
    pub fn resize(&self, width: usize, height: usize) -> Result<Self> {
        Self::new(
            width,
            height,
            resize_nearest_plane(&self.depth, self.width, self.height, width, height),
        )
    }
}

/// Fills `None` entries by breadth-first dilation from valid pixels (each
/// newly reached pixel takes the mean of its already-valid 8-neighbours),
/// then smooths only the filled pixels with a 3×3 median.
fn fill_holes(width: usize, height: usize, values: Vec<Option<f64>>) -> Result<Vec<f64>> {
    if values.iter().all(Option::is_none) {
        return Err(Error::Depth("no valid depth sample to fill from".into()));
    }
    let n = width * height;
    let mut known: Vec<bool> = values.iter().map(Option::is_some).collect();
    let holes: Vec<usize> = (0..n).filter(|&i| !known[i]).collect();
    let mut depth: Vec<f64> = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    if holes.is_empty() {
        return Ok(depth);
    }

    let neighbours = |i: usize| {
        let (x, y) = ((i % width) as isize, (i / width) as isize);
        (-1isize..=1)
            .flat_map(move |dy| (-1isize..=1).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| dx != 0 || dy != 0)
            .filter_map(move |(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                (nx >= 0 && ny >= 0 && nx < width as isize && ny < height as isize)
                    .then(|| ny as usize * width + nx as usize)
            })
    };

    let mut frontier: Vec<usize> = holes
        .iter()
        .copied()
        .filter(|&i| neighbours(i).any(|j| known[j]))
        .collect();
    let mut queued = vec![false; n];
    for &i in &frontier {
        queued[i] = true;
    }
    while !frontier.is_empty() {
        let filled: Vec<(usize, f64)> = frontier
            .iter()
            .map(|&i| {
                let (sum, count) = neighbours(i)
                    .filter(|&j| known[j])
                    .fold((0.0, 0usize), |(s, c), j| (s + depth[j], c + 1));
                (i, sum / count as f64)
            })
            .collect();
        for &(i, v) in &filled {
            depth[i] = v;
            known[i] = true;
        }
        let mut next = Vec::new();
        for &(i, _) in &filled {
            for j in neighbours(i) {
                if !known[j] && !queued[j] {
                    queued[j] = true;
                    next.push(j);
                }
            }
        }
        frontier = next;
    }

    let filled_snapshot = depth.clone();
    for &i in &holes {
        let mut window: Vec<f64> = std::iter::once(i)
            .chain(neighbours(i))
            .map(|j| filled_snapshot[j])
            .collect();
        window.sort_by(f64::total_cmp);
        depth[i] = window[window.len() / 2];
    }
    Ok(depth)
}

/// Reads a 16-bit grayscale PNG and converts it to meters.
pub fn load_depth(path: impl AsRef<Path>, ingest: DepthIngest) -> Result<DepthMap> {
    let path = path.as_ref();
    let decoded = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::decode(path, e))?;
    let buf = match decoded {
        DynamicImage::ImageLuma16(buf) => buf,
        other => {
            return Err(Error::decode(
                path,
                format!("depth maps must be 16-bit grayscale, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    DepthMap::from_raw(w, h, buf.as_raw(), ingest)
}

/// Writes raw 16-bit depth values as a grayscale PNG.
pub fn save_raw_depth(path: impl AsRef<Path>, width: usize, height: usize, raw: &[u16]) -> Result<()> {
    let path = path.as_ref();
    let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(width as u32, height as u32, raw.to_vec())
        .ok_or_else(|| Error::DimensionMismatch("raw depth length".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Encode(e.to_string()))
}
