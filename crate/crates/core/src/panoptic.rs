//! Panoptic label maps in the COCO-panoptic PNG + JSON encoding.
//!
//! The PNG stores `id = R + 256 G + 65536 B` per pixel, 0 meaning void; the
//! JSON carries a `segments_info` array of `{id, category_id, iscrowd}`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use image::{DynamicImage, ImageReader, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VOID_ID: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub id: u32,
    pub category_id: u32,
    pub is_crowd: bool,
}

/// Per-pixel segment ids plus segment metadata.
///
/// Every nonzero id in the grid has exactly one entry in `segments`, and
/// every entry covers at least one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanopticMap {
    width: usize,
    height: usize,
    ids: Vec<u32>,
    segments: Vec<SegmentInfo>,
}

impl PanopticMap {
    pub fn new(width: usize, height: usize, ids: Vec<u32>, segments: Vec<SegmentInfo>) -> Result<Self> {
        if ids.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} panoptic map needs {} ids, got {}",
                width * height,
                ids.len()
            )));
        }
        let mut declared = HashSet::new();
        for s in &segments {
            if s.id == VOID_ID {
                return Err(Error::Panoptic("segment id 0 is reserved for void".into()));
            }
            if !declared.insert(s.id) {
                return Err(Error::Panoptic(format!("duplicate segment id {}", s.id)));
            }
        }
        let present: HashSet<u32> = ids.iter().copied().filter(|&i| i != VOID_ID).collect();
        if let Some(missing) = present.iter().filter(|i| !declared.contains(i)).min() {
            return Err(Error::Panoptic(format!(
                "id {missing} appears in the label image but not in segments_info"
            )));
        }
        if let Some(empty) = segments.iter().find(|s| !present.contains(&s.id)) {
            return Err(Error::Panoptic(format!(
                "segment {} has no pixels in the label image",
                empty.id
            )));
        }
        Ok(Self {
            width,
            height,
            ids,
            segments,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn segments(&self) -> &[SegmentInfo] {
        &self.segments
    }

    pub fn segment(&self, id: u32) -> Option<&SegmentInfo> {
        self.segments.iter().find(|s| s.id == id)
    }

    /// Pixel count per segment id (void excluded).
    pub fn areas(&self) -> BTreeMap<u32, u64> {
        let mut areas = BTreeMap::new();
        for &id in &self.ids {
            if id != VOID_ID {
                *areas.entry(id).or_insert(0) += 1;
            }
        }
        areas
    }

    pub fn ensure_same_dims(&self, other: &PanopticMap) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "panoptic maps {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    /// Applies `f` to every segment id, in the grid and in the metadata.
    pub fn relabel(&self, f: impl Fn(u32) -> u32) -> Result<PanopticMap> {
        let ids = self
            .ids
            .iter()
            .map(|&i| if i == VOID_ID { VOID_ID } else { f(i) })
            .collect();
        let segments = self
            .segments
            .iter()
            .map(|s| SegmentInfo { id: f(s.id), ..*s })
            .collect();
        PanopticMap::new(self.width, self.height, ids, segments)
    }
}

#[inline]
pub fn rgb_to_id(rgb: [u8; 3]) -> u32 {
    rgb[0] as u32 + 256 * rgb[1] as u32 + 65536 * rgb[2] as u32
}

#[inline]
pub fn id_to_rgb(id: u32) -> [u8; 3] {
    [(id & 0xff) as u8, ((id >> 8) & 0xff) as u8, ((id >> 16) & 0xff) as u8]
}

#[derive(Debug, Serialize, Deserialize)]
struct SegmentJson {
    id: u32,
    category_id: u32,
    #[serde(default)]
    iscrowd: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AnnotationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file_name: Option<String>,
    segments_info: Vec<SegmentJson>,
}

pub fn load_panoptic(png_path: impl AsRef<Path>, json_path: impl AsRef<Path>) -> Result<PanopticMap> {
    let (png_path, json_path) = (png_path.as_ref(), json_path.as_ref());
    let decoded = ImageReader::open(png_path)
        .map_err(|e| Error::io(png_path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(png_path, e))?
        .decode()
        .map_err(|e| Error::decode(png_path, e))?;
    let rgb = match decoded {
        DynamicImage::ImageRgb8(buf) => buf,
        DynamicImage::ImageRgba8(_) => decoded.to_rgb8(),
        other => {
            return Err(Error::decode(
                png_path,
                format!("panoptic labels must be 8-bit RGB, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let ids = rgb.pixels().map(|p| rgb_to_id(p.0)).collect();

    let text = std::fs::read_to_string(json_path).map_err(|e| Error::io(json_path, e))?;
    let ann: AnnotationJson = serde_json::from_str(&text)
        .map_err(|e| Error::Panoptic(format!("{}: {e}", json_path.display())))?;
    let segments = ann
        .segments_info
        .into_iter()
        .map(|s| SegmentInfo {
            id: s.id,
            category_id: s.category_id,
            is_crowd: s.iscrowd != 0,
        })
        .collect();
    PanopticMap::new(w, h, ids, segments)
        .map_err(|e| Error::Panoptic(format!("{}: {e}", png_path.display())))
}

pub fn save_panoptic(map: &PanopticMap, png_path: impl AsRef<Path>, json_path: impl AsRef<Path>) -> Result<()> {
    let (png_path, json_path) = (png_path.as_ref(), json_path.as_ref());
    if let Some(s) = map.segments.iter().find(|s| s.id >= 1 << 24) {
        return Err(Error::Panoptic(format!("id {} does not fit in 24-bit RGB", s.id)));
    }
    let bytes: Vec<u8> = map.ids.iter().flat_map(|&id| id_to_rgb(id)).collect();
    let img = RgbImage::from_raw(map.width as u32, map.height as u32, bytes)
        .expect("rgb buffer length matches map size");
    img.save_with_format(png_path, image::ImageFormat::Png)
        .map_err(|e| Error::Encode(e.to_string()))?;

    let areas = map.areas();
    let ann = AnnotationJson {
        file_name: png_path.file_name().map(|n| n.to_string_lossy().into_owned()),
        segments_info: map
            .segments
            .iter()
            .map(|s| SegmentJson {
                id: s.id,
                category_id: s.category_id,
                iscrowd: s.is_crowd as u8,
                area: areas.get(&s.id).copied(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&ann)?;
    std::fs::write(json_path, text).map_err(|e| Error::io(json_path, e))
}
