//! PNG/JPEG decoding and encoding of [`ImageBuffer`]s.

use std::io::Cursor;
use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// On-disk encoding for [`save_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Jpeg { quality: u8 },
}

/// 8-bit quantization: `round(255 v)` with halves rounded away from zero,
/// after clamping to `[0, 1]`.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
pub fn dequantize(b: u8) -> f64 {
    b as f64 / 255.0
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| Error::decode(path, e))?;
    from_dynamic(decoded).map_err(|reason| Error::decode(path, reason))
}

/// Decodes an in-memory PNG or JPEG stream.
pub fn decode_image_bytes(bytes: &[u8]) -> Result<ImageBuffer> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::decode("<memory>", e))?;
    from_dynamic(decoded).map_err(|reason| Error::decode("<memory>", reason))
}

fn from_dynamic(img: DynamicImage) -> std::result::Result<ImageBuffer, String> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, bytes) = match img {
        DynamicImage::ImageLuma8(buf) => (1, buf.into_raw()),
        DynamicImage::ImageLumaA8(buf) => (1, buf.into_raw().chunks_exact(2).map(|p| p[0]).collect()),
        DynamicImage::ImageRgb8(buf) => (3, buf.into_raw()),
        DynamicImage::ImageRgba8(buf) => (
            3,
            buf.into_raw()
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect(),
        ),
        other => {
            return Err(format!(
                "unsupported sample layout {:?}; only 8-bit images are accepted",
                other.color()
            ))
        }
    };
    let data = bytes.into_iter().map(dequantize).collect();
    ImageBuffer::new(w, h, channels, data).map_err(|e| e.to_string())
}

fn color_type(img: &ImageBuffer) -> ExtendedColorType {
    if img.channels() == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    }
}

/// Encodes `img` into an in-memory byte stream.
pub fn encode_image(img: &ImageBuffer, format: ImageFormat) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let mut out = Vec::new();
    match format {
        ImageFormat::Png => PngEncoder::new(&mut out)
            .write_image(&bytes, w, h, color_type(img))
            .map_err(|e| Error::Encode(e.to_string()))?,
        ImageFormat::Jpeg { quality } => {
            if !(1..=100).contains(&quality) {
                return Err(Error::InvalidArgument(format!(
                    "jpeg quality {quality} outside 1..=100"
                )));
            }
            JpegEncoder::new_with_quality(Cursor::new(&mut out), quality)
                .encode(&bytes, w, h, color_type(img))
                .map_err(|e| Error::Encode(e.to_string()))?
        }
    }
    Ok(out)
}

pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_image(img, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
