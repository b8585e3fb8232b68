//! Separable Keys bicubic resampling.

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Keys cubic convolution parameter (Catmull-Rom).
pub const KEYS_A: f64 = -0.5;

#[inline]
fn keys_weight(t: f64) -> f64 {
    let t = t.abs();
    let a = KEYS_A;
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// Tap indices and weights for each output coordinate along one axis.
fn taps(src_len: usize, dst_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = src_len as f64 / dst_len as f64;
    let last = src_len as isize - 1;
    (0..dst_len)
        .map(|x| {
            let src = (x as f64 + 0.5) * scale - 0.5;
            let base = src.floor();
            let t = src - base;
            let base = base as isize;
            let mut idx = [0usize; 4];
            let mut w = [0.0; 4];
            for k in 0..4 {
                let offset = k as isize - 1;
                idx[k] = (base + offset).clamp(0, last) as usize;
                w[k] = keys_weight(t - offset as f64);
            }
            (idx, w)
        })
        .collect()
}

/// Resizes with Keys bicubic interpolation (a = -0.5), pixel-center
/// alignment and edge clamping. The result is clipped to `[0, 1]`.
pub fn resize_bicubic(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    if width < 4 || height < 4 {
        return Err(Error::InvalidArgument(format!(
            "target size {width}x{height} is degenerate (minimum 4x4)"
        )));
    }
    let ch = img.channels();
    let (sw, sh) = (img.width(), img.height());
    let xt = taps(sw, width);
    let yt = taps(sh, height);

    // Horizontal pass: sh rows of `width` pixels.
    let src = img.data();
    let mut tmp = vec![0.0; width * sh * ch];
    for y in 0..sh {
        for (x, (idx, w)) in xt.iter().enumerate() {
            for c in 0..ch {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += w[k] * src[(y * sw + idx[k]) * ch + c];
                }
                tmp[(y * width + x) * ch + c] = acc;
            }
        }
    }

    let mut out = vec![0.0; width * height * ch];
    for (y, (idx, w)) in yt.iter().enumerate() {
        for x in 0..width {
            for c in 0..ch {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += w[k] * tmp[(idx[k] * width + x) * ch + c];
                }
                out[(y * width + x) * ch + c] = acc.clamp(0.0, 1.0);
            }
        }
    }
    ImageBuffer::new(width, height, ch, out)
}

/// Nearest-neighbour resampling of a scalar field, pixel-center aligned.
pub(crate) fn resize_nearest_plane(
    data: &[f64],
    sw: usize,
    sh: usize,
    width: usize,
    height: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let sy = (((y as f64 + 0.5) * sh as f64 / height as f64) as usize).min(sh - 1);
        for x in 0..width {
            let sx = (((x as f64 + 0.5) * sw as f64 / width as f64) as usize).min(sw - 1);
            out.push(data[sy * sw + sx]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let s = keys_weight(t + 1.0) + keys_weight(t) + keys_weight(1.0 - t) + keys_weight(2.0 - t);
            assert!((s - 1.0).abs() < 1e-12, "t={t} sum={s}");
        }
    }

    #[test]
    fn constant_stays_constant() {
        let img = ImageBuffer::filled(13, 9, 3, 0.37);
        for (w, h) in [(4, 4), (26, 18), (7, 31)] {
            let out = resize_bicubic(&img, w, h).unwrap();
            assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-12));
        }
    }

    #[test]
    fn identity_size_is_exact() {
        let img = ImageBuffer::from_fn(9, 6, 3, |x, y, c| ((x * 7 + y * 3 + c) % 11) as f64 / 10.0);
        let out = resize_bicubic(&img, 9, 6).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn halves_2048x1024_to_default_working_size() {
        let img = ImageBuffer::from_fn(2048, 1024, 1, |x, y, _| ((x ^ y) & 0xff) as f64 / 255.0);
        let out = resize_bicubic(&img, 1024, 512).unwrap();
        assert_eq!((out.width(), out.height()), (1024, 512));
        let (lo, hi) = out.min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
    }

    #[test]
    fn degenerate_target_rejected() {
        let img = ImageBuffer::filled(8, 8, 1, 0.5);
        assert!(resize_bicubic(&img, 3, 8).is_err());
    }
}
