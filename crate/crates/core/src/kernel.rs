//! Convolution kernels and filters shared by operators and metrics.

use crate::image::ImageBuffer;

/// Mirror index without repeating the edge sample (`dcb|abcd|cba`).
#[inline]
pub fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= len as isize {
        m = period - m;
    }
    m as usize
}

/// Dense odd-sized 2-D kernel stored row-major, centered on its middle tap.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    pub width: usize,
    pub height: usize,
    pub weights: Vec<f64>,
}

impl Kernel2D {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Self {
        assert!(width % 2 == 1 && height % 2 == 1, "kernel sides must be odd");
        assert_eq!(weights.len(), width * height);
        Self {
            width,
            height,
            weights,
        }
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalized(mut self) -> Self {
        let s = self.sum();
        for w in &mut self.weights {
            *w /= s;
        }
        self
    }

    /// Full 2-D convolution of `other` into `self` (sizes add minus one).
    pub fn convolve(&self, other: &Kernel2D) -> Kernel2D {
        let (w, h) = (self.width + other.width - 1, self.height + other.height - 1);
        let mut out = vec![0.0; w * h];
        for y in 0..self.height {
            for x in 0..self.width {
                let a = self.weights[y * self.width + x];
                if a == 0.0 {
                    continue;
                }
                for v in 0..other.height {
                    for u in 0..other.width {
                        out[(y + v) * w + x + u] += a * other.weights[v * other.width + u];
                    }
                }
            }
        }
        Kernel2D::new(w, h, out)
    }
}

/// Correlates one plane with `kernel` using mirrored borders.
pub fn filter_plane(plane: &[f64], width: usize, height: usize, kernel: &Kernel2D) -> Vec<f64> {
    let (kw, kh) = (kernel.width as isize, kernel.height as isize);
    let (rx, ry) = (kw / 2, kh / 2);
    let taps: Vec<(isize, isize, f64)> = (0..kh)
        .flat_map(|v| (0..kw).map(move |u| (u, v)))
        .filter_map(|(u, v)| {
            let w = kernel.weights[(v * kw + u) as usize];
            (w != 0.0).then_some((u - rx, v - ry, w))
        })
        .collect();
    let xs: Vec<Vec<usize>> = taps
        .iter()
        .map(|&(dx, _, _)| {
            (0..width as isize)
                .map(|x| reflect_index(x + dx, width))
                .collect()
        })
        .collect();
    let mut out = vec![0.0; width * height];
    for y in 0..height as isize {
        let row = &mut out[y as usize * width..(y as usize + 1) * width];
        for (t, &(_, dy, w)) in taps.iter().enumerate() {
            let sy = reflect_index(y + dy, height);
            let src = &plane[sy * width..(sy + 1) * width];
            let map = &xs[t];
            for (o, &sx) in row.iter_mut().zip(map) {
                *o += w * src[sx];
            }
        }
    }
    out
}

/// Applies `kernel` to every channel of `img`. The result is not clipped.
pub fn filter_image(img: &ImageBuffer, kernel: &Kernel2D) -> ImageBuffer {
    let planes: Vec<Vec<f64>> = (0..img.channels())
        .map(|c| filter_plane(&img.plane(c), img.width(), img.height(), kernel))
        .collect();
    ImageBuffer::from_planes(img.width(), img.height(), &planes).expect("same-size planes")
}

/// Normalized 1-D Gaussian taps for offsets `-radius..=radius`.
pub fn gaussian_1d(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable filtering with mirrored borders.
pub fn separable_filter(plane: &[f64], width: usize, height: usize, kx: &[f64], ky: &[f64]) -> Vec<f64> {
    let rx = (kx.len() / 2) as isize;
    let ry = (ky.len() / 2) as isize;
    let mut tmp = vec![0.0; width * height];
    for y in 0..height {
        let src = &plane[y * width..(y + 1) * width];
        for x in 0..width as isize {
            let mut acc = 0.0;
            for (i, &w) in kx.iter().enumerate() {
                acc += w * src[reflect_index(x + i as isize - rx, width)];
            }
            tmp[y * width + x as usize] = acc;
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height as isize {
        for (i, &w) in ky.iter().enumerate() {
            let sy = reflect_index(y + i as isize - ry, height);
            let src = &tmp[sy * width..(sy + 1) * width];
            let dst = &mut out[y as usize * width..(y as usize + 1) * width];
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }
    out
}

pub fn gaussian_blur_plane(plane: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return plane.to_vec();
    }
    let k = gaussian_1d(sigma, (3.0 * sigma).ceil() as usize);
    separable_filter(plane, width, height, &k, &k)
}

pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let planes: Vec<Vec<f64>> = (0..img.channels())
        .map(|c| gaussian_blur_plane(&img.plane(c), img.width(), img.height(), sigma))
        .collect();
    ImageBuffer::from_planes(img.width(), img.height(), &planes).expect("same-size planes")
}

/// Squared Euclidean distance from every pixel to the nearest `true` pixel
/// (exact, two-pass lower-envelope transform). Pixels with no `true` pixel
/// anywhere get `f64::INFINITY`.
pub fn distance_transform_sq(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = mask
        .iter()
        .map(|&m| if m { 0.0 } else { f64::INFINITY })
        .collect();
    let mut line = Vec::new();
    for x in 0..width {
        line.clear();
        line.extend((0..height).map(|y| grid[y * width + x]));
        let d = edt_1d(&line);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        let d = edt_1d(&grid[y * width..(y + 1) * width]);
        grid[y * width..(y + 1) * width].copy_from_slice(&d);
    }
    grid
}

fn edt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        return vec![f64::INFINITY; n];
    }
    let mut v = Vec::with_capacity(sites.len());
    let mut z: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    let intersect = |p: usize, q: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64)
    };
    for &q in &sites {
        while let Some(&p) = v.last() {
            let s = intersect(p, q);
            if s <= z[v.len() - 1] {
                v.pop();
                z.pop();
            } else {
                break;
            }
        }
        if v.is_empty() {
            z.push(f64::NEG_INFINITY);
        } else {
            let p = *v.last().unwrap();
            z.push(intersect(p, q));
        }
        v.push(q);
    }
    let mut out = vec![0.0; n];
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
    out
}

/// Binary dilation with a disk of `radius` pixels.
pub fn dilate_disk(mask: &[bool], width: usize, height: usize, radius: f64) -> Vec<bool> {
    let r2 = radius * radius;
    distance_transform_sq(mask, width, height)
        .into_iter()
        .map(|d| d <= r2)
        .collect()
}
