//! C ABI over the camrobust degradation operators and metric kernels.
//!
//! Every fallible call returns a [`CrStatus`]; on failure the message is
//! available from [`cr_last_error`] on the same thread. Handles are opaque
//! and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use camrobust::correlate::{plcc, srcc};
use camrobust::degrade::weather::visibility_from_beta;
use camrobust::degrade::{apply_degradation, DegradationSpec, Factor, Severity};
use camrobust::depth::{load_depth, DepthIngest, DepthMap, DepthMode};
use camrobust::error::Error;
use camrobust::image::ImageBuffer;
use camrobust::io::{load_image, save_image, ImageFormat};
use camrobust::iqa::{cw_ssim, fsim, psnr, ssim};
use camrobust::panoptic::{load_panoptic, PanopticMap, SegmentInfo};
use camrobust::pq::{pq_with, Averaging};
use camrobust::seed::derive_seed;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Io = 4,
    Decode = 5,
    Encode = 6,
    UnknownFactor = 7,
    MissingDepth = 8,
    InvalidDepth = 9,
    InvalidPanoptic = 10,
    Undefined = 11,
    Panic = 12,
    Other = 13,
}

/// Image with interleaved `f64` samples in `[0, 1]`.
pub struct CrImage(ImageBuffer);

/// Metric depth map in meters.
pub struct CrDepth(DepthMap);

/// Panoptic segment-id grid with its segment table.
pub struct CrPanoptic(PanopticMap);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CrSegment {
    pub id: u32,
    pub category_id: u32,
    pub is_crowd: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrDepthMode {
    Depth = 0,
    Disparity = 1,
}

/// PQ, SQ and RQ in `[0, 1]` plus pooled match counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CrPqScores {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CrStatus {
    match err {
        Error::Io { .. } => CrStatus::Io,
        Error::Decode { .. } => CrStatus::Decode,
        Error::Encode(_) => CrStatus::Encode,
        Error::DimensionMismatch(_) => CrStatus::DimensionMismatch,
        Error::InvalidArgument(_) => CrStatus::InvalidArgument,
        Error::UnknownFactor(_) => CrStatus::UnknownFactor,
        Error::MissingDepth(_) => CrStatus::MissingDepth,
        Error::Depth(_) => CrStatus::InvalidDepth,
        Error::Panoptic(_) => CrStatus::InvalidPanoptic,
        Error::UndefinedCorrelation(_) | Error::EmptyJoin(_) => CrStatus::Undefined,
        _ => CrStatus::Other,
    }
}

struct Fail(CrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CrStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(CrStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CrStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn checked_len(a: usize, b: usize, c: usize) -> Result<usize, Fail> {
    a.checked_mul(b)
        .and_then(|n| n.checked_mul(c))
        .ok_or_else(|| invalid("dimensions overflow"))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `width * height * channels` interleaved samples into a new image.
///
/// # Safety
/// `data` must point to that many readable `f64`s; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_image_new(
    width: usize,
    height: usize,
    channels: usize,
    data: *const f64,
    out: *mut *mut CrImage,
) -> CrStatus {
    guard(|| {
        let n = checked_len(width, height, channels)?;
        let samples = slice_arg(data, n, "data")?.to_vec();
        let img = ImageBuffer::new(width, height, channels, samples)?;
        write_out(out, Box::into_raw(Box::new(CrImage(img))), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_image_load(path: *const c_char, out: *mut *mut CrImage) -> CrStatus {
    guard(|| {
        let img = load_image(str_arg(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(CrImage(img))), "out")
    })
}

/// Writes PNG when `jpeg_quality` is 0, else baseline JPEG at that quality.
///
/// # Safety
/// `image` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cr_image_save(image: *const CrImage, path: *const c_char, jpeg_quality: u8) -> CrStatus {
    guard(|| {
        let img = ref_arg(image, "image")?;
        let format = match jpeg_quality {
            0 => ImageFormat::Png,
            quality if quality <= 100 => ImageFormat::Jpeg { quality },
            q => return Err(invalid(format!("jpeg quality {q} outside 1..=100"))),
        };
        save_image(&img.0, str_arg(path, "path")?, format)?;
        Ok(())
    })
}

/// # Safety
/// `image` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_image_width(image: *const CrImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `image` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_image_height(image: *const CrImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.height())
}

/// # Safety
/// `image` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_image_channels(image: *const CrImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.channels())
}

/// Borrowed pointer to the interleaved samples, valid while the handle lives.
///
/// # Safety
/// `image` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_image_data(image: *const CrImage) -> *const f64 {
    image.as_ref().map_or(ptr::null(), |i| i.0.data().as_ptr())
}

/// # Safety
/// `image` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_image_free(image: *mut CrImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Depth values in meters, row-major; each must be `> 0` or `+inf`.
///
/// # Safety
/// `meters` must point to `width * height` readable `f64`s.
#[no_mangle]
pub unsafe extern "C" fn cr_depth_new(width: usize, height: usize, meters: *const f64, out: *mut *mut CrDepth) -> CrStatus {
    guard(|| {
        let n = checked_len(width, height, 1)?;
        let values = slice_arg(meters, n, "meters")?.to_vec();
        let depth = DepthMap::new(width, height, values)?;
        write_out(out, Box::into_raw(Box::new(CrDepth(depth))), "out")
    })
}

/// Loads a 16-bit PNG. A non-positive `baseline_focal` means unset.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_depth_load(
    path: *const c_char,
    mode: CrDepthMode,
    scale: f64,
    baseline_focal: f64,
    out: *mut *mut CrDepth,
) -> CrStatus {
    guard(|| {
        let ingest = DepthIngest {
            mode: match mode {
                CrDepthMode::Depth => DepthMode::Depth,
                CrDepthMode::Disparity => DepthMode::Disparity,
            },
            scale,
            baseline_focal: (baseline_focal > 0.0).then_some(baseline_focal),
        };
        let depth = load_depth(str_arg(path, "path")?, ingest)?;
        write_out(out, Box::into_raw(Box::new(CrDepth(depth))), "out")
    })
}

/// # Safety
/// `depth` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_depth_free(depth: *mut CrDepth) {
    if !depth.is_null() {
        drop(Box::from_raw(depth));
    }
}

/// Applies one catalog factor at severity 1..=3. `depth` may be null for
/// factors that do not need it.
///
/// # Safety
/// `image` must be a live handle, `depth` null or a live handle, `factor` a
/// NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_degrade(
    image: *const CrImage,
    depth: *const CrDepth,
    factor: *const c_char,
    severity: u8,
    seed: u64,
    out: *mut *mut CrImage,
) -> CrStatus {
    guard(|| {
        let img = ref_arg(image, "image")?;
        let depth = depth.as_ref().map(|d| &d.0);
        let factor: Factor = str_arg(factor, "factor")?.parse()?;
        let spec = DegradationSpec::new(factor, Severity::new(severity)?, seed);
        let result = apply_degradation(&img.0, depth, &spec)?;
        write_out(out, Box::into_raw(Box::new(CrImage(result))), "out")
    })
}

unsafe fn metric(
    reference: *const CrImage,
    test: *const CrImage,
    out: *mut f64,
    f: fn(&ImageBuffer, &ImageBuffer) -> camrobust::Result<f64>,
) -> CrStatus {
    guard(|| {
        let a = ref_arg(reference, "reference")?;
        let b = ref_arg(test, "test")?;
        write_out(out, f(&a.0, &b.0)?, "out")
    })
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_psnr(reference: *const CrImage, test: *const CrImage, out: *mut f64) -> CrStatus {
    metric(reference, test, out, psnr)
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_ssim(reference: *const CrImage, test: *const CrImage, out: *mut f64) -> CrStatus {
    metric(reference, test, out, ssim)
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_cw_ssim(reference: *const CrImage, test: *const CrImage, out: *mut f64) -> CrStatus {
    metric(reference, test, out, cw_ssim)
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_fsim(reference: *const CrImage, test: *const CrImage, out: *mut f64) -> CrStatus {
    metric(reference, test, out, fsim)
}

/// Builds a panoptic map from a row-major id grid and its segment table.
///
/// # Safety
/// `ids` must hold `width * height` values and `segments` `n_segments`
/// entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_panoptic_new(
    width: usize,
    height: usize,
    ids: *const u32,
    segments: *const CrSegment,
    n_segments: usize,
    out: *mut *mut CrPanoptic,
) -> CrStatus {
    guard(|| {
        let n = checked_len(width, height, 1)?;
        let ids = slice_arg(ids, n, "ids")?.to_vec();
        let segments = slice_arg(segments, n_segments, "segments")?
            .iter()
            .map(|s| SegmentInfo {
                id: s.id,
                category_id: s.category_id,
                is_crowd: s.is_crowd,
            })
            .collect();
        let map = PanopticMap::new(width, height, ids, segments)?;
        write_out(out, Box::into_raw(Box::new(CrPanoptic(map))), "out")
    })
}

/// Loads a panoptic PNG and its per-image segments JSON.
///
/// # Safety
/// Both paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_panoptic_load(
    png_path: *const c_char,
    json_path: *const c_char,
    out: *mut *mut CrPanoptic,
) -> CrStatus {
    guard(|| {
        let map = load_panoptic(str_arg(png_path, "png_path")?, str_arg(json_path, "json_path")?)?;
        write_out(out, Box::into_raw(Box::new(CrPanoptic(map))), "out")
    })
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_panoptic_free(map: *mut CrPanoptic) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Panoptic quality of `pred` against `gt`. Scores are averaged over
/// categories, or pooled over all segments when `pooled` is true.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_pq(
    pred: *const CrPanoptic,
    gt: *const CrPanoptic,
    pooled: bool,
    out: *mut CrPqScores,
) -> CrStatus {
    guard(|| {
        let pred = ref_arg(pred, "pred")?;
        let gt = ref_arg(gt, "gt")?;
        let averaging = if pooled { Averaging::Global } else { Averaging::Category };
        let r = pq_with(&pred.0, &gt.0, averaging)?;
        let scores = CrPqScores {
            pq: r.pq,
            sq: r.sq,
            rq: r.rq,
            tp: r.tp,
            fp: r.fp,
            fn_: r.fn_,
        };
        write_out(out, scores, "out")
    })
}

/// # Safety
/// `x` and `y` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_plcc(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> CrStatus {
    guard(|| {
        let r = plcc(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        write_out(out, r, "out")
    })
}

/// # Safety
/// `x` and `y` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_srcc(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> CrStatus {
    guard(|| {
        let r = srcc(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        write_out(out, r, "out")
    })
}

/// Meteorological visibility in meters for an attenuation coefficient.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_visibility_from_beta(beta: f64, out: *mut f64) -> CrStatus {
    guard(|| write_out(out, visibility_from_beta(beta)?, "out"))
}

/// Per-task seed from the global seed, image id, factor name and severity.
///
/// # Safety
/// `image_id` and `factor` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cr_derive_seed(
    global_seed: u64,
    image_id: *const c_char,
    factor: *const c_char,
    severity: u8,
    out: *mut u64,
) -> CrStatus {
    guard(|| {
        let seed = derive_seed(global_seed, str_arg(image_id, "image_id")?, str_arg(factor, "factor")?, severity);
        write_out(out, seed, "out")
    })
}
