use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use camrobust_ffi::*;

fn gradient(w: usize, h: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let base = (x + y) as f64 / (w + h) as f64;
            v.extend([base, 1.0 - base, 0.5 * base + 0.25]);
        }
    }
    v
}

fn new_image(w: usize, h: usize, data: &[f64]) -> *mut CrImage {
    let mut img = ptr::null_mut();
    let status = unsafe { cr_image_new(w, h, 3, data.as_ptr(), &mut img) };
    assert_eq!(status, CrStatus::Ok);
    img
}

fn last_error() -> String {
    let p = cr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn image_roundtrip_through_handle() {
    let data = gradient(8, 4);
    let img = new_image(8, 4, &data);
    unsafe {
        assert_eq!(cr_image_width(img), 8);
        assert_eq!(cr_image_height(img), 4);
        assert_eq!(cr_image_channels(img), 3);
        let view = std::slice::from_raw_parts(cr_image_data(img), data.len());
        assert_eq!(view, &data[..]);
        cr_image_free(img);
        cr_image_free(ptr::null_mut());
    }
}

#[test]
fn null_and_shape_errors_set_message() {
    let mut img = ptr::null_mut();
    let status = unsafe { cr_image_new(4, 4, 3, ptr::null(), &mut img) };
    assert_eq!(status, CrStatus::NullPointer);
    assert!(last_error().contains("data"));

    let data = [0.5; 4];
    let status = unsafe { cr_image_new(2, 2, 0, data.as_ptr(), &mut img) };
    assert_ne!(status, CrStatus::Ok);
    assert!(img.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn metrics_on_identical_images() {
    let data = gradient(32, 32);
    let a = new_image(32, 32, &data);
    let b = new_image(32, 32, &data);
    let mut v = 0.0;
    unsafe {
        assert_eq!(cr_psnr(a, b, &mut v), CrStatus::Ok);
        assert_eq!(v, 100.0);
        assert_eq!(cr_ssim(a, b, &mut v), CrStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(cr_cw_ssim(a, b, &mut v), CrStatus::Ok);
        assert!((v - 1.0).abs() < 1e-9);
        assert_eq!(cr_fsim(a, b, &mut v), CrStatus::Ok);
        assert!((v - 1.0).abs() < 1e-9);
        assert!(cr_last_error().is_null());
        cr_image_free(a);
        cr_image_free(b);
    }
}

#[test]
fn metric_shape_mismatch() {
    let a = new_image(8, 8, &gradient(8, 8));
    let b = new_image(8, 4, &gradient(8, 4));
    let mut v = 0.0;
    unsafe {
        assert_eq!(cr_psnr(a, b, &mut v), CrStatus::DimensionMismatch);
        cr_image_free(a);
        cr_image_free(b);
    }
}

#[test]
fn degrade_matches_core_and_needs_depth_for_weather() {
    let (w, h) = (24, 16);
    let data = gradient(w, h);
    let img = new_image(w, h, &data);
    let factor = CString::new("gaussian").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(cr_degrade(img, ptr::null(), factor.as_ptr(), 2, 42, &mut out), CrStatus::Ok);
        let got = std::slice::from_raw_parts(cr_image_data(out), data.len()).to_vec();
        let core_img = camrobust::ImageBuffer::new(w, h, 3, data.clone()).unwrap();
        let spec = camrobust::DegradationSpec::new(
            camrobust::Factor::Gaussian,
            camrobust::Severity::new(2).unwrap(),
            42,
        );
        let expected = camrobust::apply_degradation(&core_img, None, &spec).unwrap();
        assert_eq!(got, expected.data());
        cr_image_free(out);

        let fog = CString::new("fog").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(cr_degrade(img, ptr::null(), fog.as_ptr(), 1, 1, &mut out), CrStatus::MissingDepth);
        assert!(out.is_null());

        let meters = vec![50.0; w * h];
        let mut depth = ptr::null_mut();
        assert_eq!(cr_depth_new(w, h, meters.as_ptr(), &mut depth), CrStatus::Ok);
        assert_eq!(cr_degrade(img, depth, fog.as_ptr(), 1, 1, &mut out), CrStatus::Ok);
        cr_image_free(out);
        cr_depth_free(depth);

        let bogus = CString::new("hail").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(cr_degrade(img, ptr::null(), bogus.as_ptr(), 1, 1, &mut out), CrStatus::UnknownFactor);
        assert!(last_error().contains("hail"));
        assert_eq!(cr_degrade(img, ptr::null(), factor.as_ptr(), 4, 1, &mut out), CrStatus::InvalidArgument);
        cr_image_free(img);
    }
}

#[test]
fn invalid_depth_rejected() {
    let meters = [1.0, 0.0, 2.0, 3.0];
    let mut depth = ptr::null_mut();
    let status = unsafe { cr_depth_new(2, 2, meters.as_ptr(), &mut depth) };
    assert_eq!(status, CrStatus::InvalidDepth);
}

#[test]
fn pq_perfect_and_disjoint() {
    // Two 4x2 halves, categories 1 and 2.
    let ids: Vec<u32> = (0..16).map(|i| if i % 4 < 2 { 1 } else { 2 }).collect();
    let segs = [
        CrSegment { id: 1, category_id: 1, is_crowd: false },
        CrSegment { id: 2, category_id: 2, is_crowd: false },
    ];
    let mut gt = ptr::null_mut();
    let mut pred = ptr::null_mut();
    let mut s = CrPqScores::default();
    unsafe {
        assert_eq!(cr_panoptic_new(4, 4, ids.as_ptr(), segs.as_ptr(), 2, &mut gt), CrStatus::Ok);
        assert_eq!(cr_panoptic_new(4, 4, ids.as_ptr(), segs.as_ptr(), 2, &mut pred), CrStatus::Ok);
        assert_eq!(cr_pq(pred, gt, false, &mut s), CrStatus::Ok);
        assert_eq!((s.pq, s.sq, s.rq, s.tp, s.fp, s.fn_), (1.0, 1.0, 1.0, 2, 0, 0));
        cr_panoptic_free(pred);

        let swapped = [
            CrSegment { id: 1, category_id: 2, is_crowd: false },
            CrSegment { id: 2, category_id: 1, is_crowd: false },
        ];
        assert_eq!(cr_panoptic_new(4, 4, ids.as_ptr(), swapped.as_ptr(), 2, &mut pred), CrStatus::Ok);
        assert_eq!(cr_pq(pred, gt, true, &mut s), CrStatus::Ok);
        assert_eq!((s.pq, s.tp, s.fp, s.fn_), (0.0, 0, 2, 2));
        cr_panoptic_free(pred);
        cr_panoptic_free(gt);
    }
}

#[test]
fn panoptic_segment_table_must_cover_ids() {
    let ids = [1u32, 1, 3, 3];
    let segs = [CrSegment { id: 1, category_id: 1, is_crowd: false }];
    let mut map = ptr::null_mut();
    let status = unsafe { cr_panoptic_new(2, 2, ids.as_ptr(), segs.as_ptr(), 1, &mut map) };
    assert_eq!(status, CrStatus::InvalidPanoptic);
}

#[test]
fn correlation_calls() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [2.0, 4.0, 6.0, 8.0, 11.0];
    let mut r = 0.0;
    unsafe {
        assert_eq!(cr_srcc(x.as_ptr(), y.as_ptr(), 5, &mut r), CrStatus::Ok);
        assert_eq!(r, 1.0);
        assert_eq!(cr_plcc(x.as_ptr(), y.as_ptr(), 5, &mut r), CrStatus::Ok);
        assert!(r > 0.99 && r < 1.0);
        let flat = [1.0; 5];
        assert_eq!(cr_plcc(x.as_ptr(), flat.as_ptr(), 5, &mut r), CrStatus::Undefined);
    }
}

#[test]
fn visibility_and_seed() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(cr_visibility_from_beta(0.01, &mut v), CrStatus::Ok);
        assert!((v - 20f64.ln() / 0.01).abs() < 1e-9);
        assert_eq!(cr_visibility_from_beta(-1.0, &mut v), CrStatus::InvalidArgument);
    }
    let id = CString::new("frankfurt_000000").unwrap();
    let factor = CString::new("fog").unwrap();
    let mut seed = 0u64;
    unsafe {
        assert_eq!(cr_derive_seed(7, id.as_ptr(), factor.as_ptr(), 2, &mut seed), CrStatus::Ok);
    }
    assert_eq!(seed, camrobust::derive_seed(7, "frankfurt_000000", "fog", 2));
}

#[test]
fn save_and_load_png() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("x.png").to_str().unwrap()).unwrap();
    let data: Vec<f64> = gradient(6, 5).iter().map(|v| (v * 255.0).round() / 255.0).collect();
    let img = new_image(6, 5, &data);
    let mut back = ptr::null_mut();
    unsafe {
        assert_eq!(cr_image_save(img, path.as_ptr(), 0), CrStatus::Ok);
        assert_eq!(cr_image_load(path.as_ptr(), &mut back), CrStatus::Ok);
        let view = std::slice::from_raw_parts(cr_image_data(back), data.len());
        assert_eq!(view, &data[..]);
        assert_eq!(cr_image_save(img, path.as_ptr(), 101), CrStatus::InvalidArgument);
        cr_image_free(back);
        cr_image_free(img);
        let missing = CString::new(dir.path().join("none.png").to_str().unwrap()).unwrap();
        assert_eq!(cr_image_load(missing.as_ptr(), &mut back), CrStatus::Io);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/camrobust.h");
    assert!(header.exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ CrImage *img = 0; return cr_image_width(img) == 0 ? CR_STATUS_OK : CR_STATUS_OTHER; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg(&src).status() {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler; header syntax not checked"),
    }
}
