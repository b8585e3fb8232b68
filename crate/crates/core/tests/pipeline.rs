mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use camrobust::bench::{
    cmd_correlate, cmd_degrade, cmd_iqa, cmd_pq, cmd_report, CorrelateOptions, DegradeOptions, IqaOptions, Manifest,
    PqOptions, ReportOptions,
};
use camrobust::correlate::CorrelationMode;
use camrobust::iqa::IqaConfig;
use camrobust::pq::Averaging;
use camrobust::{save_image, save_panoptic, DepthIngest, Factor, ImageFormat, PanopticMap, SegmentInfo};
use common::*;
use tempfile::TempDir;

const STEMS: [&str; 3] = ["astronaut", "coins", "rocket"];

/// Three natural images at 64x48 plus matching centimeter depth maps.
fn inputs(tmp: &TempDir) -> (PathBuf, PathBuf) {
    let (images, depth) = (tmp.path().join("images"), tmp.path().join("depth"));
    fs::create_dir_all(&images).unwrap();
    fs::create_dir_all(&depth).unwrap();
    for (stem, img) in natural_images().into_iter().filter(|(s, _)| STEMS.contains(&s.as_str())) {
        let small = camrobust::resize_bicubic(&img, 64, 48).unwrap();
        save_image(&small, images.join(format!("{stem}.png")), ImageFormat::Png).unwrap();
        write_ramp_depth(&depth.join(format!("{stem}.png")), 64, 48);
    }
    (images, depth)
}

fn files_under(root: &Path, ext: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == ext) {
                out.insert(p.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out
}

fn degrade(images: &Path, depth: Option<&Path>, out: &Path, factors: &[Factor], workers: usize) -> Manifest {
    let mut opts = DegradeOptions::new(images, out);
    opts.depth = depth.map(Path::to_path_buf);
    opts.depth_ingest = DepthIngest {
        scale: DEPTH_SCALE,
        ..DepthIngest::default()
    };
    opts.factors = factors.to_vec();
    opts.size = None;
    opts.seed = 99;
    opts.workers = workers;
    cmd_degrade(&opts).unwrap().manifest
}

#[test]
fn degrade_without_depth_skips_weather_only() {
    let tmp = TempDir::new().unwrap();
    let (images, _) = inputs(&tmp);
    let out = tmp.path().join("out");
    let m = degrade(&images, None, &out, &Factor::ALL, 2);
    let weather = Factor::ALL.iter().filter(|f| f.needs_depth()).count();
    assert_eq!(m.records.len(), STEMS.len() * (19 - weather) * 3);
    assert_eq!(m.skipped.len(), STEMS.len() * weather * 3);
    assert!(m.skipped.iter().all(|s| s.factor.parse::<Factor>().unwrap().needs_depth()));

    // Manifest completeness, both ways.
    let on_disk = files_under(&out, "png");
    let listed: BTreeSet<String> = m.records.iter().map(|r| r.path.clone()).collect();
    assert_eq!(on_disk, listed);
    m.verify(&out).unwrap();
    assert_eq!(Manifest::load(out.join("manifest.json")).unwrap(), m);
}

#[test]
fn degrade_is_independent_of_worker_count() {
    let tmp = TempDir::new().unwrap();
    let (images, depth) = inputs(&tmp);
    let a = degrade(&images, Some(&depth), &tmp.path().join("a"), &Factor::ALL, 1);
    let b = degrade(&images, Some(&depth), &tmp.path().join("b"), &Factor::ALL, 4);
    assert_eq!(a.records.len(), STEMS.len() * 19 * 3);
    assert!(a.skipped.is_empty());
    assert_eq!(a.records, b.records);
    assert!(a.records.iter().any(|r| r.surrogate));
    let natives: BTreeSet<u8> = a.records.iter().filter(|r| r.factor == "droplets").map(|r| r.native_severity).collect();
    assert_eq!(natives, BTreeSet::from([2, 3, 4]));
}

#[test]
fn iqa_rows_and_summary() {
    let tmp = TempDir::new().unwrap();
    let (images, depth) = inputs(&tmp);
    let out = tmp.path().join("deg");
    let factors = [Factor::Gaussian, Factor::Fog, Factor::Jpeg];
    degrade(&images, Some(&depth), &out, &factors, 2);
    let csv = tmp.path().join("iqa.csv");
    let rows = cmd_iqa(&IqaOptions {
        reference: images.clone(),
        test_root: out.clone(),
        out_csv: csv.clone(),
        config: IqaConfig::default(),
        workers: 2,
    })
    .unwrap();
    assert_eq!(rows.len(), STEMS.len() * factors.len() * 3);

    let summary = camrobust::bench::summarize(&rows);
    for s in &summary {
        let members: Vec<f64> = rows
            .iter()
            .filter(|r| r.factor == s.factor && r.severity == s.severity)
            .map(|r| r.psnr)
            .collect();
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        assert!((mean - s.psnr).abs() <= 1e-12);
    }
    assert!(csv.is_file());
    assert!(camrobust::bench::summary_path(&csv).is_file());

    // A tree of clean copies scores perfectly.
    let same = tmp.path().join("same/gaussian/s1");
    fs::create_dir_all(&same).unwrap();
    for stem in STEMS {
        fs::copy(images.join(format!("{stem}.png")), same.join(format!("{stem}.png"))).unwrap();
    }
    let rows = cmd_iqa(&IqaOptions {
        reference: images,
        test_root: tmp.path().join("same"),
        out_csv: tmp.path().join("same.csv"),
        config: IqaConfig::default(),
        workers: 1,
    })
    .unwrap();
    assert!(rows.iter().all(|r| r.ssim == 1.0 && r.psnr == 100.0));
}

#[test]
fn iqa_rejects_unmatched_stems() {
    let tmp = TempDir::new().unwrap();
    let (images, _) = inputs(&tmp);
    let dir = tmp.path().join("deg/jpeg/s1");
    fs::create_dir_all(&dir).unwrap();
    fs::copy(images.join("coins.png"), dir.join("stranger.png")).unwrap();
    let err = cmd_iqa(&IqaOptions {
        reference: images,
        test_root: tmp.path().join("deg"),
        out_csv: tmp.path().join("iqa.csv"),
        config: IqaConfig::default(),
        workers: 1,
    });
    assert!(err.is_err());
}

fn seg(id: u32, category_id: u32) -> SegmentInfo {
    SegmentInfo {
        id,
        category_id,
        is_crowd: false,
    }
}

/// 12x10 ground truth: one segment over the first 100 pixels and a crowd
/// region of another class over the rest.
fn gt_map() -> PanopticMap {
    let ids = (0..120).map(|i| if i < 100 { 1 } else { 2 }).collect();
    PanopticMap::new(12, 10, ids, vec![seg(1, 1), SegmentInfo { is_crowd: true, ..seg(2, 2) }]).unwrap()
}

fn shifted_pred() -> PanopticMap {
    let ids = (0..120).map(|i| if i < 20 { 0 } else { 7 }).collect();
    PanopticMap::new(12, 10, ids, vec![seg(7, 1)]).unwrap()
}

fn write_pan(map: &PanopticMap, dir: &Path, stem: &str) {
    fs::create_dir_all(dir).unwrap();
    save_panoptic(map, dir.join(format!("{stem}.png")), dir.join(format!("{stem}.json"))).unwrap();
}

#[test]
fn pq_tree_scores_and_missing_predictions() {
    let tmp = TempDir::new().unwrap();
    let (gt, pred) = (tmp.path().join("gt"), tmp.path().join("pred"));
    for stem in STEMS {
        write_pan(&gt_map(), &gt, stem);
        write_pan(&gt_map(), &pred.join("fog/s1"), stem);
    }
    write_pan(&shifted_pred(), &pred.join("fog/s2"), "astronaut");
    write_pan(&gt_map(), &pred.join("fog/s2"), "coins");

    let out = tmp.path().join("pq");
    let outcome = cmd_pq(&PqOptions {
        gt,
        pred_root: pred,
        out: out.clone(),
        averaging: Averaging::Category,
        workers: 2,
    })
    .unwrap();

    let s1 = outcome.summary.iter().find(|s| s.severity == 1).unwrap();
    assert_eq!((s1.apq, s1.vpq, s1.n), (100.0, 0.0, 3));
    let row = outcome.rows.iter().find(|r| r.severity == 2 && r.image_id == "astronaut").unwrap();
    assert!((row.pq - 66.67).abs() < 0.01);
    assert_eq!(outcome.missing.len(), 1);
    assert_eq!((outcome.missing[0].image_id.as_str(), outcome.missing[0].severity), ("rocket", 2));
    let s2 = outcome.summary.iter().find(|s| s.severity == 2).unwrap();
    assert_eq!(s2.n, 2);
    assert!((s2.apq - (100.0 + 200.0 / 3.0) / 2.0).abs() < 1e-9);
    for f in ["pq.csv", "pq_summary.csv", "pq_report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn pq_prediction_without_ground_truth_fails() {
    let tmp = TempDir::new().unwrap();
    let (gt, pred) = (tmp.path().join("gt"), tmp.path().join("pred"));
    write_pan(&gt_map(), &gt, "a");
    write_pan(&gt_map(), &pred.join("rain/s1"), "b");
    let r = cmd_pq(&PqOptions {
        gt,
        pred_root: pred,
        out: tmp.path().join("out"),
        averaging: Averaging::Global,
        workers: 1,
    });
    assert!(r.is_err());
}

fn write_tables(dir: &Path) -> (PathBuf, PathBuf) {
    let iqa = dir.join("iqa.csv");
    let pq = dir.join("pq.csv");
    let mut a = String::from("image_id,factor,severity,psnr,ssim,lpips\n");
    let mut b = String::from("image_id,factor,severity,pq,sq,rq,tp,fp,fn\n");
    let mut k = 0.0f64;
    for factor in ["fog", "gaussian", "jpeg"] {
        for s in 1..=3 {
            for img in ["a", "b", "c"] {
                k += 1.0;
                let wobble = (k * 1.7).sin();
                a.push_str(&format!(
                    "{img},{factor},{s},{},{},{}\n",
                    40.0 - 5.0 * s as f64 + wobble,
                    1.0 - 0.1 * s as f64 + 0.01 * wobble,
                    0.1 * s as f64 - 0.02 * wobble
                ));
                b.push_str(&format!("{img},{factor},{s},{},80,80,1,0,0\n", 70.0 - 8.0 * s as f64 + 2.0 * (k * 0.9).cos()));
            }
        }
    }
    fs::write(&iqa, a).unwrap();
    fs::write(&pq, b).unwrap();
    (iqa, pq)
}

#[test]
fn correlate_modes_and_passthrough_columns() {
    let tmp = TempDir::new().unwrap();
    let (iqa, pq) = write_tables(tmp.path());
    let run = |mode, pq_columns: Option<Vec<String>>| {
        cmd_correlate(&CorrelateOptions {
            iqa_csv: iqa.clone(),
            pq_csv: pq.clone(),
            mode,
            out: tmp.path().join("corr"),
            iq_columns: None,
            pq_columns,
        })
        .unwrap()
    };
    let by_factor = run(CorrelationMode::Factor, None);
    let by_image = run(CorrelationMode::Image, None);
    assert!(by_factor.rows.iter().any(|r| r == "lpips"));
    assert_eq!(by_factor.cols, vec!["pq".to_string()]);
    assert_ne!(by_factor.pooled().plcc, by_image.pooled().plcc);
    assert!(by_factor.matrices.contains_key("mean_over_factors"));
    assert!(tmp.path().join("corr/correlation.json").is_file());
    let md = fs::read_to_string(tmp.path().join("corr/correlation.md")).unwrap();
    assert!(md.contains("lpips"));

    // Self-correlation through a shared column name.
    let selfc = cmd_correlate(&CorrelateOptions {
        iqa_csv: iqa.clone(),
        pq_csv: iqa.clone(),
        mode: CorrelationMode::Image,
        out: tmp.path().join("self"),
        iq_columns: Some(vec!["psnr".into()]),
        pq_columns: Some(vec!["psnr".into()]),
    })
    .unwrap();
    let m = selfc.pooled();
    assert!((m.plcc[0][0].unwrap() - 1.0).abs() < 1e-12);
    assert!((m.srcc[0][0].unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn correlate_needs_a_join() {
    let tmp = TempDir::new().unwrap();
    let (iqa, _) = write_tables(tmp.path());
    let other = tmp.path().join("other.csv");
    fs::write(&other, "image_id,factor,severity,pq\nz,snow,1,50\nz,snow,2,40\nz,snow,3,30\n").unwrap();
    let r = cmd_correlate(&CorrelateOptions {
        iqa_csv: iqa,
        pq_csv: other,
        mode: CorrelationMode::Image,
        out: tmp.path().join("c"),
        iq_columns: None,
        pq_columns: None,
    });
    assert!(r.is_err());
}

#[test]
fn report_cites_each_factor_once_and_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (images, _) = inputs(&tmp);
    let deg = tmp.path().join("deg");
    degrade(&images, None, &deg, &[Factor::Gaussian, Factor::Jpeg], 1);
    let (iqa, pq) = write_tables(tmp.path());
    cmd_correlate(&CorrelateOptions {
        iqa_csv: iqa.clone(),
        pq_csv: pq.clone(),
        mode: CorrelationMode::Factor,
        out: tmp.path().join("corr"),
        iq_columns: None,
        pq_columns: None,
    })
    .unwrap();
    let full = |out: &str| ReportOptions {
        manifest: Some(deg.join("manifest.json")),
        iqa: Some(iqa.clone()),
        pq: Some(pq.clone()),
        correlation: Some(tmp.path().join("corr/correlation.json")),
        out: tmp.path().join(out),
    };
    let a = cmd_report(&full("r1")).unwrap();
    let b = cmd_report(&full("r2")).unwrap();
    assert_eq!(a, b);
    assert_eq!(fs::read(tmp.path().join("r1/report.md")).unwrap(), fs::read(tmp.path().join("r2/report.md")).unwrap());
    for f in Factor::ALL {
        let heading = format!("### {}\n", f.name());
        assert_eq!(a.matches(&heading).count(), 1, "{}", f.name());
    }
    assert!(!a.contains("Omitted"));

    let partial = cmd_report(&ReportOptions {
        pq: None,
        correlation: None,
        ..full("r3")
    })
    .unwrap();
    assert!(partial.contains("> **Omitted:** panoptic-quality curves"));
    assert!(!partial.contains("aPQ"));
    assert!(partial.contains("PSNR"));

    let missing = cmd_report(&ReportOptions {
        pq: Some(tmp.path().join("nope.csv")),
        ..full("r4")
    });
    assert!(missing.is_err());
}

fn cli() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_camrobust"));
    c.env_remove("CAMROBUST_WORKERS").env("RUST_LOG", "error");
    c
}

#[test]
fn cli_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let (images, depth) = inputs(&tmp);
    let base = |out: &str| {
        let mut c = cli();
        c.args(["degrade", "--size", "original", "--factors", "fog,gaussian", "--severities", "1,3"])
            .arg("--input")
            .arg(&images)
            .arg("--out")
            .arg(tmp.path().join(out));
        c
    };
    let partial = base("p").output().unwrap().status;
    assert_eq!(partial.code(), Some(2));
    assert_eq!(files_under(&tmp.path().join("p"), "png").len(), STEMS.len() * 2);

    let full = base("f")
        .arg("--depth")
        .arg(&depth)
        .args(["--depth-scale", "0.01", "--workers", "2"])
        .output()
        .unwrap();
    assert_eq!(full.status.code(), Some(0));
    assert_eq!(files_under(&tmp.path().join("f"), "png").len(), STEMS.len() * 4);

    let over = base("o")
        .arg("--depth")
        .arg(&depth)
        .args(["--depth-scale", "0.01", "--set", "gaussian.sigma=0"])
        .output()
        .unwrap();
    assert_eq!(over.status.code(), Some(0));
    let m = Manifest::load(tmp.path().join("o/manifest.json")).unwrap();
    assert!(m.records.iter().filter(|r| r.factor == "gaussian").all(|r| r.parameters["sigma"] == 0.0));

    let bad = cli().args(["degrade", "--factors", "hail"]).arg("--input").arg(&images).arg("--out").arg(tmp.path().join("x")).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));

    let report = cli().arg("report").arg("--manifest").arg(tmp.path().join("f/manifest.json")).arg("--out").arg(tmp.path().join("rep")).output().unwrap().status;
    assert_eq!(report.code(), Some(0));
    assert!(tmp.path().join("rep/report.md").is_file());
}
