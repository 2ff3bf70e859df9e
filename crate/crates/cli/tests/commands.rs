mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use adasvd::synthetic::Scene;
use adasvd::{load_labels, write_mask, Mask};
use adasvd_cli::{cmd_eval, cmd_run, cmd_timing, EvalArgs, ParamArgs, RunArgs, TimingArgs};

fn run_args(input: &Path) -> RunArgs {
    RunArgs {
        input: input.to_path_buf(),
        init_count: 15,
        init_dir: None,
        read_stride: 1,
        out_masks: None,
        out_foreground: None,
        out_background: None,
        out_summary: None,
        params: ParamArgs::default(),
    }
}

fn eval_args(input: &Path) -> EvalArgs {
    EvalArgs {
        input: input.to_path_buf(),
        init_count: 15,
        from_masks: None,
        out_masks: None,
        out_metrics: None,
        params: ParamArgs::default(),
    }
}

#[test]
fn run_writes_masks_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(120, 90, 21).generator();
    common::write_frames(&gen, 0..60, &dir.path().join("in"));
    let mut args = run_args(&dir.path().join("in"));
    args.out_masks = Some(dir.path().join("masks"));
    args.out_foreground = Some(dir.path().join("fg"));
    args.out_background = Some(dir.path().join("bg"));
    args.out_summary = Some(dir.path().join("summary.json"));
    args.params.no_similarity = true;
    let summary = cmd_run(&args).unwrap();
    assert_eq!(summary.frames, 60);
    assert_eq!(summary.offered, 60);
    assert_eq!(
        summary.accepted + summary.rejected_tau + summary.rejected_similarity + summary.degenerate
            + summary.pending,
        summary.offered
    );
    for sub in ["masks", "fg", "bg"] {
        assert_eq!(fs::read_dir(dir.path().join(sub)).unwrap().count(), 60);
    }
    let (w, h, labels) = load_labels(&dir.path().join("masks/bin000060.png")).unwrap();
    assert_eq!((w, h), (120, 90));
    assert!(labels.iter().all(|&v| v == 0 || v == 255));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["frames"], 60);
    assert_eq!(json["params"]["ell"], 15);
}

#[test]
fn update_stride_halves_offered_frames() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(80, 60, 22).generator();
    common::write_frames(&gen, 0..48, dir.path());
    let mut args = run_args(dir.path());
    let full = cmd_run(&args).unwrap();
    args.params.stride = Some(2);
    let half = cmd_run(&args).unwrap();
    assert_eq!(full.offered, 48);
    assert_eq!(half.offered, 24);
    assert_eq!(half.frames, 48);
}

#[test]
fn read_stride_skips_files() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(64, 48, 23).generator();
    common::write_frames(&gen, 0..40, dir.path());
    let mut args = run_args(dir.path());
    args.read_stride = 2;
    assert_eq!(cmd_run(&args).unwrap().frames, 20);
}

#[test]
fn empty_or_missing_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_run(&run_args(dir.path())).unwrap_err();
    assert!(err.to_string().contains("no frames"), "{err}");
    assert!(cmd_run(&run_args(&dir.path().join("absent"))).is_err());
}

#[test]
fn binary_exits_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_adasvd"))
        .args(["run", "--input"])
        .arg(dir.path().join("absent"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:") && stderr.contains("absent"), "{stderr}");

    let bad = Command::new(env!("CARGO_BIN_EXE_adasvd"))
        .args(["run", "--input", ".", "--strategy", "iv"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn config_file_feeds_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(64, 48, 24).generator();
    common::write_frames(&gen, 0..30, &dir.path().join("in"));
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "ell = 8\nn-star = 12\nstrategy = ii\nstride = 3\n").unwrap();
    let mut args = run_args(&dir.path().join("in"));
    args.params.config = Some(cfg);
    args.params.n_star = Some(20);
    let s = cmd_run(&args).unwrap();
    assert_eq!((s.params.ell, s.params.n_star, s.params.update_stride), (8, 20, 3));
    assert_eq!(s.offered, 10);
}

/// 4×2 frames, one row of labels covering every CDnet class.
fn hand_fixture(root: &Path) {
    let gen = Scene::moving_square(4, 2, 25).generator();
    common::write_frames(&gen, 0..10, &root.join("input"));
    let gt_dir = root.join("groundtruth");
    fs::create_dir_all(&gt_dir).unwrap();
    let labels = [255u8, 255, 0, 50, 85, 170, 0, 255];
    let raw: Vec<f64> = labels.iter().map(|&v| v as f64).collect();
    for i in 3..=9 {
        adasvd::write_intensities(&gt_dir.join(format!("gt{i:06}.png")), 4, 2, &raw).unwrap();
    }
    fs::write(root.join("temporalROI.txt"), "3 10").unwrap();
}

#[test]
fn eval_matches_hand_computed_confusion() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("seq");
    hand_fixture(&root);
    let masks = dir.path().join("masks");
    fs::create_dir_all(&masks).unwrap();
    let pred = Mask::from_vec(4, 2, vec![true, false, true, false, true, true, false, true]).unwrap();
    for i in 3..=10 {
        write_mask(&masks.join(format!("bin{i:06}.png")), &pred).unwrap();
    }
    let mut args = eval_args(&root);
    args.from_masks = Some(masks);
    args.out_metrics = Some(dir.path().join("m.json"));
    let report = cmd_eval(&args).unwrap();
    // Per frame: tp 2, fn 1, fp 1, tn 2, excluded 2; frames 3..=9 scored, 10 lacks labels.
    let c = report.counts;
    assert_eq!((c.tp, c.fn_, c.fp, c.tn, c.excluded), (14, 7, 7, 14, 14));
    assert_eq!(report.missing_groundtruth, vec![10]);
    assert_eq!(report.frames_scored, 7);
    let m = report.metrics;
    assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
    assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
    assert!((m.f_measure - 2.0 / 3.0).abs() < 1e-12);
    assert!((m.pbc - 100.0 / 3.0).abs() < 1e-9);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(json["counts"]["fn"], 7);
    assert!(json["metrics"]["specificity"].as_f64().is_some());
}

#[test]
fn perfect_masks_score_one() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(64, 48, 26).generator();
    common::write_cdnet(&gen, 30, 11, 30, dir.path());
    let mut args = eval_args(dir.path());
    let masks = dir.path().join("oracle");
    fs::create_dir_all(&masks).unwrap();
    for i in 1..=30 {
        fs::copy(
            dir.path().join(format!("groundtruth/gt{i:06}.png")),
            masks.join(format!("bin{i:06}.png")),
        )
        .unwrap();
    }
    args.from_masks = Some(masks);
    let m = cmd_eval(&args).unwrap().metrics;
    assert_eq!((m.recall, m.precision, m.f_measure, m.specificity), (1.0, 1.0, 1.0, 1.0));
    assert_eq!((m.fpr, m.fnr, m.pbc), (0.0, 0.0, 0.0));
}

#[test]
fn eval_runs_the_model_on_a_synthetic_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(160, 120, 27).generator();
    common::write_cdnet(&gen, 120, 61, 120, dir.path());
    let mut args = eval_args(dir.path());
    args.out_masks = Some(dir.path().join("out"));
    let report = cmd_eval(&args).unwrap();
    assert_eq!(report.init_frames.len(), 15);
    assert_eq!(report.init_frames[0], 1);
    assert_eq!(*report.init_frames.last().unwrap(), 60);
    assert_eq!(report.frames_scored, 60);
    assert!(report.metrics.f_measure > 0.8, "{:?}", report.metrics);
    assert_eq!(fs::read_dir(dir.path().join("out")).unwrap().count(), 60);
}

#[test]
fn downsampled_eval_is_scored_at_full_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let gen = Scene::moving_square(160, 120, 28).generator();
    common::write_cdnet(&gen, 60, 31, 60, dir.path());
    let mut args = eval_args(dir.path());
    args.params.downsample = Some(2);
    args.params.min_blob = Some(4);
    let report = cmd_eval(&args).unwrap();
    assert_eq!(report.counts.total(), 30 * 160 * 120);
}

#[test]
fn timing_table_lists_every_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("timing.txt");
    let args = TimingArgs {
        input: None,
        width: 96,
        height: 72,
        sizes: vec![1, 4],
        frames: 60,
        init_count: 15,
        out_timing: Some(out.clone()),
        params: ParamArgs::default(),
    };
    let rows = cmd_timing(&args).unwrap();
    assert_eq!(rows.len(), 2);
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("factor") && text.contains("48x36"));
}
