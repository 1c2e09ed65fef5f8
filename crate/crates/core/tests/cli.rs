use std::path::Path;
use std::process::Command;

use hzspf::cli::{fmt_real, BENCH_HEADER};

fn hzspf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hzspf")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn constant_scene_converges_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!("model = \"hzspf\"\noutput_dir = \"{}\"\n[synth]\nwidth = 40\nheight = 40\nbackground_intensity = 0.4\n", path(&dir.path().join("seg"))),
    )
    .unwrap();
    let out = hzspf(&["segment", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("seg/report.csv")).unwrap();
    assert_eq!(report, "iteration,residual\n1,0\n");
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_image.pgm");
    let out = hzspf(&["segment", "--input", path(&missing), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_image.pgm"));
}

#[test]
fn bad_parameter_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = hzspf(&["segment", "--suite", "single-bias", "--set", "sigma_reg=-1", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma_reg"));
    let out = hzspf(&["segment", "--suite", "single-bias", "--set", "init=circle:5,5,40", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("init"));
    assert!(!dir.path().join("mask.pgm").exists());
}

#[test]
fn segment_synthetic_case_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = hzspf(&["segment", "--suite", "single-bias", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    for f in ["mask.pgm", "overlay.pgm", "report.csv", "metrics.csv", "params.toml"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next(), Some("dsc,js"));
    let dsc: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(dsc > 0.95);
    let echo = std::fs::read_to_string(dir.path().join("params.toml")).unwrap();
    assert!(hzspf::config::RunConfig::from_toml_str(&echo).is_ok());
}

#[test]
fn exhausted_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = hzspf(&["segment", "--suite", "single-bias", "--set", "max_iter=2", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
}

#[test]
fn segment_file_input_with_truth() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    assert!(hzspf(&["synth", "--suite", "multi3-bias", "--out", path(&scene)]).status.success());
    let seg = dir.path().join("seg");
    let out = hzspf(&[
        "segment",
        "--model",
        "sbgfrls",
        "--input",
        path(&scene.join("image.pgm")),
        "--truth",
        path(&scene.join("truth.pgm")),
        "--out",
        path(&seg),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(seg.join("metrics.csv").exists());
}

#[test]
fn synth_suites_write_per_case_directories() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hzspf(&["synth", "--suite", "noise-types", "--seed", "3", "--out", path(dir.path())]).status.success());
    for case in ["gaussian", "salt_pepper", "poisson", "speckle"] {
        for f in ["image.pgm", "truth.pgm", "spec.toml"] {
            assert!(dir.path().join(case).join(f).exists(), "{case}/{f}");
        }
    }
    let truth = hzspf::grid::load_image(dir.path().join("poisson/truth.pgm")).unwrap();
    assert!(truth.values().iter().all(|&v| v == 0.0 || v == 1.0));
}

#[test]
fn synth_rejects_out_of_range_intensity() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    std::fs::write(&spec, "width = 8\nheight = 8\nbackground_intensity = 1.5\n").unwrap();
    let out = hzspf(&["synth", "--config", path(&spec), "--out", path(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("background_intensity"));
}

#[test]
fn noise_command_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hzspf(&["synth", "--suite", "single-bias", "--out", path(dir.path())]).status.success());
    let input = dir.path().join("image.pgm");
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    for out in [&a, &b] {
        let o = hzspf(&["noise", "--input", path(&input), "--out", path(out), "--kind", "salt_pepper", "--density", "0.2", "--seed", "9"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(dir.path().join("a.noise.toml").exists());
    let bad = hzspf(&["noise", "--input", path(&input), "--out", path(&a), "--kind", "pink"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bench_row_counts_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = hzspf(&["bench", "--suite", "noise-sweep", "--model", "hzspf", "--out", path(dir.path())]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], BENCH_HEADER);
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[1], "hzspf");
        assert!(fields[5].parse::<f64>().is_ok());
    }

    let out = hzspf(&["bench", "--suite", "single-bias", "--model", "hzspf,cv,sbgfrls", "--out", path(dir.path())]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let models: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(models, ["hzspf", "cv", "sbgfrls"]);
    assert!(dir.path().join("params.toml").exists());
}

#[test]
fn bench_columns_other_than_timing_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        assert!(hzspf(&["bench", "--suite", "noise-types", "--model", "sbgfrls", "--seed", "4", "--out", path(&out)]).status.success());
        std::fs::read_to_string(out.join("bench.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn unknown_subcommand_and_help() {
    assert_eq!(hzspf(&["frobnicate"]).status.code(), Some(1));
    let help = hzspf(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("segment"));
}

#[test]
fn six_significant_digits() {
    assert_eq!(fmt_real(0.123456789), "0.123457");
    assert_eq!(fmt_real(2.0 / 3.0), "0.666667");
}
