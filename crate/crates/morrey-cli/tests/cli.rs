//! End-to-end tests of the `morrey` binary: exit codes, artifact layout,
//! determinism, resume identity, and contour output structure.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn morrey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morrey"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Parses `contours.txt` into (level, polylines) sections.
fn parse_contours(path: &Path) -> Vec<(f64, Vec<Vec<[f64; 2]>>)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("morrey contours v1"));
    let mut sections = Vec::new();
    let mut current: Option<(f64, Vec<Vec<[f64; 2]>>)> = None;
    for line in lines {
        if let Some(level) = line.strip_prefix("level ") {
            if let Some(section) = current.take() {
                sections.push(section);
            }
            current = Some((level.parse().unwrap(), Vec::new()));
        } else if let Some(count) = line.strip_prefix("polyline ") {
            let count: usize = count.parse().unwrap();
            current
                .as_mut()
                .expect("polyline outside level section")
                .1
                .push(Vec::with_capacity(count));
        } else {
            let mut parts = line.split_whitespace();
            let x: f64 = parts.next().unwrap().parse().unwrap();
            let y: f64 = parts.next().unwrap().parse().unwrap();
            current
                .as_mut()
                .unwrap()
                .1
                .last_mut()
                .expect("vertex outside polyline")
                .push([x, y]);
        }
    }
    if let Some(section) = current.take() {
        sections.push(section);
    }
    sections
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exit_code(&morrey(&["--help"])), 0);
    assert_eq!(exit_code(&morrey(&["--version"])), 0);
}

#[test]
fn bad_flag_exits_one() {
    assert_eq!(exit_code(&morrey(&["--no-such-flag"])), 1);
}

#[test]
fn unknown_and_duplicate_config_keys_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "n = 2\nwibble = 7\n").unwrap();
    let out = morrey(&["--config", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("wibble"), "{}", stderr_text(&out));

    fs::write(&bad, "k = 2\nk = 3\n").unwrap();
    let out = morrey(&["--config", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn missing_config_file_exits_three() {
    let out = morrey(&["--config", "/nonexistent/morrey.cfg"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn invalid_exponent_exits_one() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = morrey(&["--n", "2", "--p", "1.5", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn bad_analysis_and_levels_lists_exit_one() {
    assert_eq!(exit_code(&morrey(&["--analysis", "nonsense"])), 1);
    assert_eq!(exit_code(&morrey(&["--levels", "0.2,zebra"])), 1);
}

#[test]
fn divergent_fixed_step_exits_two() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = morrey(&[
        "--n", "2", "--ell", "2", "--k", "2", "--tau", "10", "--iters", "200",
        "--analysis", "none",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("error:"));
}

#[test]
fn one_dimensional_report_carries_the_sharp_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        "n = 1\nell = 2\nk = 10\np = 4\nadaptive = true\nmax_iters = 50000\n\
         grad_tol = 1e-12\nseminorm_mode = exact\n",
    )
    .unwrap();
    let out = morrey(&[
        "--config", cfg.to_str().unwrap(),
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let report = fs::read_to_string(out_dir.join("report.txt")).unwrap();
    let c_star: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("seminorm.c_star_estimate = "))
        .expect("report lists the sharp-constant estimate")
        .parse()
        .unwrap();
    assert!((c_star - 1.0).abs() <= 1e-10, "C* = {c_star}");
}

#[test]
fn flags_override_config_file_values() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    fs::write(&cfg, "n = 2\nell = 2\nk = 2\nmax_iters = 50\nanalysis = none\n").unwrap();
    let out = morrey(&[
        "--config", cfg.to_str().unwrap(),
        "--k", "3",
        "--adaptive",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let report = fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.contains("\nk = 3\n"));
    assert!(report.contains("\nadaptive = true\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let args = [
        "--n", "2", "--ell", "3", "--k", "2", "--adaptive", "--iters", "200000",
        "--out", out_dir.to_str().unwrap(),
    ];
    assert_eq!(exit_code(&morrey(&args)), 0);
    let report_a = fs::read(out_dir.join("report.txt")).unwrap();
    let archive_a = fs::read(out_dir.join("field.archive")).unwrap();
    let contours_a = fs::read(out_dir.join("contours.txt")).unwrap();
    assert_eq!(exit_code(&morrey(&args)), 0);
    assert_eq!(report_a, fs::read(out_dir.join("report.txt")).unwrap());
    assert_eq!(archive_a, fs::read(out_dir.join("field.archive")).unwrap());
    assert_eq!(contours_a, fs::read(out_dir.join("contours.txt")).unwrap());
}

#[test]
fn resumed_run_recovers_the_uninterrupted_archive() {
    let dir = TempDir::new().unwrap();
    let full_dir = dir.path().join("full");
    let split_dir = dir.path().join("split");
    let base = [
        "--n", "2", "--ell", "2", "--k", "2", "--tau", "1e-3",
        "--analysis", "none",
    ];

    let mut full = base.to_vec();
    full.extend(["--iters", "400", "--out", full_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&morrey(&full)), 0);

    let mut head = base.to_vec();
    head.extend(["--iters", "150", "--out", split_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&morrey(&head)), 0);
    let head_archive = split_dir.join("field.archive");
    let resumed = split_dir.join("resumed");
    let mut tail = base.to_vec();
    tail.extend([
        "--iters", "400",
        "--resume", head_archive.to_str().unwrap(),
        "--out", resumed.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&morrey(&tail)), 0);

    let full_bytes = fs::read(full_dir.join("field.archive")).unwrap();
    let resumed_bytes = fs::read(resumed.join("field.archive")).unwrap();
    assert_eq!(full_bytes, resumed_bytes);
}

#[test]
fn contour_sections_mirror_and_empty_out() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        "n = 2\nell = 3\nk = 8\nadaptive = true\nmax_iters = 2000000\n\
         grad_tol_rel = 1e-6\nanalysis = none\n\
         levels = -0.6, -0.2, 0, 0.2, 0.6, 1.5\n",
    )
    .unwrap();
    let out = morrey(&[
        "--config", cfg.to_str().unwrap(),
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let sections = parse_contours(&out_dir.join("contours.txt"));
    let levels: Vec<f64> = sections.iter().map(|(l, _)| *l).collect();
    assert_eq!(levels, vec![-0.6, -0.2, 0.0, 0.2, 0.6, 1.5]);

    let get = |level: f64| -> &Vec<Vec<[f64; 2]>> {
        &sections.iter().find(|(l, _)| *l == level).unwrap().1
    };

    // Above the global maximum: an empty section, not an error.
    assert!(get(1.5).is_empty());

    // The zero level hugs the midplane.
    let zero = get(0.0);
    assert!(!zero.is_empty());
    for polyline in zero {
        for &[_, y] in polyline {
            assert!(y.abs() <= 0.2, "zero-level vertex strayed to y = {y}");
        }
    }

    // Symmetric levels come out as mirror images up to the reflection
    // bias of the forward-difference scheme, which the flat far field
    // amplifies; vertices near the pins mirror the tightest.
    for level in [0.2, 0.6] {
        let plus: Vec<[f64; 2]> = get(level).iter().flatten().copied().collect();
        let minus: Vec<[f64; 2]> = get(-level).iter().flatten().copied().collect();
        assert!(!plus.is_empty() && !minus.is_empty());
        for &[x, y] in &plus {
            let nearest = minus
                .iter()
                .map(|&[mx, my]| ((mx - x).powi(2) + (my + y).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            let tol = if x.abs() <= 2.0 && y.abs() <= 2.0 { 0.3 } else { 0.4 };
            assert!(
                nearest <= tol,
                "no mirror partner near ({x}, {}) at level {level} (nearest {nearest})",
                -y
            );
        }
    }
}
