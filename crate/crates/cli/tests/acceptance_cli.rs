//! CLI acceptance: byte-identical outputs under repeated seeded runs
//! (criterion 9), plus the command-level contracts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qeraser(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeraser"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let entry = entry.unwrap();
            (
                entry.file_name().to_string_lossy().into_owned(),
                fs::read(entry.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

fn assert_identical_runs(command: &str, extra: &[&str]) {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let mut args = vec![command, "--seed", "20240817", "--out"];
        let dir_str = dir.to_str().unwrap();
        args.push(dir_str);
        args.extend_from_slice(extra);
        let output = qeraser(&args);
        assert!(
            output.status.success(),
            "{command} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let files_a = read_dir_files(dir_a.path());
    let files_b = read_dir_files(dir_b.path());
    assert!(!files_a.is_empty());
    assert_eq!(files_a.len(), files_b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in files_a.iter().zip(files_b.iter()) {
        assert_eq!(name_a, name_b);
        assert_eq!(
            bytes_a, bytes_b,
            "{command}: {name_a} differs between identical seeded runs"
        );
    }
}

#[test]
fn criterion_9_byte_identical_outputs() {
    assert_identical_runs("figure2", &["--alpha", "0:0.5pi:9", "--counts", "400"]);
    assert_identical_runs("figure3", &["--alpha", "0:0.45pi:9", "--counts", "400"]);
    assert_identical_runs("montecarlo", &["--trials", "40", "--counts", "1000"]);
    println!(
        "PASS criterion 9: figure2/figure3/montecarlo outputs are byte-identical across \
         repeated runs with the same seed"
    );
}

#[test]
fn different_seeds_change_sampled_output() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(dir_a.path(), "1"), (dir_b.path(), "2")] {
        let output = qeraser(&[
            "figure2",
            "--seed",
            seed,
            "--out",
            dir.to_str().unwrap(),
            "--alpha",
            "0.1pi:0.4pi:4",
            "--counts",
            "400",
        ]);
        assert!(output.status.success());
    }
    let a = fs::read(dir_a.path().join("figure2_theta1.csv")).unwrap();
    let b = fs::read(dir_b.path().join("figure2_theta1.csv")).unwrap();
    assert_ne!(a, b, "different seeds must resample the counts");
}

fn stdout_field(output: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&output.stdout);
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(&format!("{key} = ")) {
            let first = rest.split_whitespace().next().unwrap();
            return first.parse().unwrap();
        }
    }
    panic!("field {key} not found in: {text}");
}

#[test]
fn weak_value_examples() {
    // alpha = 0.25 pi: sigma_{x,w} = tan(pi/4) = 1, argument 0.
    let output = qeraser(&["weak-value", "--n", "x", "--alpha", "0.25pi"]);
    assert!(output.status.success());
    assert!((stdout_field(&output, "A_w") - 1.0).abs() < 1e-12);
    assert!(stdout_field(&output, "geometric_arg").abs() < 1e-12);

    // alpha = 0: the weak value vanishes.
    let output = qeraser(&["weak-value", "--n", "x", "--alpha", "0"]);
    assert!(output.status.success());
    assert!(stdout_field(&output, "A_w").abs() < 1e-12);

    // alpha = 0.5 pi: orthogonal post-selection, exit code 2.
    let output = qeraser(&["weak-value", "--n", "x", "--alpha", "0.5pi"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("orthogonal post-selection"));
}

#[test]
fn weak_value_explicit_matrix_and_states() {
    // sigma_z as an explicit matrix, psi_f = |+>: weak value 1.
    let output = qeraser(&[
        "weak-value",
        "--obs",
        "1,0,0,0,0,0,-1,0",
        "--psi-f",
        "0.70710678118654752,0,0.70710678118654752,0",
    ]);
    assert!(output.status.success());
    assert!((stdout_field(&output, "A_w") - 1.0).abs() < 1e-12);
}

#[test]
fn verify_command_passes_and_reports() {
    let output = qeraser(&["verify", "--trials", "10", "--seed", "5"]);
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn figure_csv_format_contract() {
    let dir = tempfile::tempdir().unwrap();
    let output = qeraser(&[
        "figure2",
        "--out",
        dir.path().to_str().unwrap(),
        "--alpha",
        "0.2pi",
        "--counts",
        "200",
    ]);
    assert!(output.status.success());
    let csv = fs::read_to_string(dir.path().join("figure2_theta1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha_rad,V_theory,V_sampled,arg_rad,criterion"
    );
    let row = lines.next().unwrap();
    assert_eq!(row.split(',').count(), 5);
    // Full round-trip precision decimal fields.
    for field in row.split(',') {
        let _: f64 = field.parse().unwrap();
        assert!(
            field.contains('e'),
            "field {field} is not in scientific form"
        );
    }

    let output = qeraser(&[
        "figure3",
        "--out",
        dir.path().to_str().unwrap(),
        "--alpha",
        "0.2pi",
    ]);
    assert!(output.status.success());
    let csv = fs::read_to_string(dir.path().join("figure3_theta1.csv")).unwrap();
    assert!(csv.starts_with("alpha_rad,wv_exact,wv_polar,wv_weakapprox\n"));

    // Manifest names every CSV with its digest.
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("command = figure3"));
    assert!(manifest.contains("output = figure3_theta1.csv sha256="));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(
        &config,
        "preset = custom\ntheta = 0.3pi\npurity = 0.9\nalpha_grid = 0.1pi,0.2pi\ncounts = 300\nseed = 99\n",
    )
    .unwrap();
    let output = qeraser(&[
        "figure2",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(dir.path().join("figure2_custom.csv").exists());
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("spec_preset = custom"));
    assert!(manifest.contains("seed = 99"));
}
