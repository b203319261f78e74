//! End-to-end tests of the binary: exit codes, artifact determinism, config
//! layering, and the binary field format in the wild.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fockbench"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fockbench-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn configuration_errors_exit_one() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("not-an-experiment").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["g-field", "--nope", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["g-field", "--symbol", "frob(z)"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("frob"), "{err}");
}

#[test]
fn kernel_check_passes_and_writes_artifacts() {
    let dir = temp_dir("kernel");
    let out = bin()
        .args([
            "kernel-check",
            "--samples",
            "2000",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let manifest = fs::read_to_string(dir.join("run/run.manifest")).unwrap();
    assert!(manifest.contains("experiment=kernel-check"));
    assert!(manifest.contains("outcome=pass"));
    assert!(manifest.contains("grid_r_max="));
    assert!(manifest.contains("wall_ms="));
    assert!(dir.join("run/kernel_check.csv").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn forced_tolerance_failure_exits_two() {
    let dir = temp_dir("tolfail");
    let out = bin()
        .args([
            "kernel-check",
            "--samples",
            "500",
            "--tol",
            "1e-20",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let manifest = fs::read_to_string(dir.join("run/run.manifest")).unwrap();
    assert!(manifest.contains("outcome=check-failure"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn gfield_csv_is_byte_identical_across_runs() {
    let dir = temp_dir("det");
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.join(run);
        let status = bin()
            .args([
                "g-field",
                "--symbol",
                "zbar",
                "--extent",
                "2",
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        bytes.push(fs::read(out_dir.join("gfield.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_is_overridden_by_cli_keys() {
    let dir = temp_dir("cfg");
    let cfg_path = dir.join("exp.cfg");
    fs::write(&cfg_path, "q = 1.5\nextent = 2\nsymbol = zbar\n").unwrap();
    let out_dir = dir.join("run");
    let status = bin()
        .args([
            "g-field",
            "--config",
            cfg_path.to_str().unwrap(),
            "--q",
            "2",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = fs::read_to_string(out_dir.join("run.manifest")).unwrap();
    assert!(manifest.contains("q=2"), "{manifest}");
    assert!(manifest.contains("extent=2"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn suite_filter_runs_a_single_criterion() {
    let dir = temp_dir("suite");
    let out = bin()
        .args([
            "suite",
            "--filter",
            "kernel",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(stdout.contains("criterion 1 kernel-identity [PASS]"), "{stdout}");
    let csv = fs::read_to_string(dir.join("run/suite.csv")).unwrap();
    assert!(csv.starts_with("criterion,name,check,observed,threshold,passed"));
    assert!(csv.contains("kernel-identity"));
    // a filter matching nothing is a configuration error
    let out = bin()
        .args(["suite", "--filter", "zzz", "--out", dir.join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn beurling_writes_a_readable_field_file() {
    let dir = temp_dir("beurling");
    let out_dir = dir.join("run");
    let status = bin()
        .args(["beurling", "--out", out_dir.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let field = fockbench::fieldio::read_field(&out_dir.join("beurling_output.fgrid")).unwrap();
    assert_eq!(field.n, 256);
    assert!(field.peak() > 0.0);
    let csv = fs::read_to_string(out_dir.join("beurling_output.csv")).unwrap();
    assert!(csv.starts_with("x,y,re,im"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn quantize_accepts_expression_symbols() {
    let dir = temp_dir("quantize");
    let out_dir = dir.join("run");
    let out = bin()
        .args([
            "quantize",
            "--f",
            "sin(re(z))",
            "--g",
            "sin(re(z))",
            "--tmin",
            "0.1",
            "--n",
            "24",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = fs::read_to_string(out_dir.join("defect.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,defect_norm,hankel_f_bar_norm,hankel_g_norm,product_bound"
    );
    let first: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let last: f64 = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(last < 0.25 * first, "defect table not decaying: {first} -> {last}");
    let manifest = fs::read_to_string(out_dir.join("run.manifest")).unwrap();
    assert!(manifest.contains("f_bound=empirical:"), "{manifest}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unbounded_symbol_for_quantize_is_a_config_error() {
    let dir = temp_dir("unbounded");
    let out = bin()
        .args([
            "quantize",
            "--f",
            "zbar",
            "--n",
            "16",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    fs::remove_dir_all(&dir).ok();
}
