//! End-to-end runs of the binary: artifacts, provenance and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmsm-lab"))
        .current_dir(dir)
        .env_remove("LMSM_LAB_CACHE")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

/// Cheap table: three v nodes, first v-derivative only.
const SMALL_KERNEL: &str = "[kernel]\nnv = 3\nq_max = 1\nfourier_points = 3\nfourier_v = [0.8]\n";
/// Single node at v = 0.8, so the table is exact where the checks look.
const NODE_KERNEL: &str = "[kernel]\nnv = 1\nv_min = 0.8\nq_max = 0\nfourier_points = 3\nfourier_v = [0.8]\n";

#[test]
fn list_enumerates_thirteen_criteria_without_running() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(d.path(), &["verify", "--list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = text.lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit())).count();
    assert_eq!(rows, 13, "{text}");
    assert!(!d.path().join("lmsm-out").exists());
}

#[test]
fn invalid_alpha_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    for cmd in ["kernel", "simulate"] {
        let o = lab(d.path(), &[cmd, "--alpha", "2.5"]);
        assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let cfg = write(d.path(), "bad.toml", "alpha = 1.5\nno_such_key = 1\n");
    assert_eq!(code(&lab(d.path(), &["simulate", "--config", &cfg])), 1);
}

#[test]
fn missing_files_are_io_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(d.path(), &["analyze", "nope.csv"])), 3);
    assert_eq!(code(&lab(d.path(), &["simulate", "--config", "nope.toml"])), 3);
}

#[test]
fn analyze_without_input_or_ensemble_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(d.path(), &["analyze"])), 1);
}

#[test]
fn simulate_is_byte_identical_and_carries_provenance() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "run.toml", &format!("seed = 1\n[grid]\npoints = 129\n{SMALL_KERNEL}"));
    let a = lab(d.path(), &["simulate", "--config", &cfg, "--out", "a", "--levels", "6"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = lab(d.path(), &["simulate", "--config", &cfg, "--out", "b", "--levels", "6", "--workers", "1"]);
    assert_eq!(code(&b), 0);
    let ca = std::fs::read(d.path().join("a/path.csv")).unwrap();
    let cb = std::fs::read(d.path().join("b/path.csv")).unwrap();
    assert_eq!(ca, cb, "output location and worker count must not change the bytes");

    let text = String::from_utf8(ca).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# config_hash: sha256:")));
    assert!(text.lines().any(|l| l == "# seed: 1"));
    assert!(text.lines().any(|l| l.starts_with("# lmsm-lab ") && l.contains("lmsm-core")));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 129);

    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("a/path.json")).unwrap()).unwrap();
    assert_eq!(side["hurst"]["kind"], "constant");
    assert_eq!(side["meta"]["truncation"]["n"], 6);
    assert_eq!(side["provenance"]["seed"], 1);

    let other = lab(d.path(), &["simulate", "--config", &cfg, "--out", "c", "--levels", "6", "--seed", "2"]);
    assert_eq!(code(&other), 0);
    assert_ne!(
        std::fs::read(d.path().join("c/path.csv")).unwrap(),
        std::fs::read(d.path().join("a/path.csv")).unwrap()
    );
}

#[test]
fn field_mode_writes_product_grid() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "f.toml",
        &format!("[grid]\nkind = \"field\"\npoints = 9\nv_grid = [0.75, 0.85]\nq = 1\n{SMALL_KERNEL}"),
    );
    let o = lab(d.path(), &["simulate", "--config", &cfg, "--levels", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("lmsm-out/field.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "u,v,X");
    assert_eq!(rows.len(), 1 + 9 * 2);
}

#[test]
fn cache_directory_stores_and_reuses_tables() {
    let d = tempfile::tempdir().unwrap();
    let cache = d.path().join("cache");
    let cfg = write(d.path(), "run.toml", &format!("[grid]\npoints = 65\n{SMALL_KERNEL}"));
    let run = |out: &str| {
        Command::new(env!("CARGO_BIN_EXE_lmsm-lab"))
            .current_dir(d.path())
            .env("LMSM_LAB_CACHE", &cache)
            .args(["simulate", "--config", &cfg, "--levels", "5", "--out", out])
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("x")), 0);
    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.len(), 1);
    assert!(entries[0].to_string_lossy().ends_with(".lmsmkt"));
    assert_eq!(code(&run("y")), 0);
    assert_eq!(
        std::fs::read(d.path().join("x/path.csv")).unwrap(),
        std::fs::read(d.path().join("y/path.csv")).unwrap()
    );
    // Uncached build gives the same numbers.
    let o = lab(d.path(), &["simulate", "--config", &cfg, "--levels", "5", "--out", "z"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read(d.path().join("x/path.csv")).unwrap(),
        std::fs::read(d.path().join("z/path.csv")).unwrap()
    );
}

#[test]
fn analyze_recovers_cusp_exponent_from_fixture() {
    let d = tempfile::tempdir().unwrap();
    let n = 1 << 14;
    let mut csv = String::from("# fixture |t - 0.5|^0.3\nt,Y\n");
    for i in 0..=n {
        let t = i as f64 / n as f64;
        csv.push_str(&format!("{t:.17e},{:.17e}\n", (t - 0.5).abs().powf(0.3)));
    }
    let input = write(d.path(), "cusp.csv", &csv);
    let cfg = write(d.path(), "a.toml", "[analysis]\nestimators = [\"uniform-holder\", \"local-holder\"]\n");
    let o = lab(d.path(), &["analyze", &input, "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("lmsm-out/analysis.json")).unwrap()).unwrap();
    let est = rep["estimates"].as_array().unwrap();
    let uniform = est[0]["value"].as_f64().unwrap();
    assert!((uniform - 0.3).abs() <= 0.02, "uniform {uniform}");
    let local = est[1]["value"].as_f64().unwrap();
    assert!((local - 0.3).abs() <= 0.03, "local {local}");
    let txt = std::fs::read_to_string(d.path().join("lmsm-out/analysis.txt")).unwrap();
    assert!(txt.contains("uniform-holder") && txt.contains("# config_hash"));
}

#[test]
fn ensemble_mode_writes_one_row_per_seed_and_medians() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "e.toml",
        &format!("seed = 7\n[grid]\npoints = 129\n[analysis]\nensemble = 10\nestimators = [\"modulus-global\", \"modulus-local\"]\n{SMALL_KERNEL}"),
    );
    let o = lab(d.path(), &["analyze", "--config", &cfg, "--levels", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("lmsm-out/ensemble.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "seed,modulus-global,modulus-local");
    assert_eq!(rows.len(), 11);
    assert!(rows[1].starts_with("7,") && rows[10].starts_with("16,"));
    let rep: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("lmsm-out/ensemble.json")).unwrap()).unwrap();
    let med = rep["median"]["modulus-global"].as_f64().unwrap();
    let mut vals: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    vals.sort_by(f64::total_cmp);
    assert_eq!(med, 0.5 * (vals[4] + vals[5]));
    assert!(std::fs::read_to_string(d.path().join("lmsm-out/ensemble.txt")).unwrap().contains("median"));
}

#[test]
fn kernel_command_writes_table_and_report_and_is_repeatable() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "k.toml", NODE_KERNEL);
    let a = lab(d.path(), &["kernel", "--config", &cfg, "--out", "a"]);
    assert_eq!(code(&a), 0, "{}{}", String::from_utf8_lossy(&a.stdout), String::from_utf8_lossy(&a.stderr));
    let b = lab(d.path(), &["kernel", "--config", &cfg, "--out", "b"]);
    assert_eq!(code(&b), 0);
    let ta = std::fs::read(d.path().join("a/kernel.lmsmkt")).unwrap();
    assert_eq!(ta, std::fs::read(d.path().join("b/kernel.lmsmkt")).unwrap());
    assert_eq!(&ta[..8], b"LMSMKT01");
    let rep: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("a/kernel_report.json")).unwrap()).unwrap();
    assert!(rep["checks"]["fourier_max"].as_f64().unwrap() < 1e-3);
    assert_eq!(rep["checks"]["pass"], true);
    assert!(rep["table"]["header"]["provenance"]["config_hash"].is_string());
}

#[test]
fn tightened_fourier_tolerance_fails_with_exit_code_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "t.toml", "[tolerances]\nfourier = 1e-9\n");
    let o = lab(d.path(), &["verify", "1", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("[FAIL]  1 kernel-fourier") && out.contains("max rel error"), "{out}");
    let rep: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("lmsm-out/verify.json")).unwrap()).unwrap();
    assert_eq!(rep["results"][0]["pass"], false);
    assert!(rep["results"][0]["detail"]["per_v"].as_array().unwrap().len() == 3);
}

#[test]
fn unknown_criterion_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(d.path(), &["verify", "99"])), 1);
}

#[test]
fn default_truncation_on_4096_points_fits_the_time_budget() {
    let d = tempfile::tempdir().unwrap();
    let cfg =
        write(d.path(), "p.toml", "[truncation]\nm = 2.0\nn = 12\n[grid]\nt_min = -1.0\nt_max = 1.0\npoints = 4096\n");
    let start = std::time::Instant::now();
    let o = lab(d.path(), &["simulate", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(start.elapsed().as_secs() < 300);
}
