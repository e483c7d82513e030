use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polariton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polariton"))
        .args(args)
        .env_remove("POLARITON_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = polariton(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    polariton(args).status.code().expect("exit code")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "CSV must use LF endings");
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h.starts_with(&format!("{name} ["))).unwrap_or_else(|| panic!("no column {name}"))
}

const SMALL: [&str; 4] = ["--set", "grid.points=1024", "--set", "grid.length_in_ranges=10"];

#[test]
fn preset_list_names_every_scenario() {
    let out = ok(&["preset", "list"]);
    for name in ["roton", "antiroton", "instability", "local-control"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn preset_show_applies_overrides() {
    let out = ok(&["preset", "show", "roton", "--set", "noise.n0=2.5"]);
    let doc: toml::Table = out.parse().unwrap();
    assert_eq!(doc["noise"]["n0"].as_float(), Some(2.5));
    assert_eq!(doc["name"].as_str(), Some("roton"));
}

#[test]
fn spectrum_single_point_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["--preset", "roton", "spectrum", "--k-count", "1", "--out", out]);
    let (header, rows) = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(header[0], "k [1/m]");
    assert_eq!(rows.len(), 1);
    for name in ["k", "omega0", "re_omega", "im_omega"] {
        assert_eq!(rows[0][col(&header, name)].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn spectrum_shows_roton_dip_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["--preset", "roton", "spectrum", "--k-max", "3000", "--k-count", "601", "--out", out]);
    let path = dir.path().join("spectrum.csv");
    let (header, rows) = read_csv(&path);
    let (ik, iw, iw0) = (col(&header, "k"), col(&header, "re_omega"), col(&header, "omega0"));
    // deepest lowering of Re ω below the free dispersion sits near k_R = 1019 1/m
    let (k_dip, _) = rows
        .iter()
        .map(|r| (r[ik].parse::<f64>().unwrap(), r[iw].parse::<f64>().unwrap() - r[iw0].parse::<f64>().unwrap().abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((k_dip - 1019.0).abs() < 100.0, "dip at {k_dip}");

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "spectrum");
    assert_eq!(manifest["preset"], "roton");
    assert_eq!(manifest["outputs"][0].as_str().unwrap(), path.to_str().unwrap());
    assert!(manifest["scenario_toml"].as_str().unwrap().contains("[medium]"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_polariton"))
        .args(["--preset", "roton", "spectrum", "--k-count", "3"])
        .env("POLARITON_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["--preset", "nope", "spectrum", "--out", out]), 2);
    assert_eq!(code(&["--preset", "roton", "--set", "noise.bogus=1", "spectrum", "--out", out]), 2);
    assert_eq!(code(&["spectrum", "--out", out]), 2);
    assert_eq!(code(&["--preset", "roton", "budget", "--rescue", "omega", "--out", out]), 2);
    // analytic g2 far beyond the linear regime cannot be integrated to tolerance
    assert_eq!(
        code(&["--preset", "instability", "correlations", "--mode", "analytic", "--transits", "30", "--out", out]),
        3
    );
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let nested = blocker.join("sub");
    assert_eq!(code(&["--preset", "roton", "spectrum", "--out", nested.to_str().unwrap()]), 4);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&["--config", missing.to_str().unwrap(), "spectrum", "--out", out]), 4);
}

#[test]
fn config_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(&cfg, ok(&["preset", "show", "antiroton"])).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["--preset", "antiroton", "spectrum", "--k-count", "50", "--out", a.to_str().unwrap()]);
    ok(&["--config", cfg.to_str().unwrap(), "spectrum", "--k-count", "50", "--out", b.to_str().unwrap()]);
    assert_eq!(fs::read(a.join("spectrum.csv")).unwrap(), fs::read(b.join("spectrum.csv")).unwrap());
}

#[test]
fn lossless_guide_zeroes_imperfection_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let table = ok(&["--preset", "roton", "--set", "decoherence.kappa=0", "budget", "--out", out]);
    assert!(table.contains("r_fs"));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("budget.json")).unwrap()).unwrap();
    let b = &report["budget"];
    assert_eq!(b["r_im1"], 0.0);
    assert_eq!(b["r_im2"], 0.0);
    assert_eq!(b["r_prop"], 0.0);
    let r_fs = b["r_fs"].as_f64().unwrap();
    assert!((r_fs / 47443.0 - 1.0).abs() < 0.01, "r_fs = {r_fs}");
}

#[test]
fn rescue_reports_before_and_after() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["--preset", "antiroton", "budget", "--rescue", "omega:12", "--out", out]);
    let (header, rows) = read_csv(&dir.path().join("budget.csv"));
    let stage = col(&header, "stage");
    assert_eq!(rows.iter().filter(|r| r[stage] == "before").count(), 5);
    assert_eq!(rows.iter().filter(|r| r[stage] == "after").count(), 5);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("budget.json")).unwrap()).unwrap();
    assert_eq!(report["rescue"]["factor"], 12.0);
}

#[test]
fn analytic_correlations_without_noise_are_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["--preset", "instability", "--set", "noise.n0=0", "correlations", "--mode", "analytic", "--dz-count", "11", "--out", out]);
    let (header, rows) = read_csv(&dir.path().join("g2.csv"));
    let (th, sim) = (col(&header, "g2_theory"), col(&header, "g2_sim"));
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert_eq!(r[th].parse::<f64>().unwrap(), 1.0);
        assert!(r[sim].is_empty());
    }
}

#[test]
fn simulation_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["--preset", "instability"];
        args.extend(SMALL);
        args.extend(["--seed", "5", "--workers", workers, "simulate", "--members", "6", "--transits", "0,0.1", "--checkpoint"]);
        args.extend(["--out", out.to_str().unwrap()]);
        ok(&args);
        out
    };
    let (a, b) = (run("a", "1"), run("b", "3"));
    for f in ["nk.csv", "checkpoint_0.bin", "checkpoint_1.bin"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(a.join("nk.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);

    // the t = 0 block is the seeded initial state
    let (header, rows) = read_csv(&a.join("nk.csv"));
    let (it, ik) = (col(&header, "t"), col(&header, "k"));
    let initial: Vec<_> = rows.iter().filter(|r| r[it].parse::<f64>().unwrap() == 0.0).collect();
    assert!(!initial.is_empty());
    assert!(initial.iter().any(|r| r[ik].parse::<f64>().unwrap() < 0.0));
}

#[test]
fn simulated_correlations_share_the_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["--preset", "instability"];
    args.extend(SMALL);
    args.extend(["correlations", "--members", "4", "--transits", "0.05", "--dz-count", "9", "--out", out]);
    ok(&args);
    let (header, rows) = read_csv(&dir.path().join("g2.csv"));
    let (th, sim, err) = (col(&header, "g2_theory"), col(&header, "g2_sim"), col(&header, "sim_err"));
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r[th].parse::<f64>().is_ok());
        assert!(r[sim].parse::<f64>().is_ok());
        assert!(r[err].parse::<f64>().is_ok());
    }
}

#[test]
fn seeded_scan_recovers_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["--preset", "roton"];
    args.extend(["--set", "grid.points=2048", "--set", "grid.length_in_ranges=10"]);
    args.extend(["simulate", "--mode", "seeded", "--k", "1019", "--out", out]);
    ok(&args);
    let (header, rows) = read_csv(&dir.path().join("omega.csv"));
    let (th, me) = (col(&header, "theory_re"), col(&header, "measured_re"));
    let theory: f64 = rows[0][th].parse().unwrap();
    let measured: f64 = rows[0][me].parse().unwrap();
    assert!(((measured - theory) / theory).abs() < 1e-3, "{measured} vs {theory}");
}
