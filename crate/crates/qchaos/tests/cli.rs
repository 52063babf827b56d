use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn qchaos(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchaos"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn spectrum_writes_three_harmonic_levels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("harmonic.json");
    let o = qchaos(&["--config", cfg.to_str().unwrap(), "spectrum"], dir.path());
    assert_ok(&o);
    let text = fs::read_to_string(dir.path().join("levels.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,energy"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (n, e) in rows.iter().enumerate() {
        assert!((e - (n as f64 + 0.5)).abs() < 1e-6, "level {n}: {e}");
    }
    assert!(!text.contains('\r'));
    assert!(dir.path().join("spectrum.json").exists());
    assert!(dir.path().join("config.echo.json").exists());
}

#[test]
fn missing_potential_file_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("table_missing.json");
    let o = qchaos(&["--config", cfg.to_str().unwrap(), "spectrum"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_potential.csv"));
}

#[test]
fn zero_levels_rejected_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = qchaos(&["spectrum", "--n-levels", "0"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_levels"));
    assert!(!out.exists());
}

#[test]
fn unreadable_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let o = qchaos(&["--config", bad.to_str().unwrap(), "borders"], &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn running_example_borders() {
    let dir = tempfile::tempdir().unwrap();
    let o = qchaos(&["borders"], dir.path());
    assert_ok(&o);
    let r = json(&dir.path().join("report.json"));
    let close = |k: &str, v: f64| assert!((r[k].as_f64().unwrap() - v).abs() < 1e-6, "{k} = {}", r[k]);
    close("e_c", 0.75);
    close("e_q", 0.5);
    close("delta_e", 0.25);
}

#[test]
fn energy_sweep_has_100_rows_matching_domains() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("sweep_e.json");
    let o = qchaos(&["--config", cfg.to_str().unwrap(), "--threads", "3", "borders"], dir.path());
    assert_ok(&o);
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("E,K,E_c,E_q,K_c,K_q,regime"));
    let rows: Vec<(f64, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[6].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));

    let report = json(&dir.path().join("report.json"));
    let e_q = report["e_q"].as_f64().unwrap();
    let domains: Vec<(f64, f64)> = report["domains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| (d["e_q"].as_f64().unwrap(), d["e_c"].as_f64().unwrap()))
        .collect();
    for (e, regime) in &rows {
        let expected = if *e <= e_q {
            "no_chaos_below_quantum_border"
        } else if domains.iter().any(|(a, b)| a < e && e < b) {
            "intermittent_chaos"
        } else {
            "asymptotic_regularity"
        };
        assert_eq!(regime, expected, "E = {e}");
    }
    let sidecar = json(&dir.path().join("sweep.json"));
    assert_eq!(sidecar.as_array().unwrap().len(), 100);
}

#[test]
fn time_dependent_report_omits_quantum_border() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("td.json");
    fs::write(
        &cfg,
        r#"{"system": {"m": 1, "hbar": 1, "d_p": 6.283185307179586, "eps_p": 1, "omega_p": 0.5},
            "mode": "time_dependent"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = qchaos(&["--config", cfg.to_str().unwrap(), "borders"], &out);
    assert_ok(&o);
    let r = json(&out.join("report.json"));
    assert!(r.get("e_q").is_none());
    assert!(r.get("k_q").is_none());
    assert!(r["omega_0c"].as_f64().is_some());
    // K = (2π/λ)² (ω_s/ω_p)² with λ = 1, ω_s = 1, ω_p = 0.5
    let k = r["k"].as_f64().unwrap();
    assert!((k - 16.0 * std::f64::consts::PI.powi(2)).abs() < 1e-6 * k);
}

#[test]
fn time_dependent_without_omega_p_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qchaos(&["borders", "--mode", "time_dependent"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn ensemble_with_fixed_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ensemble", "--seed", "7", "--t-max", "200"];
    assert_ok(&qchaos(&args, dir.path()));
    let first = read_all(dir.path());
    assert_ok(&qchaos(&[&args[..], &["--threads", "3"]].concat(), dir.path()));
    let second = read_all(dir.path());
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["config.echo.json", "ensemble.json", "pdd.csv", "realisations.json", "trace.csv"]
    );
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        if name != "config.echo.json" {
            assert!(a == b, "{name} differs between runs");
        }
    }
    let trace = String::from_utf8(first[4].1.clone()).unwrap();
    assert!(trace.starts_with("t,occupied_index\n"));
    let pdd = String::from_utf8(first[2].1.clone()).unwrap();
    assert!(pdd.starts_with("x,rho_est,rho_exact\n"));
}

#[test]
fn tunnel_on_four_realisation_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("tunnel.json");
    let o = qchaos(&["--config", cfg.to_str().unwrap(), "tunnel"], dir.path());
    assert_ok(&o);
    let r = json(&dir.path().join("tunnel.json"));
    assert_eq!(r["p_beta"].as_f64(), Some(0.5));
    assert_eq!(r["A_set"], serde_json::json!([1, 3]));
    assert_eq!(r["P_beta"].as_f64(), Some(0.5));
    assert_eq!(r["A_minus_set"], serde_json::json!([1, 3]));
}

#[test]
fn tunnel_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("tunnel.json");
    let o = qchaos(&["--config", cfg.to_str().unwrap(), "tunnel", "--eps-s", "5"], dir.path());
    assert_ok(&o);
    assert_eq!(json(&dir.path().join("tunnel.json"))["p_beta"].as_f64(), Some(1.0));
}

#[test]
fn tunnel_barrier_out_of_range_is_compute_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("tunnel.json");
    let o = qchaos(
        &["--config", cfg.to_str().unwrap(), "tunnel", "--beta", "3", "--unperturbed-height", "1.2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn classical_large_k_is_diffusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = qchaos(&["classical", "--K", "5", "--n-orbits", "256", "--n-steps", "2000"], dir.path());
    assert_ok(&o);
    let v = json(&dir.path().join("verdict.json"));
    assert_eq!(v["K_c"].as_f64(), Some(1.0));
    assert_eq!(v["bounded"].as_bool(), Some(false));
    assert_eq!(v["agrees"].as_bool(), Some(true));
    let d = v["D_est"].as_f64().unwrap();
    assert!((d / 12.5 - 1.0).abs() < 0.3, "D_est = {d}");
    let csv = fs::read_to_string(dir.path().join("var_p.csv")).unwrap();
    assert!(csv.starts_with("step,var_p\n"));
    assert_eq!(csv.lines().count(), 2002);
}

#[test]
fn io_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = qchaos(&["spectrum"], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(4));
}
