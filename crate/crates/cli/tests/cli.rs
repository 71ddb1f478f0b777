use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mflin::artifacts::Manifest;
use mflin::{run, RunOptions};
use mflin_core::equilibrium::solve_bessel_selfconsistency;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn mflin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mflin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn bounds(dir: &Path, name: &str, experiment: &str) -> Value {
    let cfg = write_config(
        dir,
        &format!("{name}.json"),
        &format!(r#"{{"schema_version": 1, "experiment": {{"bounds_report": {experiment}}}}}"#),
    );
    let out = dir.join(name);
    let res = mflin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    read_json(&out.join("bounds_report.json"))
}

#[test]
fn empty_config_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "empty.json", "  \n");
    let out = tmp.path().join("out");
    let res = mflin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 1"));
    assert!(!out.exists());
}

#[test]
fn schema_violations_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "typo.json",
        "{\n  \"schema_version\": 1,\n  \"experiment\": {\n    \"clt_torus\": {\n      \"betta\": 1\n    }\n  }\n}\n",
    );
    let out = tmp.path().join("out");
    let res = mflin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 5") && err.contains("betta"), "{err}");
    assert!(!out.exists());

    let cfg = write_config(
        tmp.path(),
        "version.json",
        r#"{"schema_version": 9, "experiment": {"mle_ou": {}}}"#,
    );
    assert_eq!(mflin(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_1_with_the_error_chain() {
    let tmp = tempfile::tempdir().unwrap();
    // the score root lies well below Θ, so the bracket fails
    let cfg = write_config(
        tmp.path(),
        "short.json",
        r#"{"schema_version": 1, "experiment": {"mle_ou": {
            "n_particles": 4, "dt": 0.01, "t_final": 50, "n_horizons": 1,
            "theta0": 4.9, "theta_domain": [4.8, 5.0], "x0": 0.0}}}"#,
    );
    let out = tmp.path().join("out");
    let res = mflin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert!(String::from_utf8_lossy(&res.stderr).contains("estimation"));
    assert!(!out.exists());
}

#[test]
fn default_mle_ou_recovers_theta() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ou.json",
        r#"{"schema_version": 1, "seed": 7, "experiment": {"mle_ou": {}}}"#,
    );
    let opts = RunOptions {
        out: Some(tmp.path().join("ou")),
        ..RunOptions::default()
    };
    let (dir, _) = run(Path::new(&cfg), &opts).unwrap();
    let csv = fs::read_to_string(dir.join("estimate_trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("T,theta_hat,theta_tilde"));
    let last: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 500.0);
    assert!((last[2] - 1.0).abs() <= 0.1, "theta_tilde {}", last[2]);
}

#[test]
fn clt_run_reports_the_bessel_diffusion() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "clt.json",
        r#"{"schema_version": 1, "experiment": {"clt_torus": {
            "n_particles": 8, "n_realizations": 50, "t_final": 5}}}"#,
    );
    let out = tmp.path().join("clt");
    let res = mflin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let d = read_json(&out.join("D_value.json"));
    let exact = solve_bessel_selfconsistency(0.5, 1.0, 1e-15)
        .unwrap()
        .effective_diffusion();
    assert!((d["D"].as_f64().unwrap() - exact).abs() < 1e-8);
    let hist = fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 41);
}

#[test]
fn manifest_hashes_match_files_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "line.json",
        r#"{"schema_version": 1, "experiment": {"entropy_decay_line": {"grid_points": 200, "t_final": 1}}}"#,
    );
    let manifest = |name: &str, extra: &[&str]| -> Manifest {
        let out = tmp.path().join(name);
        let mut args = vec!["run", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let res = mflin(&args);
        assert!(res.status.success());
        let m: Manifest =
            serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
        for f in &m.files {
            let bytes = fs::read(out.join(&f.name)).unwrap();
            assert_eq!(bytes.len(), f.bytes);
            assert_eq!(hex::encode(Sha256::digest(&bytes)), f.sha256);
        }
        m
    };
    let a = manifest("a", &[]);
    let b = manifest("b", &["--threads", "2"]);
    assert_eq!(a, b);
    assert!(a.files.iter().any(|f| f.name == "fp_series.csv"));
}

#[test]
fn seed_override_changes_simulations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ou.json",
        r#"{"schema_version": 1, "experiment": {"mle_ou": {"n_particles": 10, "dt": 0.01, "t_final": 20, "n_horizons": 2}}}"#,
    );
    let trace = |seed: &str| {
        let out = tmp.path().join(seed);
        let res = mflin(&["run", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(res.status.success());
        fs::read(out.join("estimate_trace.csv")).unwrap()
    };
    assert_eq!(trace("1"), trace("1"));
    assert_ne!(trace("1"), trace("2"));
}

#[test]
fn zero_torus_model_has_trivial_constants() {
    let tmp = tempfile::tempdir().unwrap();
    let beta = 2.0;
    let r = bounds(
        tmp.path(),
        "zero",
        r#"{"domain": "torus", "beta": 2.0, "confining": "zero", "interaction": "zero"}"#,
    );
    let k = &r["constants"];
    assert!((k["Gamma"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let zeta = std::f64::consts::PI.powi(2) / (4.0 * beta);
    assert!((k["zeta"].as_f64().unwrap() - zeta).abs() < 1e-12);
    assert_eq!(r["hypotheses"]["zeta_positive"], true);
}

#[test]
fn convex_line_model_reports_uniform_lsi_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let r = bounds(
        tmp.path(),
        "line",
        r#"{"domain": "line", "beta": 1.0, "confining": {"quadratic": 1.0}, "interaction": {"quadratic": 0.5}, "initial_var": 0.1}"#,
    );
    let k = &r["constants"];
    assert_eq!(k["alpha"], 1.0);
    assert_eq!(k["gamma"], 0.5);
    // Λ = max(λ0, 1/(2β(α+γ))) with λ0 = 2·0.1
    assert!((k["Lambda"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((k["lambda0"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn nonconvex_line_model_reports_flags_only() {
    let tmp = tempfile::tempdir().unwrap();
    let r = bounds(
        tmp.path(),
        "bistable",
        r#"{"domain": "line", "beta": 1.0, "confining": {"bistable": 1.0}, "interaction": {"quadratic": 1.0}}"#,
    );
    assert_eq!(r["hypotheses"]["confining_uniformly_convex"], false);
    assert!(r["constants"].is_null());
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        mflin::load(&path, &RunOptions::default())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        mflin::load(
            &path,
            &RunOptions {
                paper_scale: true,
                ..RunOptions::default()
            },
        )
        .unwrap();
        n += 1;
    }
    assert!(n >= 7);
}
