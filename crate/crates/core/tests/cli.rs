use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(format!("{name}.conf"))
}

fn gppa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gppa"))
        .args(args)
        .env_remove("GPPA_G0")
        .output()
        .expect("run gppa")
}

fn run(experiment: &str, extra: &[&str]) -> Output {
    let cfg = config(experiment);
    let mut args = vec![experiment, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    gppa(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON object")
}

#[test]
fn csv_header_echoes_the_resolved_config() {
    let o = run("delta_resonance", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema = delta_resonance/v1");
    assert_eq!(lines[1], "# experiment = delta_resonance");
    assert!(lines.contains(&"# g0 = 1.0"));
    assert!(lines.contains(&"# nodes = 400"));
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        lines[header],
        "g0,n,eps_res,k,re_de,im_de,gamma_re,gamma_im,gamma_over_k2pi,tkk,dominance,iterations,method"
    );
    assert_eq!(lines.len(), header + 2);
    let eps: f64 = lines[header + 1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((eps - 0.99390).abs() < 1e-4, "eps_res = {eps}");
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.json");
    let o = run(
        "floquet_profile",
        &["--set", "eps_count=5", "--format", "json", "--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["eps", "t0_sq", "flux", "n_side"]);
    for r in rows {
        assert!((r["flux"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn sets_override_file_and_environment() {
    let cfg = config("delta_resonance");
    let o = Command::new(env!("CARGO_BIN_EXE_gppa"))
        .args(["delta_resonance", "--config", cfg.to_str().unwrap()])
        .env("GPPA_G0", "0.8")
        .output()
        .unwrap();
    assert!(stdout(&o).lines().any(|l| l == "# g0 = 0.8"));
    let o = Command::new(env!("CARGO_BIN_EXE_gppa"))
        .args(["delta_resonance", "--config", cfg.to_str().unwrap(), "--set", "g0=0.9"])
        .env("GPPA_G0", "0.8")
        .output()
        .unwrap();
    assert!(stdout(&o).lines().any(|l| l == "# g0 = 0.9"));
}

#[test]
fn sweeps_prepend_their_column() {
    let o = run("delta_resonance", &["--set", "sweep=g0:0.9:1.1:3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("g0,n,eps_res"));
    assert_eq!(rows.len(), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let a = run("dho_probabilities", &["--set", "threads=1"]);
    let b = run("dho_probabilities", &["--set", "threads=4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validation_errors_exit_2() {
    for extra in [
        &["--set", "sigma=2"][..],
        &["--set", "bogus=1"][..],
        &["--set", "r_max=x"][..],
        &["--format", "xml"][..],
    ] {
        let o = run("dho_lifetime", extra);
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
        let e = error_json(&o);
        assert_eq!(e["error"], "validation");
        assert_eq!(e["code"], 2);
        assert!(!e["messages"].as_array().unwrap().is_empty());
    }
    let o = gppa(&["no_such_experiment", "--config", config("dho_lifetime").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = gppa(&["dho_lifetime", "--config", "/definitely/not/here.conf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sigma_rule_can_be_forced() {
    let o = run("dho_lifetime", &["--set", "sigma=2", "--set", "force=true", "--set", "sweep=none"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn numerical_failures_exit_3() {
    // ε + n lands exactly on a channel threshold
    let o = run("floquet_profile", &["--set", "eps_start=0.5", "--set", "eps_stop=1.0", "--set", "eps_count=3"]);
    assert_eq!(o.status.code(), Some(3));
    let e = error_json(&o);
    assert_eq!(e["error"], "numerical");
    assert!(e["messages"][0].as_str().unwrap().contains("threshold"));
}
