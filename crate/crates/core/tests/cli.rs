use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kstab")).args(args).env_remove("KSTAB_THREADS").output().expect("binary runs")
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"weights\": [1, 2,\n}\n").unwrap();
    let o = kstab(&["futaki", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");
}

#[test]
fn missing_input_exits_2() {
    let o = kstab(&["moment", "--input", "/nonexistent/cycle.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(kstab(&["bergman", "--input", &data("metrics/round.json"), "--k", "0:4"]).status.code(), Some(2));
    assert_eq!(kstab(&["futaki", "--input", &data("conic.json"), "--sign", "sideways"]).status.code(), Some(2));
}

#[test]
fn futaki_on_conic_is_exact_and_repeatable() {
    let a = kstab(&["futaki", "--input", &data("conic.json")]);
    let b = kstab(&["futaki", "--input", &data("conic.json"), "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["futaki"], "1/8");
    assert_eq!(v["chow"][0]["value"], "1/12");
}

#[test]
fn sign_flag_flips_futaki() {
    let o = kstab(&["futaki", "--input", &data("conic.json"), "--sign", "flipped", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("inf,-1/8\n"), "{}", stdout(&o));
}

#[test]
fn chow_on_conic_degeneration_matches_pairing() {
    let o = kstab(&["chow", "--input", &data("chow/conic_degeneration.json")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["chow_weight"], "1/12");
    assert!((v["pairing"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-6);
    assert_eq!(v["inequality_holds"], true);
}

#[test]
fn factorize_reports_weights() {
    let o = kstab(&["factorize", "--input", &data("loops/conic_degeneration.json")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["weights"], serde_json::json!([1, 0, 0]));
}

#[test]
fn balance_writes_csv_and_signals_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("history.csv");
    let cubic = data("cycles/distorted_cubic.json");
    let o = kstab(&["balance", "--input", &cubic, "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("step,trace_norm\n"));
    let last: f64 = csv.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last <= 1e-8);

    let o = kstab(&["balance", "--input", &cubic, "--max-steps", "2"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["converged"], false);
}

#[test]
fn bergman_csv_is_fixed_width_and_deterministic() {
    let args = ["bergman", "--input", &data("metrics/perturbed.json"), "--k", "8,16,32", "--grid", "4", "--format", "csv"];
    let a = kstab(&args);
    let b = kstab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,gridpoint,rho,a1_fit,theta_tv"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    for field in rows[0].split(',').skip(1) {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn invalid_metric_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.json");
    std::fs::write(&path, r#"{"epsilon": 5.0, "bump": {"type": "rational", "coeffs": [0, -1], "power": 2}}"#).unwrap();
    let o = kstab(&["bergman", "--input", path.to_str().unwrap(), "--k", "8"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_selected_criteria() {
    let o = kstab(&["verify", "--only", "1,4,7", "--format", "csv"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
    assert_eq!(kstab(&["verify", "--only", "99"]).status.code(), Some(3));
}
