use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn su2cs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su2cs"))
        .current_dir(dir)
        .env_remove("SOURCE_DATE_EPOCH")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn report(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(command).with_extension("json")).unwrap()).unwrap()
}

#[test]
fn wigner_half_spin_quarter_turn() {
    let dir = TempDir::new().unwrap();
    let out = su2cs(dir.path(), &["wigner", "--two-s", "1", "--theta", "1.5707963", "--out", "."]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "wigner");
    let d = &r["outputs"]["d_matrix"];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let want = [[h, -h], [h, h]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((d[i][j].as_f64().unwrap() - want[i][j]).abs() < 1e-7);
        }
    }
    assert_eq!(r["passed"], Value::Bool(true));
    let csv = fs::read_to_string(dir.path().join("wigner.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("m,m_prime,d,r_re,r_im"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn verify_resolution_spin_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "c.json", r#"{"two_s": 4, "n_random": 20}"#);
    let out = su2cs(dir.path(), &["verify-resolution", "--config", "c.json", "--out", "r"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir.path().join("r"), "verify-resolution");
    assert!(r["outputs"]["max_residual"].as_f64().unwrap() <= 1e-10);
    let csv = fs::read_to_string(dir.path().join("r/verify_resolution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn invalid_configs_exit_two() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    write(p, "empty.json", "");
    write(p, "list.json", "[1, 2]");
    write(p, "unknown.json", r#"{"two_s": 2, "n_random": 3, "bogus": 1}"#);
    write(p, "hbar.json", r#"{"two_s": 2, "hbar": -1}"#);
    write(p, "fv.json", r#"{"two_s": 2, "fv": {"two_m": 1}, "omega1": [0,0,0], "omega2": [0,0,0]}"#);
    let cases: [&[&str]; 6] = [
        &["verify-resolution", "--config", "empty.json"],
        &["verify-resolution", "--config", "list.json"],
        &["verify-resolution", "--config", "unknown.json"],
        &["verify-resolution", "--config", "hbar.json"],
        &["overlap", "--config", "fv.json"],
        &["propagate"],
    ];
    for args in cases {
        let out = su2cs(p, args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"), "{args:?}");
    }
    let out = su2cs(p, &["verify-resolution", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!p.join("verify-resolution.json").exists());
}

const PROPAGATE: &str = r#"{
    "two_s": 1, "fv": "lowest",
    "hamiltonian": [{"p": 0, "q": 1, "r": 0, "coeff": [1, 0]}],
    "omega_i": [0, 0, 0], "omega_f": [0.3, 0.4, 0],
    "t_f": 0.5, "n_slices": [4, 8], "mode": "M1"
}"#;

#[test]
fn propagate_writes_series_and_fails_tight_tolerance() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    write(p, "c.json", PROPAGATE);
    let ok = su2cs(p, &["propagate", "--config", "c.json", "--out", "a"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let csv = fs::read_to_string(p.join("a/propagate_M1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n_slices,re,im,abs_err_vs_oracle"));
    assert_eq!(lines.count(), 2);

    let bad = su2cs(p, &["propagate", "--config", "c.json", "--out", "b", "--tol", "1e-9"]);
    assert_eq!(bad.status.code(), Some(3));
    let r = report(&p.join("b"), "propagate");
    assert_eq!(r["passed"], Value::Bool(false));
    assert_eq!(r["tolerances"]["error_at_largest_n"].as_f64(), Some(1e-9));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    write(p, "p.json", PROPAGATE);
    write(p, "c.json", r#"{"two_s": [20, 40, 80], "n_max": 20}"#);
    for (cmd, cfg) in [("propagate", "p.json"), ("contract", "c.json")] {
        for threads in ["1", "4"] {
            let out = su2cs(p, &[cmd, "--config", cfg, "--threads", threads, "--out", threads]);
            assert_ne!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
        }
        for entry in fs::read_dir(p.join("1")).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(fs::read(p.join("1").join(&name)).unwrap(), fs::read(p.join("4").join(&name)).unwrap());
        }
    }
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    write(p, "c.json", r#"{"two_s": 2, "fv": "random", "omega1": [0.1, 0.2, 0.3], "omega2": [1, 2, 3], "seed": 5}"#);
    su2cs(p, &["overlap", "--config", "c.json", "--out", "a"]);
    su2cs(p, &["overlap", "--config", "c.json", "--out", "b", "--seed", "6"]);
    let (a, b) = (report(&p.join("a"), "overlap"), report(&p.join("b"), "overlap"));
    assert_eq!(a["seed"], 5);
    assert_eq!(b["seed"], 6);
    assert_ne!(a["inputs_hash"], b["inputs_hash"]);
    assert_ne!(a["outputs"]["overlap"], b["outputs"]["overlap"]);
}

#[test]
fn semiclassical_and_contract_headers() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    write(
        p,
        "s.json",
        r#"{"two_s": 2, "fv": "lowest", "hamiltonian": [{"p": 0, "q": 1, "r": 0, "coeff": [1.3, 0]}],
            "omega0": [0.3, 1.1, 0.5], "t1": 1.0, "dt": 0.05}"#,
    );
    write(p, "c.json", r#"{"two_s": [20, 40], "n_max": 20}"#);
    let s = su2cs(p, &["semiclassical", "--config", "s.json"]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let csv = fs::read_to_string(p.join("semiclassical.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,phi,theta,psi,H,rank,residual"));
    assert_eq!(csv.lines().count(), 22);
    su2cs(p, &["contract", "--config", "c.json"]);
    let csv = fs::read_to_string(p.join("contract.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("s,max_abs_dev,measure_dev,kinetic_dev"));
    assert!(csv.lines().nth(1).unwrap().starts_with("10,"));
}

#[test]
fn numerical_failure_is_reported_with_exit_three() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    // |α|/√(2s) = 3/√2 is outside the contraction chart.
    write(p, "c.json", r#"{"two_s": 2, "alpha": [3, 0], "n_max": 10}"#);
    let out = su2cs(p, &["contract", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(p, "contract");
    assert!(r["error"].is_string());
}

#[test]
fn acceptance_single_criterion() {
    let dir = TempDir::new().unwrap();
    let out = su2cs(dir.path(), &["acceptance", "--criterion", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "acceptance");
    assert_eq!(r["outputs"]["criteria"][0]["id"], 7);
    let bad = su2cs(dir.path(), &["acceptance", "--criterion", "13"]);
    assert_eq!(bad.status.code(), Some(2));
}
