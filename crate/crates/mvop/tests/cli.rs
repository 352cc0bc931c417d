use std::process::{Command, Output};

fn mvop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvop")).args(args).env_remove("MVOP_QUAD_NODES").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn recurrence_to_stdout_is_pure_artifact() {
    let o = mvop(&["recurrence", "--nmax", "31", "--format", "json", "--stdout"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["nmax"], 31);
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed_form_c"));
}

#[test]
fn output_is_deterministic() {
    let args = ["figure", "1", "--stdout"];
    let a = mvop(&args);
    let b = mvop(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("x,exact_re_1_1,exact_im_1_1,asym_re_1_1,asym_im_1_1,exact_re_1_2"));
    assert_eq!(text.lines().count(), 402);
}

#[test]
fn files_land_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = mvop(&["figure", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["figure2.csv", "figure2_zeros.csv", "figure2_report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(o.stdout.is_empty());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"family": "gegenbauer_block", "nu": 3.0}"#).unwrap();
    let o = mvop(&["eval", "b2", "--config", path.to_str().unwrap(), "--nu", "0.5", "--format", "json", "--stdout"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let b12 = v["value"][0][1][0].as_f64().unwrap();
    assert!((b12 - 1.5 * 2f64.sqrt()).abs() < 1e-12, "{b12}");
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"nmax": 31, "recurrence_tol": 1e-30}"#).unwrap();
    let o = mvop(&["recurrence", "--config", path.to_str().unwrap(), "--stdout"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[FAIL]"));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(code(&mvop(&["recurrence", "--family", "hermite", "--stdout"])), 2);
    assert_eq!(code(&mvop(&["recurrence", "--format", "xml"])), 2);
    assert_eq!(code(&mvop(&["recurrence", "--config", "/nonexistent/cfg.json"])), 2);
    assert_eq!(code(&mvop(&["frobnicate"])), 2);
    let o = mvop(&["eval", "inner", "--n", "10", "--stdout"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn numerical_failure_exits_three() {
    let o = mvop(&["eval", "inner", "--n", "10", "--x", "0.9999", "--stdout"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage inner asymptotics"), "{err}");
}

#[test]
fn node_count_from_environment() {
    let run = |nodes: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_mvop"));
        c.args(["eval", "c", "--n", "3", "--stdout"]).env_remove("MVOP_QUAD_NODES");
        if let Some(v) = nodes {
            c.env("MVOP_QUAD_NODES", v);
        }
        c.output().unwrap()
    };
    let low = run(Some("3"));
    assert_eq!(code(&low), 0, "{}", String::from_utf8_lossy(&low.stderr));
    assert_eq!(low.stdout, mvop(&["eval", "c", "--n", "3", "--nodes", "3", "--stdout"]).stdout);
    assert_ne!(low.stdout, run(None).stdout);
    let ok = run(Some("50"));
    assert_eq!(code(&ok), 0);
    assert_ne!(ok.stdout, low.stdout);
    assert_eq!(code(&run(Some("many"))), 2);
}

#[test]
fn eval_csv_layout() {
    let o = mvop(&["eval", "phi", "--z", "2,0", "--stdout"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), format!("re,im\n{},0\n", "3.7320508075688772"));
}
