use std::process::{Command, Output};

use serde_json::Value;

fn mqnmr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqnmr"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn pair_sweep_csv() {
    let o = mqnmr(&["pair-sweep", "--grid", "x:0:3:4", "--beta", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "beta,tau,d_tau,t_mq,x,J0_closed,Jp2_closed,Jm2_closed,J0_pipeline,Jp2_pipeline,Jm2_pipeline,discrepancy"
    );
    assert_eq!(lines.len(), 5);
    assert!(!text.contains('\r'));
    assert!(text.lines().all(|l| l == l.trim_end()));
    let first: Vec<f64> = lines[1]
        .split(',')
        .map(|f| if f == "inf" { f64::INFINITY } else { f.parse().unwrap() })
        .collect();
    assert!((first[6] + first[7] - 0.99505).abs() < 1e-5);
}

#[test]
fn json_echoes_config() {
    let o = mqnmr(&["entanglement", "--format", "json", "--omega0", "3.1415926535897932e9", "--t-mq", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["mode"], "entanglement");
    assert_eq!(v["config"]["t_mq"], "inf");
    let row = &v["rows"][0];
    assert!((row["T_E"].as_f64().unwrap() - 0.0272).abs() < 1e-4);
    assert!(row["discrepancy"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("chain.csv");
    std::fs::write(&cfg, "n_spins = 3\ngrid = [\"dtau:0:3:4\"]\nbeta = 9.0\n").unwrap();
    let o = mqnmr(&["chain-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("tau,d_tau,t_mq,x,J0,Jpm2,sum_rule_residual,J0_pipeline,Jpm2_pipeline,discrepancy\n"));
    assert_eq!(text.lines().count(), 5);
    // τ = 0 row
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(4), Some("1.0000000000000000e0"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["pair-sweep", "--grid", "x:3:0:4"][..],
        &["pair-sweep", "--grid", "x:0:3"],
        &["pair-sweep", "--t-mq", "-1"],
        &["pair-sweep", "--beta", "0"],
        &["chain-sweep"],
        &["chain-sweep", "--n-spins", "1"],
        &["figure1", "--config", "/nonexistent/file.toml"],
        &["figure1", "--format", "xml"],
        &["unknown"],
    ] {
        let o = mqnmr(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(mqnmr(&["--help"]).status.code(), Some(0));
    assert_eq!(mqnmr(&["figure1", "--help"]).status.code(), Some(0));
}

#[test]
fn figure1_is_deterministic() {
    let a = mqnmr(&["figure1", "--grid", "x:0:2:57"]);
    let b = mqnmr(&["figure1", "--grid", "x:0:2:57"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 58);
}
