use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dp2(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dp2")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("summary on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn emden_examples() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&dp2(dir.path(), &["emden", "--xi", "-1", "--kappa", "0.5", "--a0", "1", "--a1", "0"]));
    assert_eq!(v["fate"], "TouchdownAt");
    assert!((v["S"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-4);
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    assert!(csv.starts_with("s,a,a_dot\n"));

    let v = json(&dp2(dir.path(), &["emden", "--xi", "0", "--a0", "1", "--a1", "1", "--s-max", "2"]));
    assert_eq!(v["fate"], "GlobalOnHorizon");
    assert!((v["end"]["a"].as_f64().unwrap() - 3.0).abs() < 1e-12);

    let bad = dp2(dir.path(), &["emden", "--a0", "-1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("`a0`"));
}

#[test]
fn selfsim_branches() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&dp2(dir.path(), &["--out", "b2", "selfsim", "--xi", "1", "--k3", "1"]));
    assert_eq!(v["origin_limit"], "DecaysToZero");
    let mass = fs::read_to_string(dir.path().join("b2/mass.csv")).unwrap();
    let rho0: Vec<f64> = mass.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(rho0.windows(2).all(|w| w[1] < w[0]));
    let snap = fs::read_to_string(dir.path().join("b2/snapshot_002.csv")).unwrap();
    assert!(snap.starts_with("x,rho,u\n"));

    let halted = dp2(dir.path(), &["--out", "b3", "selfsim", "--xi", "-1", "--k3", "-1", "--times", "0,0.5,0.7"]);
    assert_eq!(halted.status.code(), Some(2));
    assert!(stderr(&halted).contains("T = 0.666666"));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b3/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["halted_at"], 0.7);
    assert_eq!(summary["snapshots"].as_array().unwrap().len(), 2);

    let wrong = dp2(dir.path(), &["selfsim", "--xi", "-1", "--k3", "1"]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn verify_exit_status_follows_the_orders() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&dp2(dir.path(), &["verify"]));
    assert_eq!(v["pass"], true);
    let edge = dp2(dir.path(), &["verify", "--band", "0"]);
    assert_eq!(edge.status.code(), Some(1));
    let collapse = dp2(dir.path(), &["verify", "--xi", "-1", "--k3", "-1", "--t", "0.3"]);
    assert!(collapse.status.success(), "{}", stderr(&collapse));
}

#[test]
fn riccati_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&dp2(dir.path(), &["riccati", "--M", "0", "--v0", "-2"]));
    assert_eq!(v["T_bound"], 0.5);
    let v = json(&dp2(dir.path(), &["riccati", "--M", "2", "--v0", "-1"]));
    assert_eq!(v["T_bound"], Value::Null);

    let v = json(&dp2(dir.path(), &["solve", "--n", "256", "--threshold", "100"]));
    assert_eq!(v["outcome"], "Crossed");
    assert!(v["crossing_time"].as_f64().unwrap() < 0.24);
    let bad = dp2(dir.path(), &["solve", "--n", "100"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("`n`"));
    let blown = dp2(dir.path(), &["solve", "--n", "64", "--cfl", "50", "--threshold", "1e300", "--t-max", "2"]);
    assert_eq!(blown.status.code(), Some(3), "{}", stderr(&blown));
}

#[test]
fn sweep_enumerates_the_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let out = dp2(dir.path(), &["--format", "csv", "sweep", "--grid", "xi=-2:-0.5:4", "kappa=0.25:1:4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.contains(",TouchdownAt,")));
    let bad = dp2(dir.path(), &["sweep", "--grid", "zeta=0:1:2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# attractive\nxi = -0.5\nkappa = 1\na1 = 0.3\n").unwrap();
    let v = json(&dp2(dir.path(), &["--config", "run.cfg", "emden", "--a1", "-0.2"]));
    assert_eq!(v["config"]["xi"], -0.5);
    assert_eq!(v["config"]["kappa"], 1.0);
    assert_eq!(v["config"]["a1"], -0.2);

    fs::write(dir.path().join("bad.cfg"), "kappa = 1\nbeta = 2\n").unwrap();
    let bad = dp2(dir.path(), &["--config", "bad.cfg", "emden"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("beta"));
}

/// Every summary, passed back through `--config`, reproduces the outputs.
#[test]
fn summaries_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str], &str); 5] = [
        ("emden", &["--xi", "0.7", "--kappa", "0.3", "--a1", "-0.4"], "summary.json"),
        ("selfsim", &["--k1", "2", "--k2", "0.5", "--times", "0,0.25"], "summary.json"),
        ("riccati", &["--M", "0.5", "--v0", "-3"], "summary.json"),
        ("solve", &["--n", "128", "--noise", "0.2", "--threshold", "50"], "summary.json"),
        ("sweep", &["--grid", "xi=-1:1", "a1=-0.5:0.5", "--samples", "6"], "summary.json"),
    ];
    for (cmd, args, summary) in runs {
        let first = format!("{cmd}_a");
        let mut argv = vec!["--out", &first, "--seed", "5", cmd];
        argv.extend_from_slice(args);
        assert!(dp2(dir.path(), &argv).status.success(), "{cmd}");
        let cfg = format!("{first}/{summary}");
        let second = format!("{cmd}_b");
        assert!(dp2(dir.path(), &["--out", &second, "--config", &cfg, cmd]).status.success(), "{cmd} replay");
        for entry in fs::read_dir(dir.path().join(&first)).unwrap() {
            let name = entry.unwrap().file_name();
            let a = fs::read(dir.path().join(&first).join(&name)).unwrap();
            let b = fs::read(dir.path().join(&second).join(&name)).unwrap();
            assert!(a == b, "{cmd}: {name:?} differs after replay");
        }
    }
}
