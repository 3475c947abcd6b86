use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn glsop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glsop")).args(args).env_remove("GLSOP_THREADS").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("glsop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn theta_pi_and_arity_error() {
    let o = glsop(&["theta", "--kernel", r#"{"family":"hilbert","m":2}"#, "--p", "2,2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[2].parse::<f64>().unwrap() - std::f64::consts::PI).abs() < 1e-7);

    let o = glsop(&["theta", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["exit_code"], 2);
    assert!(e["error"]["message"].as_str().unwrap().contains("m ≥ 2 required"));
}

#[test]
fn exit_codes_follow_verdicts() {
    // hardy with p1 = 1: Θ diverges, the check is vacuous
    let o = glsop(&["verify", "--kernel", r#"{"family":"hardy","m":2}"#, "--f", r#"[{"family":"indicator","hi":1},{"family":"indicator","hi":1}]"#, "--p", "1,2"]);
    assert_eq!(o.status.code(), Some(3));

    let o = glsop(&["verify", "--kernel", r#"{"family":"hilbert","m":2}"#, "--f", r#"[{"family":"indicator","hi":1},{"family":"indicator","hi":1}]"#, "--p", "2,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains(",pass"));

    let o = glsop(&["tail", "--psi", r#"{"family":"extremal","r":2}"#, "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "tail_below_e");

    let o = glsop(&["gls-norm", "--f", r#"{"family":"truncated_power","alpha":0.25}"#, "--psi", r#"{"family":"extremal","r":2}"#]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let v: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn config_file_and_flag_override() {
    let cfg = scratch("theta.json");
    std::fs::write(&cfg, r#"{"kernel": {"family": "hardy", "m": 2}, "p": [2, 2], "format": "json"}"#).unwrap();
    let o = glsop(&["theta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((doc["rows"][0]["theta"].as_f64().unwrap() - 4.0).abs() < 1e-9);

    let out = scratch("theta.csv");
    let o = glsop(&["theta", "--config", cfg.to_str().unwrap(), "--p", "3,3", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], ["3.0000000000000000e0", "3.0000000000000000e0"]);
    assert!((row[2].parse::<f64>().unwrap() - 2.25).abs() < 1e-12);

    std::fs::write(&cfg, r#"{"kernel": {"family": "hardy", "m": 2}, "p": [2, 2], "colour": "blue"}"#).unwrap();
    let o = glsop(&["theta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "config");
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["beta", "--kernel", r#"{"family":"hilbert","m":2}"#, "--psi", r#"{"family":"power","m":2}"#, "--p-grid", "0.7:1.3:0.3"];
    let run = |threads: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_glsop"));
        c.args(args);
        match threads {
            Some(t) => c.env("GLSOP_THREADS", t),
            None => c.env_remove("GLSOP_THREADS"),
        };
        c.output().unwrap()
    };
    let a = run(None);
    let b = run(Some("1"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run(Some("zero")).status.code(), Some(2));
}
