mod common;

use std::process::{Command, Output};

use common::configs_dir;
use serde_json::Value;

fn run(args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_frobjet"));
    cmd.args(args).args(["--format", "machine"]);
    if let Some(c) = config {
        cmd.arg("--config").arg(configs_dir().join(c));
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn shipped_configs_validate() {
    for cfg in ["kdv.json", "kdv-deformed.json", "p1.json", "a2.json"] {
        let out = run(&["validate"], Some(cfg));
        assert_eq!(code(&out), 0, "{cfg}");
        assert_eq!(json(&out)["status"], "pass");
    }
}

#[test]
fn corrupted_potential_names_witness() {
    let out = run(&["validate"], Some("corrupted-n3.json"));
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["status"], "fail");
    assert_eq!(
        v["report"]["wdvv"]["witness"],
        serde_json::json!([2, 2, 3, 3])
    );
    assert_eq!(v["report"]["wdvv"]["residual"], "-36*v2^2");
}

#[test]
fn pencil_reports_central_invariant() {
    let out = run(&["pencil"], Some("kdv-deformed.json"));
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["report"]["central_invariants"][0], "1/24");
    let out = run(&["pencil"], Some("kdv-incompatible.json"));
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["report"]["compatibility"]["ok"], false);
}

#[test]
fn virasoro_exit_codes() {
    assert_eq!(code(&run(&["virasoro"], Some("kdv.json"))), 0);
    let out = run(&["virasoro"], Some("kdv-perturbed-virasoro.json"));
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["status"], "fail");
    let out = run(&["virasoro"], Some("p1.json"));
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["status"], "error");
}

#[test]
fn hierarchy_truncation_flag() {
    let out = run(&["hierarchy", "--pmax", "0"], Some("kdv.json"));
    assert_eq!(code(&out), 0);
    let full = run(&["hierarchy"], Some("kdv.json"));
    assert!(out.stdout.len() < full.stdout.len());
}

#[test]
fn integrate_exit_codes() {
    let ok = run(&["integrate", "--expr", "v1*v1_1"], Some("kdv.json"));
    assert_eq!(code(&ok), 0);
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text.contains("v1^2"), "{text}");
    assert_eq!(
        code(&run(
            &["integrate", "--expr", "v1*v1_2^2"],
            Some("kdv.json")
        )),
        1
    );
    assert_eq!(
        code(&run(&["integrate", "--expr", "v1 +* 2"], Some("kdv.json"))),
        2
    );
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(code(&run(&["validate"], Some("missing.json"))), 2);
    let dir = std::env::temp_dir().join(format!("frobjet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"name":"x","n":1,"potential":"v1^3/6","euler":["v1"],"charge":"0","mu":["0"],"extra":1}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_frobjet"))
        .args(["validate", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(code(&out), 2);
}

#[test]
fn poles_report_top_coefficient() {
    let out = run(&["poles", "--expr", "log(u1_1)/24"], Some("kdv.json"));
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("-1/16"), "{text}");
}
