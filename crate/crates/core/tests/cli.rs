use std::process::{Command, Output};

use serde_json::Value;

fn tcs(args: &[&str]) -> Output {
    tcs_env(args, None)
}

fn tcs_env(args: &[&str], digits: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tcs"));
    cmd.args(args).env_remove("TCS_DIGITS");
    if let Some(d) = digits {
        cmd.env("TCS_DIGITS", d);
    }
    cmd.output().expect("tcs runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = tcs(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn plain_outputs() {
    assert_eq!(ok(&["min-base", "4"]), "15\n");
    assert_eq!(ok(&["min-base", "19"]), "1572865\n");
    assert_eq!(ok(&["min-base", "3", "--class", "7"]), "57\n");
    assert_eq!(ok(&["root", "9", "--digits", "3"]), "807\n");
    assert_eq!(ok(&["root", "6", "--digits", "6"]), "890625\n");
    assert_eq!(ok(&["q", "6"]), "2218751\n");
    assert_eq!(ok(&["speed", "807"]), "3\n");
    assert_eq!(ok(&["speed", "807", "--height", "2"]), "4\n");
    assert_eq!(ok(&["class", "5", "2", "--count", "3"]), "5\n35\n45\n");
}

#[test]
fn oeis_terms_start_at_zero() {
    let out = ok(&["oeis", "--min-bases", "--terms", "5"]);
    assert_eq!(out, "0 1\n1 2\n2 5\n3 25\n4 15\n");
}

#[test]
fn json_round_trips_byte_for_byte() {
    for args in [
        &["--json", "speed", "807"][..],
        &["--output", "json", "profile", "807", "--max-height", "5"],
        &["--json", "q", "7"],
        &["--json", "table1", "--max", "6"],
        &["--json", "table2", "--max", "8"],
        &["--json", "class", "2", "3", "--count", "4"],
    ] {
        let raw = ok(args);
        let v: Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap() + "\n", raw, "{args:?}");
    }
    let v: Value = serde_json::from_str(&ok(&["--json", "q", "6"])).unwrap();
    assert_eq!(v["q"], "2218751");
    assert_eq!(v["method"], "deterministic-small");
}

#[test]
fn csv_output() {
    let out = ok(&["--output", "csv", "speed", "807", "--height", "3"]);
    assert_eq!(out, "b,V\n1,0\n2,4\n3,4\n");
}

#[test]
fn precision_and_budget_failures_exit_one() {
    let o = tcs(&["speed", "98305", "--height", "8", "--digits", "16"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(tcs(&["q", "6", "--budget", "2"]).status.code(), Some(1));
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(tcs(&["speed", "100"]).status.code(), Some(2));
    assert_eq!(tcs(&["speed", "12x"]).status.code(), Some(2));
    assert_eq!(tcs(&["root", "14", "--digits", "3"]).status.code(), Some(2));
    assert_eq!(tcs(&["nonsense"]).status.code(), Some(2));
    assert_eq!(tcs(&["speed", "7", "--digits", "1"]).status.code(), Some(2));
    assert_eq!(tcs_env(&["speed", "7"], Some("zero")).status.code(), Some(2));
}

#[test]
fn fixture_mismatch_maps_to_three() {
    let e = congruence_speed::Error::FixtureMismatch { name: "x".into(), expected: "1".into(), actual: "2".into() };
    assert_eq!(congruence_speed::cli::exit_code(&e), 3);
}

#[test]
fn verify_fixtures_pass() {
    let out = ok(&["verify", "--fixtures"]);
    assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
    let out = ok(&["verify", "--sweep", "500"]);
    assert!(out.contains("0 mismatches"), "{out}");
}

#[test]
fn digits_override_from_environment() {
    let run = |d| {
        let o = tcs_env(&["--json", "profile", "807", "--max-height", "3"], d);
        assert!(o.status.success());
        serde_json::from_str::<Value>(&stdout(&o)).unwrap()["digits"].clone()
    };
    assert_eq!(run(Some("24")), 24);
    assert_ne!(run(None), 24);
}

#[test]
fn cache_file_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.jsonl");
    let p = path.to_str().unwrap();
    assert_eq!(ok(&["q", "8", "--cache", p]), "74218751\n");
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(first.lines().count(), 1);
    assert_eq!(ok(&["q", "8", "--cache", p]), "74218751\n");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    let line: Value = serde_json::from_str(first.trim()).unwrap();
    assert_eq!(line["n"], 8);
}
