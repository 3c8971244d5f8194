use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn torsion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torsion")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    p.to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

fn scratch(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("torsion-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn nowc_scenario_meets_its_expectations() {
    let o = torsion(&["run", &scenario("nowc.json"), "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&o);
    assert_eq!(r["decision"]["value"], "In");
    assert_eq!(r["verification"]["status"], "CONSISTENT");
    assert!(r["assertions"].as_array().unwrap().iter().all(|a| a["pass"] == true));
    assert_eq!(r["exit_code"], 0);
}

#[test]
fn opaque_digits_are_undecided() {
    let o = torsion(&["run", &scenario("opaque_prefix.json")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("decision: Unknown"));
}

#[test]
fn malformed_scenario_is_an_input_error() {
    let o = torsion(&["run", &scenario("malformed.json")]);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("surplus") && err.contains("line"), "{err}");
}

#[test]
fn missing_file_and_bad_usage_are_input_errors() {
    assert_eq!(code(&torsion(&["run", "/nonexistent/scenario.json"])), 4);
    assert_eq!(code(&torsion(&["frobnicate"])), 4);
    assert_eq!(code(&torsion(&["--help"])), 0);
}

#[test]
fn wrong_expectation_exits_one() {
    let body = std::fs::read_to_string(scenario("prufer.json")).unwrap().replace("\"NotIn\"", "\"In\"");
    let path = scratch("wrong.json", &body);
    let o = torsion(&["run", &path]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAILED]"));
}

#[test]
fn unsupported_schema_version_is_rejected() {
    let body = std::fs::read_to_string(scenario("prufer.json")).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
    let path = scratch("version.json", &body);
    assert_eq!(code(&torsion(&["run", &path])), 4);
}

#[test]
fn reports_are_deterministic_apart_from_the_timestamp() {
    let strip = |o: &Output| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("generated_at");
        v
    };
    let a = torsion(&["run", &scenario("prufer.json"), "--json"]);
    let b = torsion(&["run", &scenario("prufer.json"), "--json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn report_file_matches_stdout() {
    let path = scratch("report.json", "");
    let o = torsion(&["run", &scenario("prufer.json"), "--json", "--report", &path]);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["schema_version"], 1);
    assert_eq!(written["decision"], json(&o)["decision"]);
}

#[test]
fn reproduce_ce() {
    let o = torsion(&["reproduce", "ce", "--N", "1000"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("decision: In (Theorem Last:corollary)"));
}

#[test]
fn reproduce_wave_counterexample_finds_a_non_nested_witness() {
    let o = torsion(&["reproduce", "counterexample-wave", "--N", "1000", "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&o);
    assert_eq!(r["nestedness"]["verdict"]["value"], "Fails");
    assert!(!r["nestedness"]["witness"].is_null());
}

#[test]
fn reproduce_exa2osserv() {
    let o = torsion(&["reproduce", "Exa2osserv", "--N", "1000"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("decision: In (Theorem Nuovo:Th)"));
}

#[test]
fn unknown_example_is_rejected() {
    let o = torsion(&["reproduce", "no-such-example"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("known:"));
}

#[test]
fn digits_of_one_half_in_base_three() {
    let o = torsion(&["digits", "1/2", "3", "6"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("1 1 1 1 1 1"));
    assert!(out.contains("periodic"));
}

#[test]
fn norms_prints_a_trail() {
    let o = torsion(&["norms", &scenario("prufer.json"), "--eps", "1/4", "--N", "100"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("epsilon\tn\tcount"));
    assert!(out.contains("# ε = 1/4: 101 members"), "{out}");
}

#[test]
fn probe_nested_on_the_wave_pair() {
    let o = torsion(&["probe-nested", "wave:3/5", "wave"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("witness"));
}
