use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quadctrl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn spec(name: &str) -> String {
    specs_dir().join(name).to_string_lossy().into_owned()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(validator: &jsonschema::Validator, report: &Value, what: &str) {
    let errors: Vec<String> = validator.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

fn bundled_specs() -> Vec<String> {
    let mut out: Vec<String> = std::fs::read_dir(specs_dir())
        .unwrap()
        .map(|e| e.unwrap().path().to_string_lossy().into_owned())
        .filter(|p| p.ends_with(".json"))
        .collect();
    out.sort();
    out
}

fn example_names() -> Vec<String> {
    let out = run(&["examples"]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap().lines().filter_map(|l| l.split_whitespace().next().map(str::to_owned)).collect()
}

#[test]
fn sprott_shorthand_is_stlc() {
    let out = run(&["analyze", "--model", "sprott", "--mu", "1", "--control", "1,0,0", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["stlc"]["tag"], "Stlc");
    assert_eq!(r["stlc"]["rule"], "linearization");
}

#[test]
fn r5_with_oracle() {
    let out = run(&["analyze", &spec("r5.json"), "--oracle", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["accessibility"]["tag"], "NotAccessible");
    assert_eq!(r["accessibility"]["degree_of_reachability"], 2);
    assert_eq!(r["oracle"]["agrees"], true);
    assert_eq!(r["oracle"]["dim"], 2);
}

#[test]
fn counterexample_has_monotone_certificate() {
    let out = run(&["analyze", &spec("counterexample.json"), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["stlc"]["tag"], "NotStlc");
    assert_eq!(r["stlc"]["certificate"]["kind"], "monotone");
    assert_eq!(r["stlc"]["certificate"]["w"], serde_json::json!(["0/1", "0/1", "1/1"]));
}

#[test]
fn inconclusive_exits_with_two() {
    let out = run(&["analyze", "--model", "lorenz", "--sigma", "10", "--rho", "28", "--beta", "8/3", "--control", "1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("stlc: inconclusive"));
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{\n  \"n\": 3,\n  \"k\": 2,\n  \"L\": [[0,0,0],\n"),
        ("dependent.json", r#"{"n":3,"k":1,"L":[[0,0,0],[0,0,0],[0,0,0]],"a":[0,0,0],"b":[0,0,0],"c":[0,0,0],"controls":[[1,0,0],[2,0,0]]}"#),
        ("rank.json", r#"{"n":3,"k":3,"L":[[0,0,0],[0,0,0],[0,0,0]],"a":[0,0,0],"b":[0,0,0],"c":[0,0,0],"controls":[]}"#),
        ("shape.json", r#"{"n":3,"k":2,"L":[[0,0,0],[0,0,0]],"a":[0,0,0],"b":[0,0,0],"c":[0,0,0],"controls":[[1,0,0]]}"#),
        ("field.json", r#"{"n":3,"k":2,"L":[[0,0,0],[0,0,0],[0,0,0]],"a":[0,"1/0",0],"b":[0,0,0],"c":[0,0,0],"controls":[[1,0,0]]}"#),
        ("mixed.json", r#"{"n":3,"k":2,"L":[[0,0,0],[0,0,0],[0,0,0]],"a":[0,0.5,0],"b":[0,0,0],"c":[0,0,0],"controls":[[1,0,0]],"mode":"rational"}"#),
    ];
    for (name, body) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        let out = run(&["analyze", path.to_str().unwrap(), "--json"]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        assert!(out.stdout.is_empty(), "{name}: no verdict on invalid input");
        let err = String::from_utf8_lossy(&out.stderr);
        match name {
            "syntax.json" => assert!(err.contains("line"), "{err}"),
            "field.json" => assert!(err.contains("zero denominator") && err.contains("line 1"), "{err}"),
            "mixed.json" => assert!(err.contains("a[1]"), "{err}"),
            "shape.json" => assert!(err.contains("`L`"), "{err}"),
            _ => {}
        }
    }
    assert_eq!(run(&["analyze", "/nonexistent/spec.json"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--model", "lorenz", "--sigma", "-1", "--rho", "1", "--beta", "1", "--control", "1,0,0"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--model", "rigid-body", "--xi", "1,0,3", "--control", "1,0,0"]).status.code(), Some(1));
}

#[test]
fn every_bundled_report_matches_schema() {
    let validator = schema();
    for path in bundled_specs() {
        let out = run(&["analyze", &path, "--json", "--oracle", "--forest"]);
        assert!(matches!(out.status.code(), Some(0 | 2)), "{path}");
        assert_valid(&validator, &json_of(&out), &path);
    }
    for name in example_names() {
        let out = run(&["analyze", &name, "--json"]);
        assert_valid(&validator, &json_of(&out), &name);
    }
    let out = run(&["analyze", &spec("sprott.json"), "--json", "--simulate", "--samples", "100", "--mode", "float"]);
    assert_valid(&validator, &json_of(&out), "simulated float run");
    let out = run(&["analyze", "--model", "lorenz", "--sigma", "10", "--rho", "28", "--beta", "8/3", "--control", "2,-3,0", "--json"]);
    assert_valid(&validator, &json_of(&out), "closed form");
    let out = run(&["analyze", "--model", "lorenz", "--sigma", "10", "--rho", "28", "--beta", "8/3", "--control", "1,0,0", "--json"]);
    assert_valid(&validator, &json_of(&out), "inconclusive");
}

#[test]
fn text_and_json_agree() {
    let phrase = |tag: &str| match tag {
        "StronglyAccessible" => "strongly accessible",
        "NotAccessible" => "not accessible",
        "Stlc" => "small-time locally controllable",
        "NotStlc" => "not small-time locally controllable",
        _ => "inconclusive",
    };
    for path in bundled_specs() {
        let json = json_of(&run(&["analyze", &path, "--json"]));
        let text = String::from_utf8(run(&["analyze", &path, "--text"]).stdout).unwrap();
        let line = |prefix: &str| text.lines().find(|l| l.starts_with(prefix)).unwrap().to_owned();
        let acc = line("accessibility: ");
        let stlc = line("stlc: ");
        assert!(acc.starts_with(&format!("accessibility: {}", phrase(json["accessibility"]["tag"].as_str().unwrap()))), "{path}");
        assert!(stlc.starts_with(&format!("stlc: {}", phrase(json["stlc"]["tag"].as_str().unwrap()))), "{path}");
        if let Some(rule) = json["stlc"]["rule"].as_str() {
            assert!(stlc.ends_with(&format!("[{rule}]")), "{path}");
        }
    }
}

#[test]
fn examples_are_listed_and_loadable() {
    let names = example_names();
    assert!(names.len() >= 4);
    let listing = String::from_utf8(run(&["examples"]).stdout).unwrap();
    assert!(listing.lines().all(|l| l.split_whitespace().count() > 3), "each example carries a description");
    for name in names {
        let out = run(&["analyze", &name]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn emitted_spec_reproduces_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for name in example_names() {
        let spec = run(&["emit-spec", &name]);
        assert!(spec.status.success());
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, &spec.stdout).unwrap();
        let a = json_of(&run(&["analyze", &name, "--json"]));
        let b = json_of(&run(&["analyze", path.to_str().unwrap(), "--json"]));
        assert_eq!(a["stlc"], b["stlc"], "{name}");
        assert_eq!(a["system"], b["system"], "{name}");
    }
}

#[test]
fn endpoints_dump_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cloud.csv");
    let out = run(&["analyze", &spec("r5.json"), "--simulate", "--samples", "50", "--dump-endpoints", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4,x5"));
    assert_eq!(lines.count(), 50);
}
