//! End-to-end checks of the command-line surface: subcommand output shapes,
//! schema conformance, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fhn-atlas"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

// -- minimal JSON-schema validator (the subset the shipped schema uses) ------

fn resolve<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let path = reference.trim_start_matches("#/");
    let mut node = root;
    for part in path.split('/') {
        node = &node[part];
    }
    node
}

fn validates(root: &Value, schema: &Value, value: &Value) -> Result<(), String> {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        return validates(root, resolve(root, reference), value);
    }
    if let Some(one_of) = schema.get("oneOf").and_then(Value::as_array) {
        let hits = one_of
            .iter()
            .filter(|s| validates(root, s, value).is_ok())
            .count();
        return if hits == 1 {
            Ok(())
        } else {
            Err(format!("oneOf matched {hits} branches"))
        };
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{value} not in enum {allowed:?}"));
        }
        return Ok(());
    }
    if let Some(ty) = schema.get("type") {
        let names: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = names.iter().any(|name| match *name {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{value} is not of type {names:?}"));
        }
    }
    if let Some(obj) = value.as_object() {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(format!("missing required key {key}"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(props) = props {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validates(root, sub, v).map_err(|e| format!("{key}: {e}"))?;
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                for key in obj.keys() {
                    if !props.contains_key(key) {
                        return Err(format!("unexpected key {key}"));
                    }
                }
            }
        }
    }
    if let Some(arr) = value.as_array() {
        if let Some(items) = schema.get("items") {
            for (i, item) in arr.iter().enumerate() {
                validates(root, items, item).map_err(|e| format!("[{i}]: {e}"))?;
            }
        }
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < min {
                return Err(format!("fewer than {min} items"));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
            if (arr.len() as u64) > max {
                return Err(format!("more than {max} items"));
            }
        }
    }
    Ok(())
}

fn assert_schema(json_text: &str) {
    let schema_text = include_str!("../schema/output.schema.json");
    let schema: Value = serde_json::from_str(schema_text).unwrap();
    let value: Value = serde_json::from_str(json_text).unwrap();
    if let Err(e) = validates(&schema, &schema, &value) {
        panic!("schema violation: {e}\nin: {json_text}");
    }
}

// -- subcommands --------------------------------------------------------------

#[test]
fn classify_reports_saddle_for_b_above_one() {
    let out = run(&["classify", "--a", "0", "--b", "4", "--c", "1"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_schema(&text);
    let v: Value = serde_json::from_str(&text).unwrap();
    let eqs = v["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 3);
    let e1 = eqs
        .iter()
        .find(|e| e["label"] == "E1")
        .expect("origin labelled E1");
    assert_eq!(e1["classification"], "saddle");
}

#[test]
fn canard_value_matches_formula() {
    let out = run(&["canard", "--case", "A", "--eps", "0.01"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_schema(&text);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!((v["b_c"].as_f64().unwrap() - 1.5125).abs() < 1e-12);

    let out = run(&["canard", "--case", "B", "--eps", "0.04"]);
    let v: Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!((v["a_c"].as_f64().unwrap() + 0.005).abs() < 1e-12);
}

#[test]
fn infinity_reports_equator_data() {
    let out = run(&["infinity", "--a", "0", "--b", "1", "--c", "1"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_schema(&text);
    let v: Value = serde_json::from_str(&text).unwrap();
    let inf = v["infinite_equilibria"].as_array().unwrap();
    let u1 = inf.iter().find(|e| e["chart"] == "U1").unwrap();
    assert!((u1["eigenvalues"][0][0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((u1["eigenvalues"][1][0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["chain"]["e6_classification"], "saddle");
}

#[test]
fn verify_chain_passes_and_validates() {
    let out = run(&[
        "verify-chain",
        "--a",
        "0.3",
        "--b",
        "1.1",
        "--c",
        "2",
        "--samples",
        "25",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_schema(&text);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["steps"].as_array().unwrap().len(), 10);
}

#[test]
fn curves_csv_has_fixed_header() {
    let out = run(&[
        "curves", "--case", "A", "--c-min", "1.5", "--c-max", "3", "--steps", "4",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "curve_id,c,value,valid");
    assert!(text.lines().any(|l| l.starts_with("DH,")));
    assert!(text.lines().any(|l| l.starts_with("SNL_plus,")));
}

#[test]
fn region_sweep_has_fixed_header() {
    let out = run(&[
        "region-sweep",
        "--case",
        "A",
        "--b-range",
        "2:4",
        "--c-range",
        "0.5:1",
        "--grid",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "b,c,equilibrium_count,classes,limit_cycle_count,kappa_symmetric"
    );
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn c_zero_rejected_at_parse_time() {
    let out = run(&["classify", "--a", "0", "--b", "1", "--c", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("domain"), "stderr: {err}");
}

#[test]
fn computational_failure_emits_error_json() {
    // canards outside the asymptotic window fail with a machine-readable error
    let out = run(&["canard", "--case", "A", "--eps", "0.9"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_schema(&err);
    let v: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(v["kind"], "domain-error");
}

#[test]
fn portrait_writes_svg_and_csv() {
    let dir = std::env::temp_dir().join("fhn-atlas-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("portrait.svg");
    let csv = dir.join("portrait.csv");
    let out = run(&[
        "portrait",
        "--a",
        "0",
        "--b",
        "4",
        "--c",
        "0.5",
        "--out",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--rings",
        "4:2.0",
        "--horizon",
        "10",
    ]);
    assert!(out.status.success());
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert_eq!(svg_text.matches("class=\"equilibrium").count(), 3);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().next().unwrap(), "traj_id,t,x,y,X,Y");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["classify", "--a", "0", "--b", "0.5", "--c", "2", "--probe-cycles"],
        vec!["curves", "--case", "A", "--c-min", "1.2", "--c-max", "4", "--steps", "7"],
        vec!["curves", "--case", "B", "--c-min", "-2", "--c-max", "2", "--steps", "5"],
        vec![
            "curves", "--case", "C", "--c-min", "0.1", "--c-max", "1", "--steps", "5", "--b",
            "0.5",
        ],
        vec![
            "region-sweep", "--case", "A", "--b-range", "2:4", "--c-range", "0.5:1", "--grid",
            "3",
        ],
        vec!["canard", "--case", "B", "--eps", "0.04"],
        vec!["infinity", "--a", "0.2", "--b", "1.3", "--c", "1.5"],
        vec!["verify-chain", "--a", "0.1", "--b", "0.9", "--c", "1.2", "--samples", "15"],
    ];
    for args in &cases {
        let first = run(args);
        let second = run(args);
        assert!(first.status.success(), "{args:?} failed");
        assert_eq!(first.stdout, second.stdout, "nondeterministic: {args:?}");
    }
    // portrait files byte-identical across runs
    let dir = std::env::temp_dir().join("fhn-atlas-cli-det");
    std::fs::create_dir_all(&dir).unwrap();
    let render = |name: &str| -> Vec<u8> {
        let svg = dir.join(name);
        let out = run(&[
            "portrait", "--a", "0", "--b", "0.5", "--c", "2", "--out",
            svg.to_str().unwrap(), "--rings", "4:2.5", "--horizon", "8",
        ]);
        assert!(out.status.success());
        std::fs::read(&svg).unwrap()
    };
    assert_eq!(render("a.svg"), render("b.svg"));
}

#[test]
fn schema_file_ships_with_the_repo() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json");
    assert!(path.exists());
}
