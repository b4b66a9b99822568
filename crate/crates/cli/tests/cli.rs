use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use serde_json::{json, Value};

const SQUARE: &str = r#"{"dim":2,"constraints":[{"a":[1,0],"b":1},{"a":[-1,0],"b":1},{"a":[0,1],"b":1},{"a":[0,-1],"b":1}]}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }
}

fn ccx(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ccx"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("spawn ccx");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn file(name: &str, body: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn square_file() -> String {
    file("square.json", SQUARE).display().to_string()
}

fn worked_marginal() -> Value {
    json!({
        "function": {"dim": 2, "max_affine": [{"g": [0, 1], "c": 0}]},
        "map": {"dim_x": 1, "dim_y": 1, "graph": {"dim": 2, "constraints": [
            {"a": [1, -1], "b": 0}, {"a": [-1, -1], "b": 0}]}},
        "x": [0]
    })
}

#[test]
fn core_of_square_is_open_square() {
    let r = ccx(&["core", "--in", &square_file()], "", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["openness"], "open");
    assert_eq!(v["constraints"].as_array().unwrap().len(), 4);
}

#[test]
fn lin_reads_standard_input() {
    let open = SQUARE.replacen("\"dim\":2", "\"dim\":2,\"openness\":\"open\"", 1);
    let r = ccx(&["lin"], &open, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["openness"], "closed");
}

#[test]
fn separate_point_outside_and_inside() {
    let sq = square_file();
    let r = ccx(&["separate", "--set", &sq, "--point", "[2,0]"], "", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["f"], json!([1, 0]));
    assert_eq!(v["level"], json!(1));

    let r = ccx(&["separate", "--set", &sq, "--point", "[0,0]"], "", &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json(), json!({"outcome": "inseparable"}));
}

#[test]
fn separate_two_sets() {
    let req = json!({
        "first": serde_json::from_str::<Value>(SQUARE).unwrap(),
        "second": {"dim": 2, "constraints": [{"a": [-1, 0], "b": -1}]}
    });
    let r = ccx(&["separate"], &req.to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["f"], json!([1, 0]));
}

#[test]
fn gauge_uses_exact_rationals() {
    let r = ccx(
        &["gauge", "--set", &square_file(), "--point", "[\"1/2\",-3]"],
        "",
        &[],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json(), json!({"value": 3}));
    let r = ccx(
        &["gauge", "--set", &square_file(), "--point", "[\"1/3\",0]"],
        "",
        &[],
    );
    assert_eq!(r.json(), json!({"value": "1/3"}));
}

#[test]
fn hahn_banach_both_methods() {
    let req = json!({
        "p": {"pieces": [[1, 1], [1, -1], [-1, 1], [-1, -1]]},
        "basis": [[1, 0]],
        "g": [1]
    });
    let r = ccx(&["hahn-banach"], &req.to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json(), json!({"f": [1, 0]}));

    let mut req = req;
    req["method"] = json!("separation");
    let r = ccx(&["hahn-banach"], &req.to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["f"][0], json!(1));

    req["g"] = json!([3]);
    let r = ccx(&["hahn-banach"], &req.to_string(), &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json()["outcome"], "domination-violated");
}

#[test]
fn normal_cone_at_a_corner_and_outside() {
    let r = ccx(
        &["normal-cone", "--set", &square_file(), "--point", "[1,1]"],
        "",
        &[],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["generators"], json!([[0, 1], [1, 0]]));
    let r = ccx(
        &["normal-cone", "--set", &square_file(), "--point", "[3,0]"],
        "",
        &[],
    );
    assert_eq!(r.code, 2);
    assert_eq!(r.json(), json!({"outcome": "not-a-member"}));
}

#[test]
fn coderivative_of_a_cone_map() {
    let req = json!({
        "map": worked_marginal()["map"],
        "x": [0], "y": [0], "g": [1]
    });
    let r = ccx(&["coderivative"], &req.to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let set = r.json();
    assert_eq!(set["dim"], 1);
    let r = ccx(
        &["coderivative"],
        &json!({"map": req["map"], "x": [0], "y": [-1], "g": [1]}).to_string(),
        &[],
    );
    assert_eq!(r.code, 2);
    assert_eq!(r.json(), json!({"outcome": "not-in-graph"}));
}

#[test]
fn subdiff_of_absolute_value() {
    let req = json!({"function": {"dim": 1, "max_affine": [{"g": [1], "c": 0}, {"g": [-1], "c": 0}]}, "point": [0]});
    let r = ccx(&["subdiff"], &req.to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["value"], json!(0));
    assert_eq!(v["set"]["constraints"].as_array().unwrap().len(), 2);
}

#[test]
fn marginal_worked_example() {
    let r = ccx(&["marginal"], &worked_marginal().to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["value"], json!(0));
    assert_eq!(v["y"], json!([0]));
    let rows: Vec<Value> = v["subdifferential"]["constraints"]
        .as_array()
        .unwrap()
        .clone();
    assert_eq!(
        rows,
        vec![
            json!({"a": [-1], "b": 1, "strict": false}),
            json!({"a": [1], "b": 1, "strict": false})
        ]
    );
}

#[test]
fn fm_limit_aborts_with_exit_3() {
    let mut req = worked_marginal();
    req["function"]["domain"] = json!({"dim": 2, "constraints": [
        {"a": [1, 0], "b": 5}, {"a": [-1, 0], "b": 5}, {"a": [0, 1], "b": 5}, {"a": [0, -1], "b": 5}]});
    let r = ccx(&["marginal"], &req.to_string(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["value"], json!(0));
    let r = ccx(
        &["marginal"],
        &req.to_string(),
        &[("CCX_MAX_FM_CONSTRAINTS", "1")],
    );
    assert_eq!(r.code, 3, "stdout {} stderr {}", r.stdout, r.stderr);
    assert!(r.stderr.contains("Fourier-Motzkin"));
}

#[test]
fn malformed_input_names_the_path() {
    let bad = r#"{"dim":2,"constraints":[{"a":[1,0],"b":1},{"a":[0,1.5],"b":1}]}"#;
    let r = ccx(&["core"], bad, &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("constraints[1].a[1]"), "{}", r.stderr);

    let r = ccx(
        &["gauge", "--set", &square_file(), "--point", "[1"],
        "",
        &[],
    );
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("point"), "{}", r.stderr);

    let r = ccx(
        &["subdiff"],
        r#"{"function": {"dim": 1}, "point": [0]}"#,
        &[],
    );
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("function"), "{}", r.stderr);
}

#[test]
fn dimension_mismatch_is_a_usage_error() {
    let r = ccx(
        &["separate", "--set", &square_file(), "--point", "[1,2,3]"],
        "",
        &[],
    );
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
}

#[test]
fn verify_is_deterministic_and_counts() {
    let args = [
        "verify",
        "--theorem",
        "T5.4",
        "--seed",
        "42",
        "--count",
        "50",
        "--dim",
        "2",
    ];
    let a = ccx(&args, "", &[]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let v = a.json();
    assert_eq!(v["passes"], 50);
    assert_eq!(v["violations"], 0);
    let b = ccx(&args, "", &[]);
    assert_eq!(a.stdout, b.stdout);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(ccx(&seq, "", &[]).stdout, a.stdout);

    let r = ccx(
        &[
            "verify",
            "--theorem",
            "T8.1",
            "--seed",
            "7",
            "--count",
            "25",
            "--dim",
            "2",
        ],
        "",
        &[],
    );
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["passes"], 25);
}

#[test]
fn verify_rejects_bad_arguments() {
    assert_eq!(ccx(&["verify", "--theorem", "T9.9"], "", &[]).code, 1);
    assert_eq!(
        ccx(&["verify", "--theorem", "T5.4", "--dim", "5"], "", &[]).code,
        1
    );
    assert_eq!(
        ccx(&["verify", "--theorem", "T5.4", "--count", "0"], "", &[]).code,
        1
    );
    assert_eq!(ccx(&["frobnicate"], "", &[]).code, 1);
}

#[test]
fn in_process_runner_matches_binary() {
    let r = ccx::run(
        ["ccx", "core", "--in", &square_file()],
        &mut std::io::empty(),
    );
    let b = ccx(&["core", "--in", &square_file()], "", &[]);
    assert_eq!((r.code, r.stdout), (b.code, b.stdout));
}
