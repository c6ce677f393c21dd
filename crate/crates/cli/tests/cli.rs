use std::path::Path;
use std::process::{Command, Output};

use jsonschema::{Draft, JSONSchema};
use pifix::read_digit_file;
use pifix_core::machin_pi;
use serde_json::Value;

fn pifix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pifix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn schema() -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let text = std::fs::read_to_string(path).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::options()
        .with_draft(Draft::Draft7)
        .compile(&value)
        .expect("schema compiles")
}

fn assert_valid(report: &Value) {
    let schema = schema();
    let msgs: Vec<String> = match schema.validate(report) {
        Ok(()) => return,
        Err(errors) => errors
            .map(|e| format!("{e} at {}", e.instance_path))
            .collect(),
    };
    panic!("report violates schema: {msgs:?}");
}

fn machin_digits(n: usize) -> String {
    let plain = machin_pi(n).to_plain_string();
    plain.split_once('.').unwrap().1.to_string()
}

#[test]
fn order_one_from_three() {
    let dir = tempfile::tempdir().unwrap();
    let digits = dir.path().join("pi.txt");
    let report = dir.path().join("report.json");
    let out = pifix(&[
        "compute",
        "--order",
        "1",
        "--x0",
        "3",
        "--digits",
        "900",
        "--start-digits",
        "1000",
        "--out",
        digits.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let steps: Vec<&str> = text.lines().filter(|l| l.starts_with("step ")).collect();
    assert_eq!(steps.len(), 7);
    assert!(
        steps[6].starts_with("step 7  digits=1000  |dx|=5.699518230e-903  "),
        "{}",
        steps[6]
    );
    assert!(steps[6].ends_with("ms"));

    let (int_part, frac) = read_digit_file(&std::fs::read_to_string(&digits).unwrap()).unwrap();
    assert_eq!(int_part, "3");
    assert_eq!(frac, machin_digits(900));

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid(&doc);
    assert_eq!(doc["order"], 1);
    assert_eq!(doc["x0"], "3");
    assert_eq!(doc["terminated_by"], "epsilon");
    assert_eq!(doc["ladder"], serde_json::json!([1000, 1000]));
    assert_eq!(doc["error_constant_exact"], "1/6");
    assert_eq!(doc["matched_digits"], 900);
    assert_eq!(doc["theorem_check_passed"], true);
    let last = &doc["steps"][6]["delta"];
    assert_eq!(last["leading"], "5.699518230");
    assert_eq!(last["exponent"], -903);
    let c = doc["error_constant_estimate"].as_f64().unwrap();
    assert!((c * 6.0 - 1.0).abs() < 0.01, "{c}");
}

#[test]
fn default_start_thirteen_thousand() {
    let out = pifix(&["compute", "--digits", "13000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let steps: Vec<&str> = text.lines().filter(|l| l.starts_with("step ")).collect();
    assert_eq!(steps.len(), 4);
    assert!(steps[3].contains("|dx|=1.774677351e-13075"), "{}", steps[3]);
}

#[test]
fn digit_file_agrees_with_oracle_on_wrap_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    for n in [1usize, 79, 80, 81, 160, 333] {
        let path = dir.path().join(format!("pi{n}.txt"));
        let out = pifix(&[
            "compute",
            "--digits",
            &n.to_string(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "n={n}");
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("3.\n") && text.ends_with('\n'));
        assert!(text.lines().all(|l| l.len() <= 80));
        assert_eq!(read_digit_file(&text).unwrap().1, machin_digits(n), "n={n}");
    }
}

#[test]
fn unconverged_run_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = pifix(&[
        "compute",
        "--digits",
        "500",
        "--max-steps",
        "1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid(&doc);
    assert_eq!(doc["terminated_by"], "max_steps");
    assert!(doc["matched_digits"].as_u64().unwrap() < 500);
    assert!(doc["error_constant_estimate"].is_null());
}

#[test]
fn verify_none_skips_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = pifix(&[
        "compute",
        "--digits",
        "500",
        "--max-steps",
        "1",
        "--verify",
        "none",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid(&doc);
    assert!(doc["matched_digits"].is_null());
}

#[test]
fn usage_errors_exit_three() {
    let cases: &[&[&str]] = &[
        &["compute", "--digits", "0"],
        &["compute"],
        &["compute", "--digits", "ten"],
        &["compute", "--digits", "10", "--order", "0"],
        &["compute", "--digits", "10", "--x0", "1.5"],
        &["compute", "--digits", "10", "--verify", "sometimes"],
        &["compute", "--digits", "10", "--max-steps", "0"],
        &["verify-theorem", "--order-max", "0"],
        &["bench", "--order-list", "", "--digits", "100"],
        &["bench", "--order-list", "1,x", "--digits", "100"],
        &["frobnicate"],
        &[],
    ];
    for args in cases {
        let out = pifix(args);
        assert_eq!(code(&out), 3, "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn usage_messages_name_the_flag() {
    let out = pifix(&["compute", "--digits", "0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--digits"));
    let out = pifix(&["compute", "--digits", "10", "--x0", "1.5"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--x0"));
    let out = pifix(&["bench", "--order-list", "", "--digits", "10"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--order-list"));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("pi.txt");
    let out = pifix(&["compute", "--digits", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_theorem_lines() {
    let out = pifix(&["verify-theorem", "--order-max", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "P=1 a3=1/6 PASS\nP=2 a5=9/120 PASS\nP=3 a7=225/5040 PASS\nP=4 a9=11025/362880 PASS\n"
    );
}

#[test]
fn bench_rows() {
    let out = pifix(&["bench", "--order-list", "1,4", "--digits", "10000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("order,digits,steps,total_ms,ms_per_step,matched_digits")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for (row, order) in rows.iter().zip(["1", "4"]) {
        assert_eq!(row.len(), 6);
        assert_eq!(row[0], order);
        assert_eq!(row[1], "10000");
        assert!(row[5].parse::<usize>().unwrap() >= 10000);
    }
}

#[test]
fn bench_repeats_agree() {
    let out = pifix(&[
        "bench",
        "--order-list",
        "3",
        "--digits",
        "2000",
        "--repeat",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].to_string(), f[5].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[0] == w[1]), "{rows:?}");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&pifix(&["--help"])), 0);
    assert_eq!(code(&pifix(&["--version"])), 0);
    assert_eq!(code(&pifix(&["compute", "--help"])), 0);
}
