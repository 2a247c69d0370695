//! End-to-end tests of the binary: output shapes, exit codes, and the
//! determinism contract.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrsheaf"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code present")
}

#[test]
fn grrr_closed_prints_rank() {
    let out = run(&["grrr", "--r", "4", "--d", "2,2", "--method", "closed"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("2"));
}

#[test]
fn grrr_all_methods_agree() {
    let out = run(&["grrr", "--r", "4", "--d", "-1,3", "--all-methods"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("-1 agreement"));
    let json_part = stdout(&out).lines().skip(1).collect::<Vec<_>>().join("\n");
    let v: Value = serde_json::from_str(&json_part).unwrap();
    assert_eq!(v["agree"], Value::Bool(true));
    assert_eq!(v["closed"], v["bruteforce"]);
}

#[test]
fn grrr_single_vertex_zero() {
    let out = run(&["grrr", "--r", "1", "--d", "0,0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("0"));
}

#[test]
fn malformed_divisor_exits_64() {
    let out = run(&["grrr", "--r", "4", "--d", "two,2"]);
    assert_eq!(code(&out), 64);
    let out = run(&["grrr", "--r", "4"]);
    assert_eq!(code(&out), 64);
    let out = run(&["grrr", "--r", "4", "--d", "2,2", "--method", "psychic"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn bruteforce_budget_exits_65() {
    let out = run(&["grrr", "--r", "2", "--d", "100000,100000", "--method", "bruteforce"]);
    assert_eq!(code(&out), 65);
}

#[test]
fn betti_model_sheaf_pair() {
    let out = run(&["betti", "--sheaf", "M", "--r", "4", "--d", "0,0"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["b0"]["n"], 1);
    assert_eq!(v["b1"]["n"], 3);
}

#[test]
fn betti_structure_sheaf_is_infinite() {
    let out = run(&["betti", "--sheaf", "O", "--r", "2"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["b1"]["kind"], "infinite");
}

#[test]
fn betti_skyscraper_point() {
    let out = run(&["betti", "--sheaf", "sky", "--vertex", "B1"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["b0"]["n"], 1);
    assert_eq!(v["b1"]["n"], 0);
}

#[test]
fn betti_prime_field_matches_rationals() {
    let q = run(&["betti", "--sheaf", "M", "--r", "3", "--d", "1,1", "--field", "q"]);
    let fp = run(&["betti", "--sheaf", "M", "--r", "3", "--d", "1,1", "--field", "fp:2"]);
    assert_eq!(stdout(&q), stdout(&fp));
}

#[test]
fn forced_engine_inapplicable_exits_66() {
    let out = run(&["betti", "--sheaf", "constant", "--engine", "closed"]);
    assert_eq!(code(&out), 66);
}

#[test]
fn verify_rank_sweep_passes() {
    let out = run(&["verify", "--checks", "rr", "--r-range", "1..3", "--d-box", "-4..4"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["results"][0]["cells"], 243);
}

#[test]
fn verify_hom_reports_first_counterexample() {
    let out = run(&["verify", "--checks", "hom", "--r-range", "2..2", "--d-box", "-1..1"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], Value::Bool(false));
    let first = &v["results"][0]["first_counterexample"];
    assert_eq!(first["check"], "hom");
    assert!(first["got"]["dimension"].as_i64().unwrap() < first["expected"].as_i64().unwrap());
    assert_eq!(first["got"]["stabilized"], Value::Bool(true));
}

#[test]
fn verify_output_is_byte_identical_across_runs() {
    let args = ["verify", "--checks", "rr,euler", "--r-range", "1..2", "--d-box", "-3..3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(!stdout(&a).contains("wall_time_ms"));

    let mut timed = args.to_vec();
    timed.push("--timing");
    let t = run(&timed);
    assert!(stdout(&t).contains("wall_time_ms"));
}

#[test]
fn verify_results_agree_across_fields() {
    let q = run(&["verify", "--checks", "rr", "--r-range", "1..2", "--d-box", "-2..2",
                  "--field", "q"]);
    let f2 = run(&["verify", "--checks", "rr", "--r-range", "1..2", "--d-box", "-2..2",
                   "--field", "fp:2"]);
    let vq: Value = serde_json::from_str(&stdout(&q)).unwrap();
    let vf: Value = serde_json::from_str(&stdout(&f2)).unwrap();
    assert_eq!(vq["results"], vf["results"]);
    assert_ne!(vq["config"], vf["config"]);
}

#[test]
fn levelsets_csv_contains_diagonal_seeds() {
    let out = run(&["levelsets", "--r", "4", "--imax", "2", "--box", "-5..10"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d1,d2,i"));
    for needle in ["0,0,0", "1,1,1", "2,2,2"] {
        assert!(text.lines().any(|l| l == needle), "missing row {needle}");
    }
}

#[test]
fn levelsets_single_cell_box() {
    let out = run(&["levelsets", "--r", "1", "--imax", "0", "--box", "0..0"]);
    assert_eq!(stdout(&out), "d1,d2,i\n0,0,0\n");
}

#[test]
fn levelsets_rectangular_box_with_separator() {
    let out = run(&["levelsets", "--r", "4", "--imax", "0", "--box", "-4..-4", "×", "4..4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().any(|l| l == "-4,4,0"));
}

#[test]
fn levelsets_json_format() {
    let out = run(&["levelsets", "--r", "4", "--imax", "1", "--box", "-2..2", "--format",
                    "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["sets"][0]["i"], 0);
    assert!(v["sets"][0]["points"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!([0, 0])));
}

#[test]
fn unknown_subcommand_exits_64() {
    let out = run(&["transmogrify"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
}
