use std::path::PathBuf;
use std::process::{Command, Output};

use ctbounds_cli::report::{parse_csv, Report};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctbounds")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn record<'a>(v: &'a Value, bound: &str) -> &'a Value {
    v["records"].as_array().unwrap().iter().find(|r| r["bound"] == bound).unwrap_or_else(|| panic!("no {bound}"))
}

fn write_instance(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn diaconis_efron_new_lower_bound() {
    let de = fixture("diaconis_efron.json");
    let o = run(&["bounds", de.to_str().unwrap(), "--which", "newlb", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["records"].as_array().unwrap().len(), 1);
    assert_eq!(record(&v, "newlb")["display"], "9.5e12");
}

#[test]
fn uniform_case_one_defaults() {
    let o = run(&["bounds", fixture("uniform_3x3.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for (b, d) in [("ub1", "4.7e17"), ("ub2", "1.8e15"), ("newlb", "3.1e5"), ("lb2", "2.4e3"), ("lb1", "1.5e-28")] {
        assert_eq!(record(&v, b)["display"], d, "{b}");
    }
}

#[test]
fn graphical_instances_get_gurvits_bounds() {
    let o = run(&["bounds", fixture("permutations_2x2.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    record(&v, "gurvits_lb");
    record(&v, "gurvits_ub");
}

#[test]
fn unequal_sums_are_bad_input() {
    let o = run(&["bounds", fixture("unequal_sums.json").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('3') && err.contains('2'), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn infeasible_caps_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_instance(&dir, "tight.json", r#"{"alpha":[3,1],"beta":[2,2],"k":[[1,1],[1,1]]}"#);
    assert_eq!(code(&run(&["bounds", &p])), 2);
}

#[test]
fn malformed_files_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("syntax.json", "{"),
        ("shape.json", r#"{"alpha":[1,1],"beta":[2],"k":[[1,1]]}"#),
        ("token.json", r#"{"alpha":[1],"beta":[1],"k":"Inf"}"#),
        ("extra.json", r#"{"alpha":[1],"beta":[1],"k":"inf","kk":1}"#),
    ] {
        let p = write_instance(&dir, name, body);
        assert_eq!(code(&run(&["bounds", &p])), 4, "{name}");
    }
    assert_eq!(code(&run(&["bounds", "/nonexistent/instance.json"])), 4);
    let de = fixture("diaconis_efron.json");
    assert_eq!(code(&run(&["bounds", de.to_str().unwrap(), "--which", "ub9"])), 4);
}

#[test]
fn exact_counts() {
    let o = run(&["exact", fixture("birkhoff_3.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(record(&json(&o), "exact")["exact"], "6");

    let dir = tempfile::tempdir().unwrap();
    let p = write_instance(&dir, "two.json", r#"{"alpha":[1,1],"beta":[1,1],"k":"inf"}"#);
    for method in ["dp", "brute"] {
        let o = run(&["exact", &p, "--method", method, "--format", "json"]);
        assert_eq!(record(&json(&o), "exact")["exact"], "2", "{method}");
    }

    let o = run(&["exact", fixture("uniform_3x3.json").to_str().unwrap(), "--format", "json"]);
    let r = record(&json(&o), "exact").clone();
    assert_eq!(r["exact"], "13268976");
    assert!((r["log10"].as_f64().unwrap() - 7.1228).abs() < 1e-3);
}

#[test]
fn exact_budget_exit_five() {
    let o = run(&["exact", fixture("diaconis_efron.json").to_str().unwrap(), "--budget", "1000"]);
    assert_eq!(code(&o), 5);
}

#[test]
fn volume_commands() {
    let o = run(&["volume", fixture("birkhoff_3.json").to_str().unwrap(), "--closed-form", "--format", "json", "--digits", "3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(record(&v, "volume_lb")["display"], "2.50e-2");
    assert_eq!(record(&v, "uniform_closed_form")["display"], "2.50e-2");
    assert_eq!(record(&v, "covolume")["display"], "9.00e0");

    assert_eq!(code(&run(&["volume", fixture("disconnected.json").to_str().unwrap()])), 6);
}

#[test]
fn random_binomial_two_by_two() {
    let o = run(&["random", fixture("permutations_2x2.json").to_str().unwrap(), "--dist", "binomial", "--s", "0.5", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(record(&v, "ub")["log10"].as_f64().unwrap(), 0.0);
    assert!((record(&v, "lb")["log10"].as_f64().unwrap() - 0.125f64.log10()).abs() < 1e-9);
    assert_eq!(record(&v, "exact")["exact"], "1/8");
}

#[test]
fn random_poisson_two_by_two() {
    let o = run(&["random", fixture("permutations_2x2.json").to_str().unwrap(), "--dist", "poisson", "--s", "1", "--format", "json"]);
    let v = json(&o);
    let lb = record(&v, "lb")["log10"].as_f64().unwrap();
    let ub = record(&v, "ub")["log10"].as_f64().unwrap();
    assert!((lb - (4.0f64.ln() - 6.0) / std::f64::consts::LN_10).abs() < 1e-9);
    assert!((ub - (4.0f64.ln() - 2.0) / std::f64::consts::LN_10).abs() < 1e-9);
}

#[test]
fn random_binomial_needs_finite_caps() {
    let o = run(&["random", fixture("birkhoff_3.json").to_str().unwrap(), "--dist", "binomial", "--s", "0.5"]);
    assert_eq!(code(&o), 4);
    assert!(!o.stderr.is_empty());
}

#[test]
fn reproduce_uniform_cases() {
    let o = run(&["reproduce", "--table", "uniform", "--case", "1", "--format", "json"]);
    let v = json(&o);
    for b in ["ub1", "ub2", "lb2", "lb1", "newlb"] {
        assert_eq!(record(&v, b)["status"], "match", "{b}");
    }
    assert_eq!(record(&v, "actual")["exact"], "13268976");
    // The printed upper bound column uses a different exponent; see README.
    assert_eq!(record(&v, "ub3")["status"], "mismatch");
    assert_eq!(code(&o), 7);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ub3"));

    let o = run(&["reproduce", "--table", "uniform", "--case", "14", "--format", "json"]);
    assert_eq!(record(&json(&o), "ub1")["display"], "1.3e34345");
}

#[test]
fn reproduce_general_case_four() {
    let o = run(&["reproduce", "--table", "general", "--case", "4", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(record(&v, "gurvits_lb")["display"], "8.9e431");
    assert_eq!(record(&v, "gurvits_ub")["display"], "1.3e515");
}

#[test]
fn reproduce_unknown_case() {
    assert_eq!(code(&run(&["reproduce", "--table", "general", "--case", "99"])), 4);
}

#[test]
fn csv_and_json_carry_the_same_payload() {
    let de = fixture("diaconis_efron.json");
    let j = json(&run(&["bounds", de.to_str().unwrap(), "--format", "json"]));
    let csv = run(&["bounds", de.to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("case,bound,log10,display,valid,seconds\n"));
    let rows = parse_csv(&text).unwrap();
    let recs = j["records"].as_array().unwrap();
    assert_eq!(rows.len(), recs.len());
    for ((case, bound, log10, display, valid), rec) in rows.iter().zip(recs) {
        assert_eq!(case, rec["case"].as_str().unwrap());
        assert_eq!(bound, rec["bound"].as_str().unwrap());
        assert_eq!(display, rec["display"].as_str().unwrap());
        assert_eq!(*log10, rec["log10"].as_f64());
        assert_eq!(*valid, rec["valid"].as_bool().unwrap());
    }
}

#[test]
fn json_report_round_trips() {
    let o = run(&["bounds", fixture("mixed_caps.json").to_str().unwrap(), "--format", "json"]);
    let report: Report = serde_json::from_slice(&o.stdout).unwrap();
    let again = serde_json::to_string(&report).unwrap();
    let back: Report = serde_json::from_str(&again).unwrap();
    assert_eq!(report, back);
}

#[test]
fn table_format_is_default() {
    let o = run(&["bounds", fixture("birkhoff_3.json").to_str().unwrap()]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("ub1") && !text.trim_start().starts_with('{'));
}
