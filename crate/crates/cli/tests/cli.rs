use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pmvc_core::schema::{read_payoff_csv, ReportFile};
use pmvc_core::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn pmvc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmvc")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_reports_pass_and_witness() {
    let ok = pmvc(&["check", path(&data("counterexample.json"))]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("submodular: PASS"));

    let bad = pmvc(&["check", path(&data("supermodular.json"))]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("submodular: FAIL witness (∅, {y}, x): 1 < 2"), "{}", stdout(&bad));

    let json = pmvc(&["check", path(&data("supermodular.json")), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["submodular"]["witness"]["larger"], "{y}");
    assert_eq!(v["pass"], false);
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.json");
    std::fs::write(&file, "{\"type\": \"table\",\n  \"entries\": {\"x\": 1}\n").unwrap();
    let out = pmvc(&["check", path(&file)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    assert_eq!(code(&pmvc(&["ne"])), 2);
    assert_eq!(code(&pmvc(&["ne", "--gen", "harmonic:2"])), 2);
    assert_eq!(code(&pmvc(&["ne", "--gen", "counterexample", path(&data("counterexample.json"))])), 2);
    assert_eq!(code(&pmvc(&["poa", "--gen", "counterexample", "--format", "csv"])), 2);
    assert_eq!(code(&pmvc(&["ne", "--gen", "counterexample", "--cap", "0"])), 2);
    assert_eq!(code(&pmvc(&["ne", "--gen", "counterexample", "--cap", "3"])), 2);
}

#[test]
fn unsound_instances_need_the_diagnostic_flag() {
    let file = data("supermodular.json");
    assert_eq!(code(&pmvc(&["ne", path(&file)])), 2);
    let out = pmvc(&["ne", path(&file), "--diagnostic"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("3 pure Nash equilibria\n"));
    assert!(stdout(&out).contains("{x}|{y}  (0, 0)   0"));
}

#[test]
fn table_matches_golden_and_detects_changes() {
    let golden = data("table2.csv");
    let out = pmvc(&["table", path(&data("counterexample.json")), "--golden", path(&golden)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let dir = tempfile::tempdir().unwrap();
    let altered = dir.path().join("altered.csv");
    let text = std::fs::read_to_string(&golden).unwrap().replace("2.601,2.201", "2.601,2.2011");
    std::fs::write(&altered, text).unwrap();
    let out = pmvc(&["table", path(&data("counterexample.json")), "--golden", path(&altered)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("mismatch {a}|{c}: got (2.601, 2.201) want (2.601, 2.2011)"));
}

#[test]
fn harmonic_table_pays_one_per_offering_vendor() {
    let out = pmvc(&["table", "--gen", "harmonic:2,2", "--format", "csv"]);
    let rows = read_payoff_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 16);
    for (profile, payoffs) in rows {
        let (left, right) = profile.split_once('|').unwrap();
        if left != "{}" && right != "{}" {
            assert_eq!(payoffs, vec![Rational::one(), Rational::one()], "{profile}");
        }
    }
}

#[test]
fn single_vendor_table_has_one_payoff_column() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("solo.json");
    std::fs::write(&file, r#"{"type": "table", "entries": {"x": "2"}, "vendors": [["x"]]}"#).unwrap();
    let out = pmvc(&["table", path(&file), "--format", "csv"]);
    assert_eq!(stdout(&out), "profile,u1\n{},0\n{x},2\n");
}

#[test]
fn documented_command_outputs() {
    let out = pmvc(&["ne", path(&data("counterexample.json"))]);
    assert_eq!(stdout(&out), "0 pure Nash equilibria\n");

    let out = pmvc(&["poa", "--gen", "harmonic:2,3"]);
    assert!(stdout(&out).contains("PoA = 11/6, bound H_3+1 = 17/6, satisfied"));

    let out = pmvc(&["cdsp", "--verify", path(&data("two-tv.json"))]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("equilibrium certified; welfare optimal"));

    let out = pmvc(&["brd", path(&data("counterexample.json")), "--start", "{a}|{c}"]);
    assert!(stdout(&out).ends_with("cycle of period 4\n"));

    let out = pmvc(&["bestresp", "--gen", "counterexample", "--vendor", "2", "--prices", "a=2.601,b=8.6045"]);
    assert!(stdout(&out).contains("prices: c=1.4015, d=1.3015\nrevenue 2.703\n"));

    let out = pmvc(&["verify", "--gen", "counterexample", "--profile", "{a}|{c}"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("refuted: vendor 2 deviates to c=1.4015, d=1.3015 and earns 2.703 > 2.201"));

    let out = pmvc(&["verify", "--gen", "counterexample", "--prices", "a=2,b=8.6045,c=2,d=8.6045"]);
    assert!(stdout(&out).contains("mechanism profile {a}|{c} gives payoffs (2.601, 2.201) (change (0.601, 0.201))"));
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    for args in [
        vec!["ne", "--gen", "random:7,3", "--seed", "11", "--format", "json"],
        vec!["table", "--gen", "cdsp:6,2,2", "--seed", "4", "--format", "csv"],
        vec!["poa", "--gen", "harmonic:3,2", "--lemmas"],
    ] {
        let one = pmvc(&[args.as_slice(), &["--threads", "1"]].concat());
        let many = pmvc(&[args.as_slice(), &["--threads", "4"]].concat());
        let again = pmvc(&args);
        assert_eq!(code(&one), 0);
        assert_eq!(one.stdout, many.stdout);
        assert_eq!(one.stdout, again.stdout);
    }
}

#[test]
fn json_outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for spec in ["counterexample", "pos:2,3", "random:6,2,concave", "cdsp:5,2,2"] {
        let generated = pmvc(&["gen", "--gen", spec, "--seed", "5"]);
        let file = dir.path().join("g.json");
        std::fs::write(&file, &generated.stdout).unwrap();
        assert_eq!(pmvc(&["gen", "--gen", spec, "--seed", "5"]).stdout, generated.stdout);
        let g = InstanceFile::from_json(&stdout(&generated)).unwrap().to_game().unwrap();

        let from_file = pmvc(&["poa", path(&file), "--format", "json"]);
        let from_gen = pmvc(&["poa", "--gen", spec, "--seed", "5", "--format", "json"]);
        assert_eq!(from_file.stdout, from_gen.stdout, "{spec}");
        let report: ReportFile = serde_json::from_slice(&from_file.stdout).unwrap();
        let rebuilt = report.to_report(&g).unwrap();
        assert_eq!(rebuilt, equilibrium_report(&g, DEFAULT_PROFILE_CAP).unwrap());
    }
}
