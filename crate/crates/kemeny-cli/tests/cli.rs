//! End-to-end command tests: exit-code contract, report determinism,
//! seed resolution, and file outputs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.display().to_string()
}

fn kemeny(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kemeny"))
        .args(args)
        .env_remove("KEMENY_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn passing_run_exits_zero() {
    let out = kemeny(&["verify", "--input", &fixture("two_state.json"), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert_eq!(rep["model_kind"], "dtmc");
    assert!(rep["verdicts"].as_object().unwrap().values().all(|v| v["pass"] == true));
}

#[test]
fn usage_and_input_errors_exit_one() {
    for args in [
        vec!["dtmc", "--input", "/nonexistent/chain.json"],
        vec!["dtmc", "--input", &fixture("two_state_ct.json")], // kind mismatch
        vec!["dtmc"],                                           // missing required flag
        vec!["frobnicate"],                                     // unknown subcommand
        vec!["diffusion", "--input", &fixture("ou.json")],      // needs --truncate
        vec![
            "diffusion",
            "--input",
            &fixture("bessel.json"),
            "--grid",
            "3",
            "--mc",
            "10", // needs --from/--target
        ],
    ] {
        let out = kemeny(&args);
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
        assert!(!out.stderr.is_empty(), "args {args:?} should explain on stderr");
    }
}

#[test]
fn schema_and_json_errors_exit_one() {
    let dir = std::env::temp_dir();
    let bad_schema = dir.join("kemeny_cli_test_small.json");
    std::fs::write(&bad_schema, r#"{"kind":"dtmc","P":[[1.0]]}"#).unwrap();
    let out = kemeny(&["dtmc", "--input", bad_schema.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));

    let bad_json = dir.join("kemeny_cli_test_syntax.json");
    std::fs::write(&bad_json, "{\"kind\":\"dtmc\",\n\"P\": [[0.5,").unwrap();
    let out = kemeny(&["dtmc", "--input", bad_json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn failed_verdict_exits_two() {
    // a coarse band biases the hitting estimate far past 5%
    let out = kemeny(&[
        "diffusion",
        "--input",
        &fixture("bessel.json"),
        "--grid",
        "3",
        "--mc",
        "100",
        "--seed",
        "1",
        "--from",
        "1.0",
        "--target",
        "0.5",
        "--step",
        "1e-3",
        "--band",
        "0.3",
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let rep = stdout_json(&out);
    assert_eq!(rep["verdicts"]["mc_hitting_rel_err"]["pass"], false);
}

#[test]
fn help_exits_zero() {
    let out = kemeny(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("kemeny"));
}

#[test]
fn reports_are_byte_identical_with_fixed_seed() {
    let args = [
        "dtmc",
        "--input",
        &fixture("two_state.json"),
        "--mc",
        "5000",
        "--seed",
        "42",
        "--no-timestamp",
    ];
    let a = kemeny(&args);
    let b = kemeny(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn streams_flag_does_not_change_results() {
    let run = |streams: &str| {
        kemeny(&[
            "ctmc",
            "--input",
            &fixture("two_state_ct.json"),
            "--mc",
            "4000",
            "--seed",
            "9",
            "--streams",
            streams,
            "--no-timestamp",
        ])
    };
    let one = run("1");
    let four = run("4");
    // the streams parameter is echoed in the report, so compare the MC
    // sections instead of raw bytes
    let a = stdout_json(&one)["mc"].clone();
    let b = stdout_json(&four)["mc"].clone();
    assert_eq!(a, b);
}

#[test]
fn env_seed_applies_when_flag_absent() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_kemeny"))
        .args(["dtmc", "--input", &fixture("two_state.json"), "--mc", "1000", "--no-timestamp"])
        .env("KEMENY_SEED", "123")
        .output()
        .unwrap();
    let rep = stdout_json(&with_env);
    assert_eq!(rep["parameters"]["seed"], 123);

    let flag_wins = Command::new(env!("CARGO_BIN_EXE_kemeny"))
        .args([
            "dtmc",
            "--input",
            &fixture("two_state.json"),
            "--mc",
            "1000",
            "--seed",
            "5",
            "--no-timestamp",
        ])
        .env("KEMENY_SEED", "123")
        .output()
        .unwrap();
    let rep = stdout_json(&flag_wins);
    assert_eq!(rep["parameters"]["seed"], 5);
}

#[test]
fn report_round_trips_and_timestamp_is_optional() {
    let out = kemeny(&["ctmc", "--input", &fixture("cycle3_ct.json"), "--no-timestamp"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: kemeny_cli::report::RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.render(false), text);
    assert!(parsed.timestamp.is_none());

    let out = kemeny(&["ctmc", "--input", &fixture("cycle3_ct.json")]);
    let parsed: kemeny_cli::report::RunReport =
        serde_json::from_slice(&out.stdout).unwrap();
    assert!(parsed.timestamp.is_some());
}

#[test]
fn csv_flattens_the_profile() {
    let dir = std::env::temp_dir();
    let csv = dir.join("kemeny_cli_test_profile.csv");
    let out = kemeny(&[
        "diffusion",
        "--input",
        &fixture("bessel.json"),
        "--grid",
        "5",
        "--no-timestamp",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let data = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = data.lines().collect();
    assert_eq!(lines[0], "x,k");
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let k: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((k - 0.2).abs() < 1e-6);
    }
}

#[test]
fn near_vanishing_sigma_warns_but_is_accepted() {
    let dir = std::env::temp_dir();
    let spec = dir.join("kemeny_cli_test_sigma_x.json");
    std::fs::write(
        &spec,
        r#"{"kind":"diffusion","drift":"0","sigma":"0.0005+x","interval":{"left":0,"right":1},
            "left_boundary":"reflecting","right_boundary":"reflecting"}"#,
    )
    .unwrap();
    let out = kemeny(&["diffusion", "--input", spec.to_str().unwrap(), "--grid", "3",
        "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn output_flag_writes_the_report_file() {
    let dir = std::env::temp_dir();
    let path = dir.join("kemeny_cli_test_report.json");
    let out = kemeny(&[
        "dtmc",
        "--input",
        &fixture("cycle3.json"),
        "--no-timestamp",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rep["results"]["kemeny"]["kappa"], 1.0);
}
