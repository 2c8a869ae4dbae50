//! End-to-end checks of the `mcs` binary: exit codes, report shapes, and
//! byte-stable JSON.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn mcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn check_distinguishes_consistent_and_inconsistent_systems() {
    let out = mcs(&["check", &fixture("hospital_no_allergy.mcs")]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout(&out), "status: consistent\n");

    let out = mcs(&["check", &fixture("hospital.mcs")]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout(&out), "status: inconsistent\n");

    let out = mcs(&["check", &fixture("odd_loop.mcs")]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn equilibria_exit_code_reflects_emptiness() {
    let out = mcs(&["equilibria", &fixture("even_loop.mcs")]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("equilibria: 2"));

    let out = mcs(&["equilibria", &fixture("odd_loop.mcs")]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn diagnose_json_lists_the_hospital_repairs() {
    let out = mcs(&["diagnose", "--format", "json", &fixture("hospital.mcs")]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "ok");
    let diagnoses = report["diagnoses"].as_array().unwrap();
    assert_eq!(diagnoses.len(), 4);
    assert_eq!(diagnoses[0]["d2"], serde_json::json!(["r5"]));
    assert_eq!(diagnoses[1]["d1"], serde_json::json!(["r1"]));
    assert_eq!(
        report["faulty"]["from_diagnoses"],
        serde_json::json!(["r1", "r2", "r4", "r5"])
    );
    assert_eq!(
        report["faulty"]["from_diagnoses"],
        report["faulty"]["from_explanations"]
    );
}

#[test]
fn json_output_is_byte_identical_across_runs_and_job_counts() {
    let first = mcs(&["diagnose", "--format", "json", &fixture("hospital.mcs")]);
    let second = mcs(&["diagnose", "--format", "json", &fixture("hospital.mcs")]);
    assert_eq!(first.stdout, second.stdout);

    let parallel = mcs(&[
        "diagnose",
        "--format",
        "json",
        "--jobs",
        "4",
        &fixture("hospital.mcs"),
    ]);
    assert_eq!(first.stdout, parallel.stdout);
}

#[test]
fn explain_reports_the_odd_loop_cause() {
    let out = mcs(&["explain", "--format", "json", &fixture("odd_loop.mcs")]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        report["explanations"],
        serde_json::json!([{"e1": ["r1", "r2"], "e2": ["r1", "r2"]}])
    );

    // A consistent system has no explanation: empty result, exit 1.
    let out = mcs(&["explain", &fixture("hospital_no_allergy.mcs")]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("explanations: 0"));
}

#[test]
fn all_flag_disables_minimality() {
    let minimal = mcs(&["diagnose", "--format", "json", &fixture("odd_loop.mcs")]);
    let all = mcs(&[
        "diagnose",
        "--all",
        "--format",
        "json",
        &fixture("odd_loop.mcs"),
    ]);
    let minimal: serde_json::Value = serde_json::from_str(&stdout(&minimal)).unwrap();
    let all: serde_json::Value = serde_json::from_str(&stdout(&all)).unwrap();
    let n_minimal = minimal["diagnoses"].as_array().unwrap().len();
    let n_all = all["diagnoses"].as_array().unwrap().len();
    assert_eq!(n_minimal, 4);
    assert!(n_all > n_minimal);
    assert!(all.get("faulty").is_none());
}

#[test]
fn filter_and_prefer_use_the_shipped_programs() {
    let out = mcs(&[
        "filter",
        &fixture("odd_loop.mcs"),
        "--observer",
        &fixture("filters/no_unconditioning.lp"),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("diagnoses: 2"));
    assert!(text.contains("d1={r1} d2={}"));

    let out = mcs(&[
        "prefer",
        &fixture("odd_loop.mcs"),
        "--preference",
        &fixture("prefs/fewer_removals.lp"),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("d1={} d2={r1}"));
    assert!(text.contains("d1={} d2={r2}"));
}

#[test]
fn graph_dot_dashes_negative_edges() {
    let out = mcs(&["graph", "--dot", &fixture("hospital.mcs")]);
    assert_eq!(exit_code(&out), 0);
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph mcs {"));
    assert!(dot.contains("\"patients\" -> \"expert\" [style=dashed];"));
    assert!(dot.contains("\"patients\" -> \"onto\";"));
}

#[test]
fn graph_report_includes_the_classification() {
    let out = mcs(&["graph", "--format", "json", &fixture("odd_loop.mcs")]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["classification"], "cyclic_with_odd");
    assert_eq!(report["edges"].as_array().unwrap().len(), 2);
}

#[test]
fn managed_check_reports_coherence() {
    let out = mcs(&[
        "managed-check",
        "--format",
        "json",
        &fixture("managed_revise.mcs"),
    ]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "consistent");
    assert_eq!(report["classification"], "acyclic");
    assert_eq!(
        report["totally_coherent"],
        serde_json::json!([{"context": "store", "coherent": true}])
    );
}

#[test]
fn parse_errors_exit_with_code_2_and_stderr_diagnostics() {
    let dir = std::env::temp_dir().join("mcs-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.mcs");
    std::fs::write(&path, "context c1 kind facts { }\nbridge r1: c9::a <- .\n").unwrap();
    let out = mcs(&["check", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("dangling-reference"));
    assert!(stderr.contains("2:12"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_input_exits_with_code_2() {
    let out = mcs(&["check", "/nonexistent/system.mcs"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn exceeding_the_cap_exits_with_code_3() {
    let out = mcs(&["diagnose", "--cap", "4", &fixture("hospital.mcs")]);
    assert_eq!(exit_code(&out), 3);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("cap"));
}

#[test]
fn every_subcommand_handles_every_fixture() {
    let fixtures = [
        "hospital.mcs",
        "hospital_no_allergy.mcs",
        "odd_loop.mcs",
        "even_loop.mcs",
        "managed_revise.mcs",
    ];
    for name in fixtures {
        let path = fixture(name);
        for format in ["text", "json"] {
            let commands: Vec<Vec<&str>> = vec![
                vec!["check", &path],
                vec!["equilibria", &path],
                vec!["diagnose", &path],
                vec!["explain", &path],
                vec!["graph", &path],
                vec!["managed-check", &path],
            ];
            for mut args in commands {
                args.extend(["--format", format]);
                let out = mcs(&args);
                let code = exit_code(&out);
                assert!(
                    code == 0 || code == 1,
                    "{args:?} on {name} exited with {code}: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
            }
        }
        let out = mcs(&[
            "filter",
            &path,
            "--observer",
            &fixture("filters/no_unconditioning.lp"),
        ]);
        assert!(exit_code(&out) <= 1, "filter on {name}");
        let out = mcs(&[
            "prefer",
            &path,
            "--preference",
            &fixture("prefs/fewer_removals.lp"),
            "--observer",
            &fixture("filters/keep_r2.lp"),
        ]);
        assert!(exit_code(&out) <= 1, "prefer on {name}");
    }
}
