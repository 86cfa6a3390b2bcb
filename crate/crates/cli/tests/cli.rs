use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn foresight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foresight")).args(args).output().unwrap()
}

fn path(name: &str) -> String {
    scenarios().join(name).display().to_string()
}

#[test]
fn run_writes_metrics_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("metrics.json");
    let trace = dir.path().join("trace.csv");
    let o = foresight(&[
        "run",
        &path("s2_unpredicted_cut_in.scn"),
        "--script",
        &path("s2_unpredicted_cut_in.script"),
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(metrics["ticks"], 500);
    assert_eq!(metrics["collisions"], 0);
    let rows = fs::read_to_string(&trace).unwrap().lines().count();
    assert_eq!(rows, 501);
}

#[test]
fn compare_prints_table_and_writes_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("report{i}.json"));
        let o = foresight(&[
            "compare",
            &path("s3_merging_van.scn"),
            "--script",
            &path("s3_merging_van.script"),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.lines().any(|l| l.starts_with("max_decel")), "{text}");
        reports.push(fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let report: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert!(report["baseline"]["max_decel"].as_f64() > report["intervened"]["max_decel"].as_f64());
}

#[test]
fn bad_inputs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.script");
    fs::write(&bad, "1.0 van sideways\n").unwrap();
    let o = foresight(&["run", &path("s3_merging_van.scn"), "--script", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());

    fs::write(&bad, "1.0 ghost left\n").unwrap();
    let o = foresight(&["compare", &path("s3_merging_van.scn"), "--script", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));

    let o = foresight(&["run", &path("missing.scn")]);
    assert!(!o.status.success());

    let o = foresight(&["serve", "--rtf", "0", "--scenario-dir", &scenarios().display().to_string()]);
    assert!(!o.status.success());
}
