//! End-to-end tests of the `gis` binary: document IO, subcommand behavior,
//! reference spectra, determinism, and the exit-code contract.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use gis_cli::schema::{ClassificationJson, ProblemDoc, SpectrumJson, VerifyJson};

fn gis(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gis"));
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    match stdin {
        Some(text) => {
            cmd.stdin(Stdio::piped());
            let mut child = cmd.spawn().unwrap();
            child
                .stdin
                .take()
                .unwrap()
                .write_all(text.as_bytes())
                .unwrap();
            child.wait_with_output().unwrap()
        }
        None => {
            cmd.stdin(Stdio::null());
            cmd.output().unwrap()
        }
    }
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SINGLE_MASS: &str = r#"{"kind":"krein","L":"infinite","omega":{"atoms":[[1.0,1.0]]}}"#;
const UPSILON_ATOM: &str = r#"{"kind":"gis","L":"infinite",
    "w":{"grid":[0.0,1.0],"segments":[[0.0,0.0,0.0,0.0]],"tail":{"exact_constant":{"c":0.0}}},
    "upsilon":{"atoms":[[1.0,1.0]]}}"#;
const LEBESGUE: &str =
    r#"{"kind":"krein","L":{"finite":1.0},"omega":{"density":{"grid":[0.0,1.0],"values":[1.0]}}}"#;

#[test]
fn classify_reads_stdin_and_reports_verdicts() {
    let out = gis(&["classify", "--input", "-", "--p", "1.5,2"], Some(UPSILON_ATOM));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cls: ClassificationJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(cls.discrete.value, "Yes");
    assert_eq!(cls.schatten.len(), 2);
    assert_eq!(cls.schatten[0].p, 1.5);
    assert_eq!(cls.trace_sum, Some(0.0));
    assert_eq!(cls.hs_sum, Some(2.0));
}

#[test]
fn requested_block_supplies_defaults_and_flags_override() {
    let doc = r#"{"kind":"krein","L":"infinite","omega":{"atoms":[[2.0,1.0]]},
                  "requested":{"p_list":[0.6]}}"#;
    let out = gis(&["classify", "--input", "-"], Some(doc));
    assert!(out.status.success());
    let cls: ClassificationJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(cls.schatten.len(), 1);
    assert_eq!(cls.schatten[0].p, 0.6);

    let out = gis(&["classify", "--input", "-", "--p", "2"], Some(doc));
    let cls: ClassificationJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(cls.schatten[0].p, 2.0);
}

#[test]
fn spectrum_matches_reference_values() {
    let out = gis(&["spectrum", "--input", "-"], Some(SINGLE_MASS));
    assert!(out.status.success());
    let sp: SpectrumJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(sp.eigenvalues.len(), 1);
    assert!((sp.eigenvalues[0] - 1.0).abs() < 1e-9, "{:?}", sp.eigenvalues);
    assert!(sp.converged);
    assert!(!sp.discreteness_caveat);

    let out = gis(&["spectrum", "--input", "-"], Some(UPSILON_ATOM));
    let sp: SpectrumJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(sp.eigenvalues.len(), 2);
    assert!((sp.eigenvalues[0] + 1.0).abs() < 1e-9);
    assert!((sp.eigenvalues[1] - 1.0).abs() < 1e-9);

    let out = gis(&["spectrum", "--input", "-", "--grid-n", "2048", "--k", "1"], Some(LEBESGUE));
    let sp: SpectrumJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((sp.eigenvalues[0] - pi2).abs() / pi2 < 1e-3, "{:?}", sp.eigenvalues);
    assert!(sp.last_delta.is_none());
}

#[test]
fn output_is_deterministic_and_transform_round_trips() {
    let a = gis(&["classify", "--input", "-"], Some(UPSILON_ATOM));
    let b = gis(&["classify", "--input", "-"], Some(UPSILON_ATOM));
    assert_eq!(a.stdout, b.stdout);

    let once = gis(&["transform", "--input", "-"], Some(UPSILON_ATOM));
    assert!(once.status.success());
    let text = stdout_str(&once);
    let doc: ProblemDoc = serde_json::from_str(&text).unwrap();
    doc.parse().unwrap();
    let twice = gis(&["transform", "--input", "-"], Some(&text));
    assert_eq!(once.stdout, twice.stdout, "transform is not idempotent");
}

#[test]
fn transform_rewrites_other_kinds_as_strings() {
    let ch = r#"{"kind":"ch","u":{"grid":[0.0,1.0],"pieces":[[1.0,0.0,0.0,0.0]]},
                 "upsilon":{"atoms":[[0.6931471805599453,3.0]]}}"#;
    let out = gis(&["transform", "--input", "-"], Some(ch));
    assert!(out.status.success());
    let doc: ProblemDoc = serde_json::from_str(&stdout_str(&out)).unwrap();
    let upsilon = doc.upsilon.as_ref().unwrap();
    assert_eq!(upsilon.atoms.len(), 1);
    assert!((upsilon.atoms[0][0] - 1.0).abs() < 1e-15);
    assert!((upsilon.atoms[0][1] - 1.5).abs() < 1e-15);

    // The transformed document carries long decimal expansions; re-transforming
    // it must reproduce it byte for byte (exercises exact float round-trips).
    let again = gis(&["transform", "--input", "-"], Some(&stdout_str(&out)));
    assert_eq!(out.stdout, again.stdout, "transform of a ch-derived string drifted");

    let dp = r#"{"kind":"delta_prime","support":{"generator":{"a":1.0,"gamma":1.0,"delta":"zero"}},
                 "requested":{"truncation":4.0}}"#;
    let out = gis(&["transform", "--input", "-"], Some(dp));
    assert!(out.status.success());
    let doc: ProblemDoc = serde_json::from_str(&stdout_str(&out)).unwrap();
    let w = doc.w.as_ref().unwrap();
    assert_eq!(w.grid, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn verify_suite_runs_and_unknown_names_fail() {
    let out = gis(&["verify", "--suite", "dp-calibration"], None);
    assert!(out.status.success());
    let report: VerifyJson = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(report.passed);
    assert_eq!(report.suite, "dp-calibration");
    assert!(report.cases.len() >= 3);

    let out = gis(&["verify", "--suite", "bogus"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn bad_inputs_exit_one_with_a_diagnostic() {
    let out = gis(&["classify", "--input", "-"], Some("{not json"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid problem document"));

    let out = gis(&["classify", "--input", "-"], Some(r#"{"kind":"gis","L":"infinite"}"#));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires field w"));

    let out = gis(&["classify", "--input", "/nonexistent.json"], None);
    assert_eq!(out.status.code(), Some(1));

    // generator spectra need a truncation to materialize
    let dp = r#"{"kind":"delta_prime","support":{"generator":{"a":1.0,"gamma":1.0,"delta":"zero"}}}"#;
    let out = gis(&["spectrum", "--input", "-"], Some(dp));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("result.json");
    let out = gis(
        &["classify", "--input", "-", "--out", path.to_str().unwrap()],
        Some(SINGLE_MASS),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let cls: ClassificationJson =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cls.discrete.value, "Yes");
    assert_eq!(cls.trace_sum, Some(1.0));
}
