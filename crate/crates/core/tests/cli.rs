use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refgov::moas::Polytope;
use refgov::polytope_io;
use refgov::problem_file::ProblemFile;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn refgov(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refgov"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("REFGOV_SEED")
        .env_remove("REFGOV_CONFIG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn cubic() -> String {
    data("scalar_cubic.json").display().to_string()
}

#[test]
fn build_writes_loadable_polytope_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = refgov(dir.path(), &["build-moas", "--problem", &cubic()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!stdout(&o).contains("cache hit"));
    let poly: Polytope = polytope_io::load(&dir.path().join("moas.poly")).unwrap();
    assert_eq!(poly.ordering(), "grlex-desc:n=2:p=3");
    assert_eq!(poly.dim(), 2 + 3 + 4);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("moas.poly.meta.json")).unwrap()).unwrap();
    for key in ["version", "input_hash", "ordering", "beta", "eps"] {
        assert!(meta.get(key).is_some(), "meta lacks {key}");
    }

    let o = refgov(dir.path(), &["build-moas", "--problem", &cubic()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("cache hit"));
    assert_eq!(polytope_io::load(&dir.path().join("moas.poly")).unwrap(), poly);

    let o = refgov(dir.path(), &["build-moas", "--problem", &cubic(), "--no-cache"]);
    assert!(!stdout(&o).contains("cache hit"));
}

#[test]
fn runs_are_byte_identical_for_a_seed() {
    let problem = data("scalar_cubic_disturbed.json").display().to_string();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["run", "--problem", &problem, "--seed", "5", "--steps", "50", "--x0", "0.7"];
    assert_eq!(code(&refgov(a.path(), &args)), 0);
    assert_eq!(code(&refgov(b.path(), &args)), 0);
    let read = |d: &Path| std::fs::read(d.join("trajectory.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("run.report.json")).unwrap()).unwrap();
    assert_eq!(report["audit_all_true"], true);
    assert!(report["first_violation"].is_null());
    assert_eq!(report["reference_decay_ok"], true);

    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[4] = "6";
    assert_eq!(code(&refgov(c.path(), &other)), 0);
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn zero_steps_write_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = refgov(dir.path(), &["run", "--problem", &cubic(), "--steps", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("k,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown flag and unsupported preset-only command.
    assert_eq!(code(&refgov(dir.path(), &["run", "--bogus"])), 2);
    assert_eq!(code(&refgov(dir.path(), &["calibrate-beta", "--problem", &cubic()])), 2);
    assert_eq!(code(&refgov(dir.path(), &["run", "--problem", &cubic(), "--beta", "1.5"])), 2);

    // Problem file with an unknown field.
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(data("scalar_cubic.json")).unwrap().replacen("\"p\"", "\"q\": 1, \"p\"", 1);
    std::fs::write(&bad, text).unwrap();
    let o = refgov(dir.path(), &["build-moas", "--problem", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains('q'));

    // Start state outside the admissible set.
    assert_eq!(code(&refgov(dir.path(), &["run", "--problem", &cubic(), "--x0", "0.9"])), 3);

    // Recursion stopped by the iteration cap.
    let o = refgov(dir.path(), &["build-moas", "--problem", &cubic(), "--iteration-cap", "2", "--no-cache"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn sweep_series_counts() {
    let dir = tempfile::tempdir().unwrap();
    let summary = |args: &[&str]| -> serde_json::Value {
        let o = refgov(dir.path(), args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.summary.json")).unwrap()).unwrap()
    };
    let s = summary(&["sweep", "--problem", &cubic(), "--steps", "20", "--theta-samples", "vertices"]);
    assert_eq!(s["samples"].as_array().unwrap().len(), 2);
    let s = summary(&["sweep", "--problem", &cubic(), "--steps", "20", "--theta-samples", "nominal"]);
    assert_eq!(s["samples"].as_array().unwrap().len(), 1);
    assert_eq!(s["samples"][0][0], 1.0);
    let s = summary(&["sweep", "--problem", &cubic(), "--steps", "20", "--theta-samples", "grid", "--per-axis", "3"]);
    assert_eq!(s["samples"].as_array().unwrap().len(), 5);

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    // 5 samples x 20 steps x 4 constraints, plus the header.
    assert_eq!(csv.lines().count(), 1 + 5 * 20 * 4);
}

#[test]
fn aircraft_sweep_has_eight_vertex_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = refgov(dir.path(), &["sweep", "--preset", "aircraft", "--beta", "0.99", "--steps", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.summary.json")).unwrap()).unwrap();
    assert_eq!(s["samples"].as_array().unwrap().len(), 8);
    let o = refgov(dir.path(), &["sweep", "--preset", "aircraft", "--beta", "0.99", "--steps", "10", "--theta-samples", "nominal"]);
    assert_eq!(code(&o), 0);
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.summary.json")).unwrap()).unwrap();
    assert_eq!(s["samples"].as_array().unwrap().len(), 1);
}

#[test]
fn config_file_and_environment_layering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"steps": 7}"#).unwrap();
    let run = |extra_env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_refgov"));
        cmd.args(["run", "--problem", &cubic(), "--config", cfg.to_str().unwrap(), "--out"])
            .arg(dir.path())
            .args(args)
            .env_remove("REFGOV_STEPS");
        if let Some(v) = extra_env {
            cmd.env("REFGOV_STEPS", v);
        }
        let o = cmd.output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap().lines().count() - 1
    };
    assert_eq!(run(None, &[]), 7);
    assert_eq!(run(Some("4"), &[]), 4);
    assert_eq!(run(Some("4"), &["--steps", "3"]), 3);
}

#[test]
fn problem_file_round_trips_through_the_spec() {
    for name in ["scalar_cubic.json", "scalar_cubic_disturbed.json", "oscillator_quadratic.json"] {
        let file = ProblemFile::load(&data(name)).unwrap();
        let spec = file.to_spec().unwrap();
        let again = ProblemFile::from_spec(&spec).unwrap();
        assert_eq!(ProblemFile::from_spec(&again.to_spec().unwrap()).unwrap(), again, "{name}");
        assert_eq!(ProblemFile::from_json(&again.to_json()).unwrap(), again, "{name}");
    }
}

#[test]
fn polytope_text_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&refgov(dir.path(), &["build-moas", "--problem", &cubic()])), 0);
    let text = std::fs::read_to_string(dir.path().join("moas.poly")).unwrap();
    let poly = polytope_io::read_polytope(text.as_bytes()).unwrap();
    assert_eq!(polytope_io::to_string(&poly), text);

    let truncated: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
    let err = polytope_io::read_polytope(truncated.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("end of file"), "{err}");
    let extra = format!("{text}junk\n");
    assert!(polytope_io::read_polytope(extra.as_bytes()).is_err());
}
