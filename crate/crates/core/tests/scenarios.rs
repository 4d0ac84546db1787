use std::fs;
use std::path::Path;

use revolve::experiments::{run_scenario, scenario_ids, ExperimentConfig};

fn config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        out_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

fn read(dir: &Path, id: &str, file: &str) -> Vec<u8> {
    fs::read(dir.join(id).join(file)).unwrap()
}

#[test]
fn reruns_write_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for id in ["lemma3-sigma-bounds", "thm53-strict-convexity", "remark2-star-unbounded"] {
        let sa = run_scenario(id, &config(a.path())).unwrap();
        let sb = run_scenario(id, &config(b.path())).unwrap();
        assert_eq!(sa.artifacts, sb.artifacts);
        for f in &sa.artifacts {
            assert_eq!(read(a.path(), id, f), read(b.path(), id, f), "{id}/{f}");
        }
    }
}

#[test]
fn seed_controls_random_profiles() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let id = "thm53-strict-convexity";
    run_scenario(id, &config(a.path())).unwrap();
    let cfg = ExperimentConfig {
        seed: 7,
        ..config(b.path())
    };
    let s = run_scenario(id, &cfg).unwrap();
    assert!(s.pass);
    assert_ne!(read(a.path(), id, "data.csv"), read(b.path(), id, "data.csv"));
}

#[test]
fn verdict_agrees_with_metrics() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["lemma1-psi-bounds", "remark1-cone-n3", "example1-cylindrical-ik"] {
        let s = run_scenario(id, &config(dir.path())).unwrap();
        let metrics = String::from_utf8(read(dir.path(), id, "metrics.csv")).unwrap();
        let mut rows = csv::Reader::from_reader(metrics.as_bytes());
        let mut count = 0;
        for rec in rows.records() {
            let rec = rec.unwrap();
            let tol: f64 = rec[3].parse().unwrap();
            assert!(tol > 0.0);
            assert_eq!(&rec[4], "true", "{id}: {}", &rec[1]);
            count += 1;
        }
        assert_eq!(count, s.records.len());
        let v: serde_json::Value = serde_json::from_slice(&read(dir.path(), id, "verdict.json")).unwrap();
        assert_eq!(v["id"], id);
        assert_eq!(v["pass"], true);
        assert_eq!(v["checks"], count);
    }
}

#[test]
fn errors_inside_a_scenario_become_a_failed_verdict() {
    let dir = tempfile::tempdir().unwrap();
    // Valid as a configuration, but too coarse for the equator analysis.
    let mut cfg = config(dir.path());
    cfg.quadrature.deriv_step = 0.6;
    let s = run_scenario("example1-cylindrical-ik", &cfg).unwrap();
    assert!(!s.pass);
    assert!(s.diagnostics.iter().any(|d| d.contains("step")), "{:?}", s.diagnostics);
    let v: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "example1-cylindrical-ik", "verdict.json")).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn invalid_config_is_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.quadrature.grid_size = 3;
    assert!(run_scenario("lemma1-psi-bounds", &cfg).is_err());
}

#[test]
fn registry_has_fifteen_scenarios() {
    assert_eq!(scenario_ids().count(), 15);
    assert!(scenario_ids().any(|id| id == "thm31-uniform-power-type"));
}
