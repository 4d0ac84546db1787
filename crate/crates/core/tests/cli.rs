use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn revolve(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revolve"))
        .args(args)
        .env("REVOLVE_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn eval_ball_psi_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["eval", "--body", "ball", "--what", "psi", "--xmax", "3"], dir.path());
    assert!(o.status.success());
    // REVOLVE_OUT is set, so the table goes to a file.
    let path = stdout(&o).trim().to_string();
    let (header, rows) = table(&fs::read_to_string(path).unwrap());
    assert_eq!(header, ["x", "psi"]);
    assert_eq!(rows.last().unwrap()[0], 3.0);
    for r in rows {
        assert!((r[1] - 1.0 / (1.0 + r[0] * r[0]).sqrt()).abs() < 1e-15);
    }
}

#[test]
fn eval_to_stdout_without_output_dir() {
    let o = Command::new(env!("CARGO_BIN_EXE_revolve"))
        .args(["eval", "--body", "segment:1,1", "--what", "psi"])
        .env_remove("REVOLVE_OUT")
        .output()
        .unwrap();
    assert!(o.status.success());
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header, ["x", "psi"]);
    assert_eq!(rows.len(), 101);
    for r in rows {
        assert!((r[1] - 1.0 / (r[0] + 1.0)).abs() < 1e-15);
    }
}

#[test]
fn eval_cylinder_rho_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["eval", "--body", "cylinder", "--what", "rho", "--grid", "257"], dir.path());
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("eval-rho.csv")).unwrap();
    let (header, rows) = table(&text);
    assert_eq!(header, ["theta", "rho"]);
    let body = revolve::bodies::MeridianProfile::Catalog(revolve::bodies::Catalog::Cylinder);
    for r in rows {
        assert_eq!(r[1].to_bits(), body.radial(r[0]).to_bits());
        assert!((r[1] - (1.0 / r[0].cos()).min(1.0 / r[0].sin())).abs() < 1e-14);
    }
}

#[test]
fn intersect_ball_gives_constant_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["intersect", "--body", "ball", "--n", "6", "--iters", "2", "--grid", "128"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = dir.path().join("intersect");
    let (header, rows) = table(&fs::read_to_string(d.join("profiles.csv")).unwrap());
    assert_eq!(header, ["theta", "rho_1", "rho_2"]);
    for col in 1..=2 {
        let first = rows[0][col];
        for r in &rows {
            assert!((r[col] / first - 1.0).abs() < 1e-10);
        }
    }
    for step in 1..=2 {
        let text = fs::read_to_string(d.join(format!("step-{step}.json"))).unwrap();
        let back = revolve::radon::OperatorResult::from_json(&text).unwrap();
        assert_eq!(back.n, 6);
        assert_eq!(back.profile.len(), 128);
    }
}

#[test]
fn intersect_cone_n3_reports_psi_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["intersect", "--body", "cone", "--n", "3", "--iters", "1", "--grid", "64"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let psi0: f64 = text
        .split("psi(0) = ")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((psi0 - 1.0).abs() < 1e-8, "{text}");
}

#[test]
fn intersect_cylinder_equator_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["intersect", "--body", "cylinder", "--n", "4"], dir.path());
    assert!(o.status.success());
    let (_, rows) = table(&fs::read_to_string(dir.path().join("intersect/profiles.csv")).unwrap());
    let last = rows.last().unwrap();
    assert_eq!(last[0], std::f64::consts::FRAC_PI_2);
    assert!((last[1] - 1.5).abs() < 1e-8);
}

#[test]
fn intersect_operator_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zigzag.csv");
    let m = 60_001;
    let mut text = String::from("theta,rho\n");
    for i in 0..m {
        let t = std::f64::consts::FRAC_PI_2 * i as f64 / (m - 1) as f64;
        text.push_str(&format!("{t},{}\n", 1.0 + 0.5 * (i % 2) as f64));
    }
    fs::write(&path, text).unwrap();
    let spec = format!("file:{}", path.display());
    let o = revolve(&["intersect", "--body", &spec, "--n", "5", "--grid", "64"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["eval", "--body", "dodecahedron"][..],
        &["eval", "--body", "segment:1"],
        &["intersect", "--body", "ball", "--n", "2"],
        &["intersect", "--body", "ball", "--n", "4", "--tol", "-1"],
        &["analyze", "--body", "ball", "--analysis", "volume"],
        &["reproduce", "bogus"],
        &["eval", "--body", "file:/nonexistent/profile.csv"],
    ] {
        let o = revolve(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

fn report(args: &[&str]) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn analyze_raw_pball_power_type() {
    let v = report(&["analyze", "--body", "pball:3", "--raw", "--analysis", "power-type"]);
    let p = v["p"].as_f64().unwrap();
    assert!((p - 3.0).abs() < 0.05, "{p}");
    assert_eq!(v["raw"], true);
}

#[test]
fn analyze_ball_bm_distance() {
    let v = report(&["analyze", "--body", "ball", "--analysis", "bm-ball", "--n", "5"]);
    assert!((v["distance"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn analyze_mod4_power_type() {
    let v = report(&["analyze", "--body", "mod4", "--n", "4", "--analysis", "power-type"]);
    let p = v["p"].as_f64().unwrap();
    assert!((3.9..=4.1).contains(&p), "{p}");
}

#[test]
fn analyze_equator_verdicts() {
    let v = report(&["analyze", "--body", "cone", "--n", "5", "--analysis", "equator"]);
    assert_eq!(v["verdict"], "strictly-convex");
    let v = report(&["analyze", "--body", "capped:0.3", "--n", "4", "--analysis", "equator"]);
    assert_eq!(v["verdict"], "locally-convex-flat");
}

#[test]
fn analyze_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["analyze", "--body", "capped:0.3", "--raw", "--analysis", "bm-ball"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn reproduce_single_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["reproduce", "remark1-cone-n3"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("remark1-cone-n3") && l.contains("PASS")), "{text}");
    assert!(dir.path().join("remark1-cone-n3/verdict.json").exists());
}

#[test]
fn reproduce_all_prints_fifteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = revolve(&["reproduce", "all"], dir.path());
    let text = stdout(&o);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.contains(" PASS ") || l.contains(" FAIL "))
        .collect();
    assert_eq!(rows.len(), 15, "{text}");
    assert!(o.status.success(), "{text}");
}

#[test]
fn out_flag_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = revolve(
        &["reproduce", "lemma2-upper-bound", "--out", flag_dir.path().to_str().unwrap()],
        env_dir.path(),
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("lemma2-upper-bound/metrics.csv").exists());
    assert!(!env_dir.path().join("lemma2-upper-bound").exists());
}
