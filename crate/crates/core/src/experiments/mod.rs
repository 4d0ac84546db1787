//! Named, reproducible scenarios. Each one runs a family of computations,
//! turns every claim into a pass/fail [`SweepRecord`], and writes its
//! artifacts under `<out_dir>/<id>/`:
//!
//! - `metrics.csv` with columns `n,metric,value,tolerance,pass`
//! - `verdict.json`
//! - `data.csv` and `curve.svg` where the scenario has a table or a plot
//!
//! Numerical failures inside a scenario become a failed verdict with a
//! diagnostic; only an unknown id is an error.

mod random;
mod scenarios;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, polyline_svg, write_text, Curve};
use crate::radon::QuadratureConfig;

pub use random::{random_star_profile, FLOOR, HARMONICS};

/// Registered scenarios, in run order.
pub const SCENARIOS: [(&str, &str); 15] = [
    ("lemma1-psi-bounds", "psi of normalized convex bodies lies between 1/(x+1) and min(1, 1/x)"),
    ("lemma2-upper-bound", "convexity bound psi(sigma t) <= [1 + t(1/psi(sigma) - 1)]^-1"),
    ("lemma3-sigma-bounds", "(1/sigma_K) int psi_K^(n-1) stays in a dimension-free band"),
    ("lemma4-tail-cutoff", "tail of int psi_K(sigma_K t)^(n-1) dt beyond R decays like (1+R/n)^(2-n)"),
    ("thm31-uniform-power-type", "IK has equatorial power type 2 with uniformly bounded constant"),
    ("remark1-cone-n3", "double cone in dimension 3: modulus is o(eps) but not O(eps^2)"),
    ("remark2-star-unbounded", "two-cylinder unions: the quadratic constant grows without bound"),
    ("thm41-double-intersection", "distance from I^2 K to the ball decreases with dimension"),
    ("remark3-cylinder-not-ball", "distance from I(cylinder) to the ball stays above sqrt(2)(1 - pi/12)"),
    ("example1-cylindrical-ik", "capped cylinder, n = 4: psi_IK is constant near the equator"),
    ("example2-power-type-4", "Mod4 body, n = 4: closed-form IK with equatorial power type 4"),
    ("thm53-strict-convexity", "random star bodies, n = 5..7: IK is strictly convex at the equator"),
    ("thm56-origin-interior", "star bodies with the origin inside, n = 4: IK has power type 2"),
    ("busemann-convexity", "intersection bodies of convex bodies are convex"),
    ("equivariance", "I(TK) = |det T| (T*)^-1 IK for axial dilations"),
];

pub fn scenario_ids() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|s| s.0)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Base seed for the randomized scenarios.
    pub seed: u64,
    pub quadrature: QuadratureConfig,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20_170_301,
            quadrature: QuadratureConfig::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

/// One checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: Option<usize>,
    pub metric: String,
    pub value: f64,
    /// The threshold `value` is compared against; always positive.
    pub tolerance: f64,
    pub pass: bool,
}

/// Outcome of one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub records: Vec<SweepRecord>,
    pub diagnostics: Vec<String>,
    /// Files written, relative to the scenario directory.
    pub artifacts: Vec<String>,
}

impl Scenario {
    pub fn failed(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    id: &'a str,
    title: &'a str,
    pass: bool,
    checks: usize,
    failed: Vec<&'a str>,
    diagnostics: &'a [String],
    artifacts: &'a [String],
}

/// A plot title with labelled curves.
type Plot = (String, Vec<(String, Vec<(f64, f64)>)>);

/// Checks, notes, a data table and curves collected while a scenario runs.
#[derive(Default)]
pub(crate) struct Sheet {
    records: Vec<SweepRecord>,
    diagnostics: Vec<String>,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    plot: Option<Plot>,
}

impl Sheet {
    fn push(&mut self, n: Option<usize>, metric: String, value: f64, tolerance: f64, pass: bool) {
        debug_assert!(tolerance > 0.0, "tolerance of {metric} must be positive");
        self.records.push(SweepRecord {
            n,
            metric,
            value,
            tolerance,
            pass: pass && value.is_finite(),
        });
    }

    pub(crate) fn at_most(&mut self, n: Option<usize>, metric: impl Into<String>, value: f64, bound: f64) {
        self.push(n, metric.into(), value, bound, value <= bound);
    }

    pub(crate) fn at_least(&mut self, n: Option<usize>, metric: impl Into<String>, value: f64, bound: f64) {
        self.push(n, metric.into(), value, bound, value >= bound);
    }

    pub(crate) fn above(&mut self, n: Option<usize>, metric: impl Into<String>, value: f64, bound: f64) {
        self.push(n, metric.into(), value, bound, value > bound);
    }

    pub(crate) fn below(&mut self, n: Option<usize>, metric: impl Into<String>, value: f64, bound: f64) {
        self.push(n, metric.into(), value, bound, value < bound);
    }

    /// `lo <= value <= hi`, recorded as two checks.
    pub(crate) fn within(&mut self, n: Option<usize>, metric: &str, value: f64, lo: f64, hi: f64) {
        self.at_least(n, format!("{metric}>=lo"), value, lo);
        self.at_most(n, format!("{metric}<=hi"), value, hi);
    }

    pub(crate) fn note(&mut self, msg: impl Into<String>) {
        self.diagnostics.push(msg.into());
    }

    pub(crate) fn table(&mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) {
        self.table = Some((header, rows));
    }

    pub(crate) fn plot(&mut self, title: impl Into<String>, curves: Vec<(String, Vec<(f64, f64)>)>) {
        self.plot = Some((title.into(), curves));
    }
}

/// A numeric table cell.
pub(crate) fn num(v: f64) -> String {
    fmt_f64(v)
}

/// Run one scenario and write its artifacts.
pub fn run_scenario(id: &str, cfg: &ExperimentConfig) -> Result<Scenario> {
    let &(id, title) = SCENARIOS
        .iter()
        .find(|s| s.0 == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))?;
    cfg.quadrature.validate()?;
    let mut sheet = Sheet::default();
    if let Err(e) = scenarios::run(id, cfg, &mut sheet) {
        sheet.note(format!("aborted: {e}"));
    }
    let pass = sheet.diagnostics.iter().all(|d| !d.starts_with("aborted"))
        && !sheet.records.is_empty()
        && sheet.records.iter().all(|r| r.pass);
    let mut scenario = Scenario {
        id: id.to_string(),
        title: title.to_string(),
        pass,
        records: sheet.records,
        diagnostics: sheet.diagnostics,
        artifacts: Vec::new(),
    };
    let dir = cfg.out_dir.join(id);
    write_artifacts(&dir, &mut scenario, sheet.table, sheet.plot)?;
    Ok(scenario)
}

/// Run every registered scenario in order.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<Scenario>> {
    scenario_ids().map(|id| run_scenario(id, cfg)).collect()
}

fn write_artifacts(
    dir: &Path,
    scenario: &mut Scenario,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    plot: Option<Plot>,
) -> Result<()> {
    let metrics: Vec<Vec<String>> = scenario
        .records
        .iter()
        .map(|r| {
            vec![
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                r.metric.clone(),
                fmt_f64(r.value),
                fmt_f64(r.tolerance),
                r.pass.to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join("metrics.csv"), &["n", "metric", "value", "tolerance", "pass"], &metrics)?;
    scenario.artifacts.push("metrics.csv".into());
    if let Some((header, rows)) = table {
        write_csv(&dir.join("data.csv"), &header, &rows)?;
        scenario.artifacts.push("data.csv".into());
    }
    if let Some((title, curves)) = plot {
        let curves: Vec<Curve<'_>> = curves
            .iter()
            .map(|(label, points)| Curve { label, points })
            .collect();
        write_text(&dir.join("curve.svg"), &polyline_svg(&title, &curves))?;
        scenario.artifacts.push("curve.svg".into());
    }
    scenario.artifacts.push("verdict.json".into());
    let verdict = VerdictFile {
        id: &scenario.id,
        title: &scenario.title,
        pass: scenario.pass,
        checks: scenario.records.len(),
        failed: scenario.failed().map(|r| r.metric.as_str()).collect(),
        diagnostics: &scenario.diagnostics,
        artifacts: &scenario.artifacts,
    };
    let mut json = serde_json::to_string_pretty(&verdict)?;
    json.push('\n');
    write_text(&dir.join("verdict.json"), &json)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_text(path, &String::from_utf8(out).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique() {
        let mut ids: Vec<_> = scenario_ids().collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 15);
    }

    #[test]
    fn unknown_scenario_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        assert!(matches!(
            run_scenario("bogus", &cfg),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn sheet_checks() {
        let mut s = Sheet::default();
        s.at_most(None, "a", 1.0, 1.0);
        s.below(None, "b", 1.0, 1.0);
        s.above(Some(4), "c", f64::NAN, 1.0);
        s.within(None, "d", 2.0, 1.0, 3.0);
        let pass: Vec<bool> = s.records.iter().map(|r| r.pass).collect();
        assert_eq!(pass, [true, false, false, true, true]);
    }

    #[test]
    fn artifacts_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let s = run_scenario("lemma1-psi-bounds", &cfg).unwrap();
        assert!(s.pass, "{:?}", s.diagnostics);
        let d = dir.path().join("lemma1-psi-bounds");
        let metrics = std::fs::read_to_string(d.join("metrics.csv")).unwrap();
        assert!(metrics.starts_with("n,metric,value,tolerance,pass\n"));
        let verdict: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.join("verdict.json")).unwrap()).unwrap();
        assert_eq!(verdict["pass"], true);
        assert!(d.join("curve.svg").exists());
    }
}
