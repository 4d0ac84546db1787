//! Command-line front end.
//!
//! ```text
//! revolve eval      --body SPEC --what rho|psi [--grid N] [--xmax X] [--format csv|json] [--out DIR]
//! revolve intersect --body SPEC --n N [--iters M] [--grid N] [--tol T] [--true-cn] [--out DIR]
//! revolve analyze   --body SPEC [--n N] --analysis power-type|equator|bm-ball [--raw] [--format json|csv]
//! revolve reproduce ID|all [--seed S] [--grid N] [--tol T] [--out DIR]
//! ```
//!
//! Exit status: 0 success, 2 usage or parse error, 3 operator failure,
//! 4 analysis failure (including failed scenarios).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{bm_ball, default_eps_grid, equator_convexity, power_type_fit, TOL_FLAT};
use crate::bodies::{uniform_grid, BodySpec, MeridianProfile, Radial};
use crate::error::Error;
use crate::experiments::{run_scenario, scenario_ids, ExperimentConfig, Scenario};
use crate::io::{ensure_dir, fmt_f64, write_text};
use crate::radon::{iterate_intersection, CnMode, LazyIntersection, QuadratureConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_OPERATOR: i32 = 3;
pub const EXIT_ANALYSIS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "revolve", version, about = "Intersection bodies of symmetric bodies of revolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate rho(theta) or psi(x) of a body.
    Eval(EvalArgs),
    /// Apply the intersection-body operator one or more times.
    Intersect(IntersectArgs),
    /// Run an equatorial analysis on IK (or on K with --raw).
    Analyze(AnalyzeArgs),
    /// Run registered scenarios and print a pass/fail table.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Rho,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnalysisKind {
    PowerType,
    Equator,
    BmBall,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = "REVOLVE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    body: String,
    #[arg(long, value_enum, default_value = "rho")]
    what: What,
    /// Number of sample points.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Right end of the x range for psi.
    #[arg(long, default_value_t = 5.0)]
    xmax: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct QuadArgs {
    /// Angles per operator application.
    #[arg(long)]
    grid: Option<usize>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl QuadArgs {
    fn apply(&self, mut q: QuadratureConfig) -> Result<QuadratureConfig, Error> {
        if let Some(g) = self.grid {
            q.grid_size = g;
        }
        if let Some(t) = self.tol {
            q.abs_tol = t;
        }
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Args)]
struct IntersectArgs {
    #[arg(long)]
    body: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    iters: usize,
    /// Use the true c_n, so that rho_IK(u) is the section volume.
    #[arg(long)]
    true_cn: bool,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    body: String,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, value_enum)]
    analysis: AnalysisKind,
    /// Analyse the body itself instead of its intersection body.
    #[arg(long)]
    raw: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// A scenario id, or `all`.
    scenario: String,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutArg,
}

/// A failure with its exit status.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    /// Numerical failures of the operator get their own status; anything
    /// else raised during a computation counts as `otherwise`.
    fn classify(e: Error, otherwise: i32) -> Self {
        let code = if e.is_numeric() { EXIT_OPERATOR } else { otherwise };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock())
}

/// Parse `args` (including the program name) and dispatch, writing reports
/// to `stdout`. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Eval(a) => eval(a, stdout),
        Command::Intersect(a) => intersect(a, stdout),
        Command::Analyze(a) => analyze(a, stdout),
        Command::Reproduce(a) => reproduce(a, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("revolve: {}", f.message);
            f.code
        }
    }
}

fn parse_body(spec: &str) -> Result<MeridianProfile, Failure> {
    let spec: BodySpec = spec.parse().map_err(Failure::usage)?;
    spec.to_profile().map_err(Failure::usage)
}

fn out_dir(arg: &OutArg) -> PathBuf {
    arg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Outcome {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure::classify(Error::io("<stdout>", e), EXIT_USAGE))
}

fn columns_csv(header: [&str; 2], a: &[f64], b: &[f64]) -> String {
    let mut s = format!("{},{}\n", header[0], header[1]);
    for (x, y) in a.iter().zip(b) {
        s.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*y)));
    }
    s
}

fn eval(a: EvalArgs, stdout: &mut dyn Write) -> Outcome {
    let body = parse_body(&a.body)?;
    if a.grid < 2 {
        return Err(Failure::usage("--grid must be at least 2"));
    }
    if !(a.xmax > 0.0 && a.xmax.is_finite()) {
        return Err(Failure::usage("--xmax must be positive"));
    }
    let (header, xs, ys) = match a.what {
        What::Rho => {
            let theta = uniform_grid(a.grid);
            let rho: Vec<f64> = theta.iter().map(|&t| body.radial(t)).collect();
            (["theta", "rho"], theta, rho)
        }
        What::Psi => {
            let xs: Vec<f64> = (0..a.grid)
                .map(|i| a.xmax * i as f64 / (a.grid - 1) as f64)
                .collect();
            let psi: Vec<f64> = xs.iter().map(|&x| body.psi(x)).collect();
            (["x", "psi"], xs, psi)
        }
    };
    let text = match a.format {
        Format::Csv => columns_csv(header, &xs, &ys),
        Format::Json => {
            let mut map = serde_json::Map::new();
            map.insert(header[0].into(), xs.into());
            map.insert(header[1].into(), ys.into());
            serde_json::Value::Object(map).to_string() + "\n"
        }
    };
    if a.out.out.is_some() {
        let ext = if a.format == Format::Csv { "csv" } else { "json" };
        let path = out_dir(&a.out).join(format!("eval-{}.{ext}", header[1]));
        write_text(&path, &text).map_err(|e| Failure::classify(e, EXIT_USAGE))?;
        emit(stdout, &format!("{}\n", path.display()))
    } else {
        emit(stdout, &text)
    }
}

fn intersect(a: IntersectArgs, stdout: &mut dyn Write) -> Outcome {
    let body = parse_body(&a.body)?;
    if a.n < 3 {
        return Err(Failure::usage(format!("--n must be at least 3, got {}", a.n)));
    }
    if a.iters < 1 {
        return Err(Failure::usage("--iters must be at least 1"));
    }
    let mut q = a.quad.apply(QuadratureConfig::default()).map_err(Failure::usage)?;
    if a.true_cn {
        q.cn_mode = CnMode::True;
    }
    let steps = iterate_intersection(&body, a.n, a.iters, &q).map_err(|e| Failure::classify(e, EXIT_OPERATOR))?;
    let dir = out_dir(&a.out).join("intersect");
    ensure_dir(&dir).map_err(|e| Failure::classify(e, EXIT_USAGE))?;
    let io = |e| Failure::classify(e, EXIT_USAGE);
    let theta = steps[0].profile.theta();
    let mut csv = String::from("theta");
    for k in 1..=steps.len() {
        csv.push_str(&format!(",rho_{k}"));
    }
    csv.push('\n');
    for (i, t) in theta.iter().enumerate() {
        csv.push_str(&fmt_f64(*t));
        for s in &steps {
            csv.push(',');
            csv.push_str(&fmt_f64(s.profile.rho()[i]));
        }
        csv.push('\n');
    }
    write_text(&dir.join("profiles.csv"), &csv).map_err(io)?;
    for (k, s) in steps.iter().enumerate() {
        let path = dir.join(format!("step-{}.json", k + 1));
        write_text(&path, &(s.to_json().map_err(io)? + "\n")).map_err(io)?;
        emit(
            stdout,
            &format!(
                "step {}: rho(0) = {}, rho(pi/2) = {}, psi(0) = {}, err_est = {:e}\n",
                k + 1,
                fmt_f64(s.axis()),
                fmt_f64(s.equator()),
                fmt_f64(s.equator()),
                s.err_est
            ),
        )?;
    }
    emit(stdout, &format!("wrote {}\n", dir.display()))
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    body: String,
    n: Option<usize>,
    raw: bool,
    #[serde(flatten)]
    result: T,
}

fn analyze(a: AnalyzeArgs, stdout: &mut dyn Write) -> Outcome {
    let body = parse_body(&a.body)?;
    if !a.raw && a.n < 3 {
        return Err(Failure::usage(format!("--n must be at least 3, got {}", a.n)));
    }
    let q = a.quad.apply(QuadratureConfig::precise()).map_err(Failure::usage)?;
    let target: Box<dyn Radial> = if a.raw {
        Box::new(body)
    } else {
        Box::new(LazyIntersection::new(body, a.n, q).map_err(|e| Failure::classify(e, EXIT_OPERATOR))?)
    };
    let fail = |e| Failure::classify(e, EXIT_ANALYSIS);
    let value = match a.analysis {
        AnalysisKind::PowerType => serde_json::to_value(power_type_fit(&*target, &default_eps_grid()).map_err(fail)?),
        AnalysisKind::Equator => serde_json::to_value(equator_convexity(&*target, q.deriv_step, TOL_FLAT).map_err(fail)?),
        AnalysisKind::BmBall => serde_json::to_value(bm_ball(&*target).map_err(fail)?),
    }
    .map_err(|e| Failure::classify(e.into(), EXIT_ANALYSIS))?;
    let report = Report {
        body: a.body.clone(),
        n: (!a.raw).then_some(a.n),
        raw: a.raw,
        result: value,
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| Failure::classify(e.into(), EXIT_ANALYSIS))? + "\n",
        Format::Csv => report_csv(&report),
    };
    emit(stdout, &text)
}

/// Scalar fields of a report as a two-line CSV; array fields are skipped.
fn report_csv(report: &Report<serde_json::Value>) -> String {
    let mut keys = vec!["body".to_string(), "n".to_string(), "raw".to_string()];
    let mut vals = vec![
        report.body.clone(),
        report.n.map(|n| n.to_string()).unwrap_or_default(),
        report.raw.to_string(),
    ];
    if let serde_json::Value::Object(m) = &report.result {
        for (k, v) in m {
            let cell = match v {
                serde_json::Value::Number(x) => x.as_f64().map(fmt_f64).unwrap_or_else(|| x.to_string()),
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => continue,
            };
            keys.push(k.clone());
            vals.push(cell);
        }
    }
    format!("{}\n{}\n", keys.join(","), vals.join(","))
}

fn reproduce(a: ReproduceArgs, stdout: &mut dyn Write) -> Outcome {
    let ids: Vec<&str> = if a.scenario == "all" {
        scenario_ids().collect()
    } else if let Some(id) = scenario_ids().find(|id| *id == a.scenario) {
        vec![id]
    } else {
        return Err(Failure::usage(Error::UnknownScenario(a.scenario.clone())));
    };
    let mut cfg = ExperimentConfig {
        out_dir: out_dir(&a.out),
        ..Default::default()
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.quadrature = a.quad.apply(cfg.quadrature).map_err(Failure::usage)?;
    let mut all_pass = true;
    emit(stdout, &format!("{:<28} {:<6} {:>7} {:>7}\n", "scenario", "result", "checks", "failed"))?;
    for id in ids {
        let s: Scenario = run_scenario(id, &cfg).map_err(|e| Failure::classify(e, EXIT_USAGE))?;
        all_pass &= s.pass;
        emit(
            stdout,
            &format!(
                "{:<28} {:<6} {:>7} {:>7}\n",
                s.id,
                if s.pass { "PASS" } else { "FAIL" },
                s.records.len(),
                s.failed().count()
            ),
        )?;
        for d in &s.diagnostics {
            emit(stdout, &format!("    {d}\n"))?;
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_ANALYSIS,
            message: "some scenarios failed".into(),
        })
    }
}
