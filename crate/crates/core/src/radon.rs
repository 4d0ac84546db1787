//! The intersection body operator on bodies of revolution.
//!
//! For a body `K` with meridian profile `rho` in `R^n`, the radial function of
//! `IK` at angle `theta` from the axis is (with the dimensional constant set
//! to one)
//!
//! ```text
//! rho_IK(theta) = int_0^{pi/2} rho(phi(u))^{n-1} cos(u)^{n-3} du,
//! cos phi(u)    = sin(theta) sin(u).
//! ```
//!
//! This is the spherical Radon transform of `rho^{n-1}` after the substitution
//! that removes the endpoint singularity of the weight
//! `(1 - cos^2 phi / sin^2 theta)^{(n-4)/2}`; the integrand is bounded for
//! every `n >= 3`. The equatorial function `psi_IK(x) = rho_IK(theta) sin theta`
//! with `x = cot theta` is also available through the independent
//! one-dimensional route [`psi_ik`].

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bodies::{uniform_grid, Interpolation, MeridianProfile, Radial, SampledProfile};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Adaptive, Estimate};

/// Which dimensional constant multiplies the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CnMode {
    /// `c_n := 1`; dilations do not affect convexity, so this is the default.
    One,
    /// The true `c_n`, giving `rho_IK(u) = |K ∩ u^⊥|`.
    True,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre order per panel.
    pub nodes: usize,
    /// Initial uniform panels on the integration interval.
    pub panels: usize,
    pub abs_tol: f64,
    /// Relative target on top of `abs_tol`; zero means absolute only.
    #[serde(default)]
    pub rel_tol: f64,
    /// Truncation point for tail diagnostics in the `x` domain.
    pub tail_cutoff: f64,
    /// Step for second derivatives in `theta`.
    pub deriv_step: f64,
    /// Angles sampled per operator application.
    pub grid_size: usize,
    pub cn_mode: CnMode,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 24,
            panels: 2,
            abs_tol: 1e-10,
            rel_tol: 0.0,
            tail_cutoff: 40.0,
            deriv_step: 1e-3,
            grid_size: 1024,
            cn_mode: CnMode::One,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return bad("nodes must be even and at least 16");
        }
        if self.panels < 1 {
            return bad("panels must be at least 1");
        }
        if !(self.abs_tol >= 0.0) {
            return bad("abs_tol must be nonnegative");
        }
        if !(self.rel_tol >= 0.0 && self.rel_tol < 1.0) {
            return bad("rel_tol must lie in [0, 1)");
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return bad("abs_tol and rel_tol cannot both be zero");
        }
        if !(self.tail_cutoff > 1.0) {
            return bad("tail cutoff must exceed 1");
        }
        if !(self.deriv_step > 0.0) {
            return bad("derivative step must be positive");
        }
        if self.grid_size < 64 {
            return bad("grid size must be at least 64");
        }
        Ok(())
    }

    /// Tolerances for analyses that difference or divide operator values
    /// near the equator.
    pub fn precise() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            ..Self::default()
        }
    }

    pub(crate) fn adaptive(&self) -> Adaptive {
        Adaptive {
            nodes: self.nodes,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            ..Adaptive::default()
        }
    }

    fn initial_breaks(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
        let p = self.panels;
        (1..p).map(move |k| lo + (hi - lo) * k as f64 / p as f64)
    }
}

/// `c_n` and `d_n` relating the operator to true section volumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstants {
    pub n: usize,
    pub c_n: f64,
    pub d_n: f64,
    pub use_true_cn: bool,
}

impl NormalizationConstants {
    pub fn new(n: usize, mode: CnMode) -> Self {
        let nf = n as f64;
        let c_n = (nf - 2.0) / (nf - 1.0)
            * 2.0
            * (PI.ln() * (nf / 2.0 - 1.0) - ln_gamma(nf / 2.0)).exp();
        let d_n = (nf - 1.0) / (nf - 2.0)
            * (nf / 2.0).sqrt()
            * (ln_gamma(nf / 2.0) - ln_gamma((nf + 1.0) / 2.0)).exp();
        Self {
            n,
            c_n,
            d_n,
            use_true_cn: mode == CnMode::True,
        }
    }

    /// The factor actually applied to operator outputs.
    pub fn factor(&self) -> f64 {
        if self.use_true_cn {
            self.c_n
        } else {
            1.0
        }
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if !(3..=100_000).contains(&n) {
        return Err(Error::InvalidParameter(format!("dimension must be >= 3, got {n}")));
    }
    Ok(())
}

fn check_nondegenerate(profile: &MeridianProfile) -> Result<()> {
    let eq = profile.radial(FRAC_PI_2);
    if !(eq > 0.0 && eq.is_finite()) {
        return Err(Error::Degenerate(format!("rho(pi/2) = {eq}")));
    }
    Ok(())
}

/// `rho_IK(theta)` together with the quadrature error estimate.
pub fn ik_radial_estimate(
    profile: &MeridianProfile,
    n: usize,
    theta: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    check_dimension(n)?;
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("angle must be finite, got {theta}")));
    }
    let (s, c) = crate::bodies::reflect(theta).sin_cos();
    let pow_rho = (n - 1) as i32;
    let pow_cos = (n - 3) as i32;
    let f = |u: f64| {
        let (su, cu) = u.sin_cos();
        profile.radial_dir(s * su, c.hypot(s * cu)).powi(pow_rho) * cu.powi(pow_cos)
    };
    let mut breaks: Vec<f64> = cfg.initial_breaks(0.0, FRAC_PI_2).collect();
    for k in profile.kinks() {
        let ck = k.cos();
        if ck < s {
            breaks.push((ck / s).asin());
        }
    }
    breaks.extend(concentration_seeds(n));
    let mut est = integrate(f, 0.0, FRAC_PI_2, &breaks, &cfg.adaptive())?;
    let factor = NormalizationConstants::new(n, cfg.cn_mode).factor();
    est.value *= factor;
    est.error *= factor;
    Ok(est)
}

/// Panel seeds on the `1/sqrt(n)` scale where `cos(u)^{n-3}` concentrates.
fn concentration_seeds(n: usize) -> impl Iterator<Item = f64> {
    let scale = 1.0 / (n as f64).sqrt();
    [0.5, 1.0, 2.0, 4.0]
        .into_iter()
        .map(move |m| m * scale)
        .filter(move |&u| n >= 8 && u < FRAC_PI_2)
}

/// `rho_IK(theta)` for `theta` in `[0, pi/2]` (other angles are reflected).
pub fn ik_radial(profile: &MeridianProfile, n: usize, theta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(ik_radial_estimate(profile, n, theta, cfg)?.value)
}

/// `rho_IK(0) = d_n sqrt(pi/(2n)) rho(pi/2)^{n-1}`, the volume of the
/// equatorial section.
pub fn ik_axis(profile: &MeridianProfile, n: usize, mode: CnMode) -> Result<f64> {
    check_dimension(n)?;
    let nc = NormalizationConstants::new(n, mode);
    let eq = profile.radial(FRAC_PI_2);
    Ok(nc.factor() * nc.d_n * (PI / (2.0 * n as f64)).sqrt() * eq.powi((n - 1) as i32))
}

/// `psi_IK(x) = rho_IK(theta) sin(theta)`, `x = cot(theta)`, computed in the
/// `x` domain from `psi_K`:
///
/// ```text
/// psi_IK(0) = int_0^inf psi_K(t)^{n-1} dt
/// psi_IK(x) = int_0^{1/x} psi_K(t)^{n-1} (1 - x^2 t^2)^{(n-4)/2} dt
/// ```
///
/// The improper integral at `x = 0` becomes `int_0^{pi/2} rho^{n-1} sin^{n-3}`
/// via `t = cot(phi)`; for `x > 0`, `t = sin(v)/x` absorbs the endpoint weight.
pub fn psi_ik(profile: &MeridianProfile, n: usize, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(psi_ik_estimate(profile, n, x, cfg)?.value)
}

pub fn psi_ik_estimate(
    profile: &MeridianProfile,
    n: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    check_dimension(n)?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be finite, got {x}")));
    }
    let x = x.abs();
    let pow_rho = (n - 1) as i32;
    let pow_w = (n - 3) as i32;
    let kinks = profile.kinks();
    let mut est = if x == 0.0 {
        let f = |phi: f64| profile.radial(phi).powi(pow_rho) * phi.sin().powi(pow_w);
        let mut breaks: Vec<f64> = cfg.initial_breaks(0.0, FRAC_PI_2).collect();
        breaks.extend(kinks);
        breaks.extend(concentration_seeds(n).map(|u| FRAC_PI_2 - u));
        integrate(f, 0.0, FRAC_PI_2, &breaks, &cfg.adaptive())?
    } else {
        let f = |v: f64| {
            let (sv, cv) = v.sin_cos();
            profile.psi(sv / x).powi(pow_rho) * cv.powi(pow_w)
        };
        let mut breaks: Vec<f64> = cfg.initial_breaks(0.0, FRAC_PI_2).collect();
        for k in kinks {
            let t = k.cos() / k.sin();
            if x * t < 1.0 {
                breaks.push((x * t).asin());
            }
        }
        for m in [0.25, 1.0, 4.0] {
            if x * m < 1.0 {
                breaks.push((x * m).asin());
            }
        }
        let mut e = integrate(f, 0.0, FRAC_PI_2, &breaks, &cfg.adaptive())?;
        e.value /= x;
        e.error /= x;
        e
    };
    let factor = NormalizationConstants::new(n, cfg.cn_mode).factor();
    est.value *= factor;
    est.error *= factor;
    Ok(est)
}

/// `IK` sampled on a uniform angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorResult {
    pub profile: SampledProfile,
    pub n: usize,
    pub config: QuadratureConfig,
    /// Largest per-angle quadrature error estimate.
    pub err_est: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct OperatorRecord {
    n: usize,
    cn_mode: CnMode,
    theta: Vec<f64>,
    rho: Vec<f64>,
    err_est: f64,
}

impl OperatorResult {
    /// The profile rescaled so that `rho(pi/2) = 1`.
    pub fn normalized(&self) -> Result<SampledProfile> {
        let eq = *self.profile.rho().last().unwrap();
        self.profile.scaled(1.0 / eq)
    }

    pub fn equator(&self) -> f64 {
        *self.profile.rho().last().unwrap()
    }

    pub fn axis(&self) -> f64 {
        self.profile.rho()[0]
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = OperatorRecord {
            n: self.n,
            cn_mode: self.config.cn_mode,
            theta: self.profile.theta().to_vec(),
            rho: self.profile.rho().to_vec(),
            err_est: self.err_est,
        };
        Ok(serde_json::to_string(&rec)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: OperatorRecord = serde_json::from_str(text)?;
        let config = QuadratureConfig {
            cn_mode: rec.cn_mode,
            grid_size: rec.theta.len().max(64),
            ..QuadratureConfig::default()
        };
        Ok(Self {
            profile: SampledProfile::new(rec.theta, rec.rho, Interpolation::MonotoneCubic)?,
            n: rec.n,
            config,
            err_est: rec.err_est,
        })
    }
}

/// Sample `rho_IK` on `cfg.grid_size` uniform angles (axis value from the
/// closed form), in parallel over the grid.
pub fn intersection_body(profile: &MeridianProfile, n: usize, cfg: &QuadratureConfig) -> Result<OperatorResult> {
    cfg.validate()?;
    check_dimension(n)?;
    check_nondegenerate(profile)?;
    let theta = uniform_grid(cfg.grid_size);
    let values: Vec<(f64, f64)> = theta
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == 0 {
                Ok((ik_axis(profile, n, cfg.cn_mode)?, 0.0))
            } else {
                let e = ik_radial_estimate(profile, n, t, cfg)?;
                Ok((e.value, e.error))
            }
        })
        .collect::<Result<_>>()?;
    let err_est = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let rho = values.into_iter().map(|v| v.0).collect();
    Ok(OperatorResult {
        profile: SampledProfile::new(theta, rho, Interpolation::MonotoneCubic)?,
        n,
        config: *cfg,
        err_est,
    })
}

pub const MAX_ITERATIONS: usize = 16;

/// Apply the operator `m` times. Each step acts on the previous output
/// rescaled to `rho(pi/2) = 1`; the returned results are the raw outputs of
/// every step.
pub fn iterate_intersection(
    profile: &MeridianProfile,
    n: usize,
    m: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<OperatorResult>> {
    if !(1..=MAX_ITERATIONS).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "iterations must be in 1..={MAX_ITERATIONS}, got {m}"
        )));
    }
    let mut out: Vec<OperatorResult> = Vec::with_capacity(m);
    let mut current = profile.clone();
    for _ in 0..m {
        let res = intersection_body(&current, n, cfg)?;
        current = MeridianProfile::Sampled(res.normalized()?);
        out.push(res);
    }
    Ok(out)
}

/// `IK` evaluated on demand by quadrature at every requested angle.
///
/// Analyses near the equator (second derivatives, moduli of order `1e-12`)
/// need the operator to full quadrature accuracy rather than through an
/// interpolated grid.
#[derive(Debug, Clone)]
pub struct LazyIntersection {
    base: MeridianProfile,
    n: usize,
    config: QuadratureConfig,
}

impl LazyIntersection {
    pub fn new(base: MeridianProfile, n: usize, config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        check_dimension(n)?;
        check_nondegenerate(&base)?;
        Ok(Self { base, n, config })
    }

    pub fn base(&self) -> &MeridianProfile {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl Radial for LazyIntersection {
    fn eval(&self, theta: f64) -> Result<f64> {
        ik_radial(&self.base, self.n, theta, &self.config)
    }
}
