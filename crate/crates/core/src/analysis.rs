//! Equatorial convexity of bodies of revolution: the modulus of convexity at
//! the equator, its power type, the local convexity test at `theta = pi/2`,
//! and the distance to the ball within axial dilations.
//!
//! Everything here works on any [`Radial`], so the same code analyses a
//! catalog body, a sampled operator output, or an intersection body evaluated
//! on demand by quadrature ([`crate::radon::LazyIntersection`]).

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{MeridianProfile, Radial};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::radon::{LazyIntersection, QuadratureConfig};

/// Margin band separating "flat" from "strictly convex" at the equator.
pub const TOL_FLAT: f64 = 1e-6;

/// The boundary point where the axial displacement equals `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquatorPoint {
    pub theta: f64,
    /// `pi/2 - theta`, kept separately to avoid cancellation.
    pub offset: f64,
    pub delta: f64,
}

/// `delta^e(eps) = (rho(pi/2) - rho(theta) sin theta) / rho(pi/2)` where
/// `eps = rho(theta) cos(theta) / rho(0)`.
pub fn modulus_equator<R: Radial + ?Sized>(body: &R, eps: f64) -> Result<f64> {
    Ok(equator_point(body, eps)?.delta)
}

/// Solve the `eps` equation for the largest root `theta` in `[0, pi/2)`.
pub fn equator_point<R: Radial + ?Sized>(body: &R, eps: f64) -> Result<EquatorPoint> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    let axis = body.eval(0.0)?;
    if !(axis > 0.0) {
        return Err(Error::InvalidProfile(format!("rho(0) must be positive, got {axis}")));
    }
    let eq = body.eval(FRAC_PI_2)?;
    // In the offset d = pi/2 - theta the equation reads rho(pi/2 - d) sin(d) = eps rho(0).
    let g = |d: f64| -> Result<f64> { Ok(body.eval(FRAC_PI_2 - d)? * d.sin() / axis - eps) };
    let point = |d: f64| -> Result<EquatorPoint> {
        let r = body.eval(FRAC_PI_2 - d)?;
        Ok(EquatorPoint {
            theta: FRAC_PI_2 - d,
            offset: d,
            delta: (eq - r * d.cos()) / eq,
        })
    };

    // Smallest offset root: scan outward from the equator in geometric steps.
    const OCTAVES: i32 = 52;
    const SUB: usize = 4;
    let mut lo = 0.0;
    let mut bracket = None;
    'scan: for k in (0..OCTAVES).rev() {
        let a = FRAC_PI_2 * 0.5f64.powi(k + 1);
        for j in 1..=SUB {
            let d = a + a * j as f64 / SUB as f64;
            if g(d)? >= 0.0 {
                bracket = Some((lo, d));
                break 'scan;
            }
            lo = d;
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Err(Error::NoRoot { eps });
    };
    if eps == 1.0 && hi == FRAC_PI_2 {
        // The axis itself; bisection against sin(d) = 1 is ill-conditioned here.
        return point(FRAC_PI_2);
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    point(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTypeFit {
    pub p: f64,
    /// `delta^e(eps_min) / eps_min^p`.
    pub c: f64,
    pub residual: f64,
    pub eps_grid: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Eight log-spaced values from `1e-1` down to `1e-3`.
pub fn default_eps_grid() -> Vec<f64> {
    log_grid(1e-1, 1e-3, 8)
}

/// `count` log-spaced values from `start` to `end` inclusive.
pub fn log_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    let (a, b) = (start.ln(), end.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                end
            } else if i == 0 {
                start
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

fn check_eps_grid(eps: &[f64]) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidParameter(format!("eps grid: {m}")));
    if eps.len() < 6 {
        return bad("need at least 6 points");
    }
    if eps.iter().any(|&e| !(e > 1e-4 && e <= 1e-1)) {
        return bad("values must lie in (1e-4, 1e-1]");
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return bad("values must be strictly decreasing");
    }
    let r0 = (eps[1] / eps[0]).ln();
    if eps.windows(2).any(|w| ((w[1] / w[0]).ln() - r0).abs() > 1e-6 * r0.abs()) {
        return bad("values must be log-spaced");
    }
    Ok(())
}

/// Least-squares slope of `log delta^e` against `log eps`.
pub fn power_type_fit<R: Radial + ?Sized>(body: &R, eps_grid: &[f64]) -> Result<PowerTypeFit> {
    check_eps_grid(eps_grid)?;
    let delta: Vec<f64> = eps_grid
        .par_iter()
        .map(|&e| modulus_equator(body, e))
        .collect::<Result<_>>()?;
    if let Some((&eps, _)) = eps_grid.iter().zip(&delta).find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::FlatEquator { eps });
    }
    let lx: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = delta.iter().map(|d| d.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let p = sxy / sxx;
    let last = eps_grid.len() - 1;
    let c = delta[last] / eps_grid[last].powf(p);
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - (c.ln() + p * x)).abs())
        .fold(0.0, f64::max);
    if !(p.is_finite() && c.is_finite()) {
        return Err(Error::Degenerate(format!("power-type fit produced p = {p}, c = {c}")));
    }
    Ok(PowerTypeFit {
        p,
        c,
        residual,
        eps_grid: eps_grid.to_vec(),
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrictlyConvex,
    LocallyConvexFlat,
    NonConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquatorConvexityReport {
    pub rho_eq: f64,
    pub rho_pp: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub step: f64,
}

/// Local convexity at the equator from `rho(pi/2) - rho''(pi/2)`.
///
/// `rho''` is a central second difference (the profile is even about
/// `pi/2`) extrapolated from steps `h` and `h/2`.
pub fn equator_convexity<R: Radial + ?Sized>(body: &R, step: f64, tol_flat: f64) -> Result<EquatorConvexityReport> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidParameter(format!("step must lie in (0, 0.5), got {step}")));
    }
    let eq = body.eval(FRAC_PI_2)?;
    let second = |h: f64| -> Result<f64> { Ok(2.0 * (body.eval(FRAC_PI_2 - h)? - eq) / (h * h)) };
    let coarse = second(step)?;
    let fine = second(0.5 * step)?;
    let rho_pp = (4.0 * fine - coarse) / 3.0;
    let margin = eq - rho_pp;
    let verdict = if margin > tol_flat {
        Verdict::StrictlyConvex
    } else if margin >= -tol_flat {
        Verdict::LocallyConvexFlat
    } else {
        Verdict::NonConvex
    };
    Ok(EquatorConvexityReport {
        rho_eq: eq,
        rho_pp,
        margin,
        verdict,
        step,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BMResult {
    pub distance: f64,
    pub s_opt: f64,
    #[serde(skip)]
    pub ratio_curve: Vec<(f64, f64)>,
}

impl BMResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

const BM_SAMPLES: usize = 4096;
const BM_COARSE: usize = 64;
const LOG_S_RANGE: f64 = 4.0;

/// Smallest ratio `max rho_s / min rho_s` over axial dilations
/// `diag(s, 1, ..., 1)`, an upper bound for the Banach–Mazur distance to the
/// ball.
pub fn bm_ball<R: Radial + ?Sized>(body: &R) -> Result<BMResult> {
    let mut theta: Vec<f64> = (0..BM_SAMPLES)
        .map(|i| i as f64 * FRAC_PI_2 / (BM_SAMPLES - 1) as f64)
        .collect();
    theta.extend(body.kinks().into_iter().filter(|k| *k > 0.0 && *k < FRAC_PI_2));
    let pts: Vec<(f64, f64, f64)> = theta
        .par_iter()
        .map(|&t| {
            let r = body.eval(t)?;
            if !(r > 0.0) {
                return Err(Error::VanishingRadius { theta: t });
            }
            let (s, c) = t.sin_cos();
            Ok((r * c, r * s, r))
        })
        .collect::<Result<_>>()?;
    // The boundary point (x, y) of K maps to (s x, y).
    let ratio = |log_s: f64| -> f64 {
        let s = log_s.exp();
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for &(x, y, _) in &pts {
            let r = (s * x).hypot(y);
            hi = hi.max(r);
            lo = lo.min(r);
        }
        hi / lo
    };

    let coarse: Vec<(f64, f64)> = (0..BM_COARSE)
        .map(|i| {
            let ls = -LOG_S_RANGE + 2.0 * LOG_S_RANGE * i as f64 / (BM_COARSE - 1) as f64;
            (ls, ratio(ls))
        })
        .collect();
    let best = coarse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap();
    let a = coarse[best.saturating_sub(1)].0;
    let b = coarse[(best + 1).min(BM_COARSE - 1)].0;
    let (ls, val) = golden_min(ratio, a, b, 1e-12);
    let (ls, val) = if val <= coarse[best].1 {
        (ls, val)
    } else {
        coarse[best]
    };
    Ok(BMResult {
        distance: val,
        s_opt: ls.exp(),
        ratio_curve: coarse.iter().map(|&(l, r)| (l.exp(), r)).collect(),
    })
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// One row of a uniformity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub body: String,
    pub n: usize,
    pub p: f64,
    #[serde(rename = "c_K")]
    pub c_k: f64,
    pub residual: f64,
}

/// Power-type fits of `IK` for every body and dimension.
///
/// The intersection bodies are evaluated on demand by quadrature with the
/// given configuration, so moduli down to `eps = 1e-3` are not limited by
/// interpolation.
pub fn uniformity_scan(
    family: &[(String, MeridianProfile)],
    dims: &[usize],
    eps_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<ScanRow>> {
    if let Some(n) = dims.iter().find(|n| !(4..=20).contains(*n)) {
        return Err(Error::InvalidParameter(format!("scan dimensions must lie in 4..=20, got {n}")));
    }
    check_eps_grid(eps_grid)?;
    let jobs: Vec<(&String, &MeridianProfile, usize)> = family
        .iter()
        .flat_map(|(name, k)| dims.iter().map(move |&n| (name, k, n)))
        .collect();
    jobs.par_iter()
        .map(|&(name, k, n)| {
            let ik = LazyIntersection::new(k.clone(), n, *cfg)?;
            let fit = power_type_fit(&ik, eps_grid)?;
            Ok(ScanRow {
                body: name.clone(),
                n,
                p: fit.p,
                c_k: fit.c,
                residual: fit.residual,
            })
        })
        .collect()
}

pub fn write_scan_csv(path: &Path, rows: &[ScanRow]) -> Result<()> {
    let mut text = String::from("body,n,p,c_K,residual\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.body,
            r.n,
            fmt_f64(r.p),
            fmt_f64(r.c_k),
            fmt_f64(r.residual)
        ));
    }
    crate::io::write_text(path, &text)
}
