use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    MonotoneCubic,
    Linear,
}

/// A meridian profile given by samples on `[0, pi/2]`.
///
/// The first sample sits at exactly `0` and the last at exactly `pi/2`.
/// Between samples the profile is a cubic Hermite spline whose node slopes
/// are three-point estimates, limited so the spline stays monotone on every
/// interval where the data are monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    theta: Vec<f64>,
    rho: Vec<f64>,
    slopes: Vec<f64>,
    interpolation: Interpolation,
}

impl SampledProfile {
    pub fn new(theta: Vec<f64>, rho: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidProfile(m));
        if theta.len() != rho.len() {
            return invalid(format!(
                "{} angles but {} radii",
                theta.len(),
                rho.len()
            ));
        }
        if theta.len() < 2 {
            return invalid("need at least two samples".into());
        }
        if theta[0] != 0.0 || *theta.last().unwrap() != FRAC_PI_2 {
            return invalid("samples must start at theta = 0 and end at theta = pi/2".into());
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("sample angles must be strictly increasing".into());
        }
        if let Some(r) = rho.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return invalid(format!("radii must be finite and nonnegative, got {r}"));
        }
        if !(*rho.last().unwrap() > 0.0) {
            return invalid("rho(pi/2) must be positive".into());
        }
        let slopes = match interpolation {
            Interpolation::MonotoneCubic => monotone_slopes(&theta, &rho),
            Interpolation::Linear => Vec::new(),
        };
        Ok(Self {
            theta,
            rho,
            slopes,
            interpolation,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Same angles, radii multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let rho = self.rho.iter().map(|r| r * factor).collect();
        Self::new(self.theta.clone(), rho, self.interpolation)
    }

    /// `theta` must already lie in `[0, pi/2]`.
    pub(crate) fn radial(&self, theta: f64) -> f64 {
        let n = self.theta.len();
        let k = self.theta.partition_point(|&t| t <= theta);
        if k == 0 {
            return self.rho[0];
        }
        if k >= n {
            return self.rho[n - 1];
        }
        let i = k - 1;
        let (x0, x1) = (self.theta[i], self.theta[i + 1]);
        let (y0, y1) = (self.rho[i], self.rho[i + 1]);
        let h = x1 - x0;
        let s = (theta - x0) / h;
        match self.interpolation {
            Interpolation::Linear => y0 + s * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                (h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1).max(0.0)
            }
        }
    }

    /// Read a `theta,rho` CSV file.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "theta" || &headers[1] != "rho" {
            return Err(Error::InvalidProfile(format!(
                "{}: expected header `theta,rho`",
                path.display()
            )));
        }
        let mut theta = Vec::new();
        let mut rho = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidProfile(format!("{}: bad number `{s}`", path.display()))
                })
            };
            theta.push(parse(&rec[0])?);
            rho.push(parse(&rec[1])?);
        }
        Self::new(theta, rho, Interpolation::MonotoneCubic)
    }

    /// Write a `theta,rho` CSV file with round-trip exact numbers.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["theta", "rho"])?;
        for (t, r) in self.theta.iter().zip(&self.rho) {
            w.write_record([fmt_f64(*t), fmt_f64(*r)])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Three-point slopes with a monotonicity limiter.
///
/// Within one cell of a place where the data change direction the unlimited
/// estimate is kept, so the spline stays third-order accurate through smooth
/// extrema.
fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    }
    if n >= 4 {
        d[0] = lagrange_slope(&x[..4], &y[..4], 0);
        d[n - 1] = lagrange_slope(&x[n - 4..], &y[n - 4..], 3);
    } else {
        d[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
        let (a, b) = (h[n - 2], h[n - 3]);
        d[n - 1] = ((2.0 * a + b) * delta[n - 2] - a * delta[n - 3]) / (a + b);
    }

    let mut turning: Vec<bool> = (0..n)
        .map(|i| i > 0 && i < n - 1 && delta[i - 1] * delta[i] < 0.0)
        .collect();
    // An extremum straddled by a flat cell.
    for i in 1..n.saturating_sub(2) {
        if delta[i] == 0.0 && delta[i - 1] * delta[i + 1] < 0.0 {
            turning[i] = true;
            turning[i + 1] = true;
        }
    }
    for i in 0..n {
        let near_turn = turning[i]
            || (i > 0 && turning[i - 1])
            || (i < n - 1 && turning[i + 1]);
        if near_turn {
            continue;
        }
        let left = (i > 0).then(|| delta[i - 1]);
        let right = (i < n - 1).then(|| delta[i]);
        for s in [left, right].into_iter().flatten() {
            if s == 0.0 || d[i] * s < 0.0 {
                d[i] = 0.0;
            } else if d[i].abs() > 3.0 * s.abs() {
                d[i] = 3.0 * s;
            }
        }
    }
    d
}

/// Derivative at `x[at]` of the polynomial through all the given points.
fn lagrange_slope(x: &[f64], y: &[f64], at: usize) -> f64 {
    let x0 = x[at];
    let mut d = 0.0;
    for j in 0..x.len() {
        let coef = if j == at {
            (0..x.len()).filter(|&k| k != at).map(|k| 1.0 / (x0 - x[k])).sum()
        } else {
            let num: f64 = (0..x.len()).filter(|&k| k != at && k != j).map(|k| x0 - x[k]).product();
            let den: f64 = (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            num / den
        };
        d += coef * y[j];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{Catalog, MeridianProfile};
    use approx::assert_relative_eq;

    #[test]
    fn rejects_malformed_samples() {
        let ok_t = vec![0.0, 1.0, FRAC_PI_2];
        let mono = Interpolation::MonotoneCubic;
        assert!(SampledProfile::new(ok_t.clone(), vec![1.0, 1.0], mono).is_err());
        assert!(SampledProfile::new(vec![0.1, 1.0, FRAC_PI_2], vec![1.0; 3], mono).is_err());
        assert!(SampledProfile::new(vec![0.0, 1.0, 1.5], vec![1.0; 3], mono).is_err());
        assert!(SampledProfile::new(vec![0.0, 1.0, 1.0, FRAC_PI_2], vec![1.0; 4], mono).is_err());
        assert!(SampledProfile::new(ok_t.clone(), vec![1.0, -0.1, 1.0], mono).is_err());
        assert!(SampledProfile::new(ok_t.clone(), vec![1.0, 1.0, 0.0], mono).is_err());
        assert!(SampledProfile::new(ok_t, vec![1.0, 2.0, 1.0], mono).is_ok());
    }

    #[test]
    fn reproduces_nodes_exactly() {
        let k = MeridianProfile::from(Catalog::PBody { p: 3.0 });
        let s = k.sample(64).unwrap();
        for (t, r) in s.theta().iter().zip(s.rho()) {
            assert_eq!(s.radial(*t), *r);
        }
    }

    #[test]
    fn round_trip_from_2048_samples_of_smooth_bodies() {
        let bodies = [
            Catalog::Ball,
            Catalog::DoubleCone,
            Catalog::Segment { a: 2.0, b: 0.5 },
            Catalog::PBody { p: 2.0 },
            Catalog::PBody { p: 3.0 },
            Catalog::PBody { p: 4.0 },
        ];
        for c in bodies {
            let k = MeridianProfile::from(c);
            let s = MeridianProfile::from(k.sample(2048).unwrap());
            let mut worst: f64 = 0.0;
            for i in 0..=20_000 {
                let t = i as f64 * FRAC_PI_2 / 20_000.0;
                worst = worst.max((s.radial(t) - k.radial(t)).abs());
            }
            assert!(worst < 1e-8, "{c}: sup error {worst:e}");
        }
    }

    #[test]
    fn limiter_keeps_monotone_data_monotone() {
        // A ramp with a sharp corner would make an unlimited cubic overshoot.
        let theta: Vec<f64> = crate::bodies::uniform_grid(30);
        let rho: Vec<f64> = theta.iter().map(|&t| if t < 0.5 { 0.0 } else { (t - 0.5) * 3.0 }).collect();
        let s = SampledProfile::new(theta, rho, Interpolation::MonotoneCubic).unwrap();
        let mut prev = 0.0;
        for i in 0..=3000 {
            let v = s.radial(i as f64 * FRAC_PI_2 / 3000.0);
            assert!(v >= prev - 1e-15);
            assert!(v >= 0.0);
            prev = v;
        }
    }

    #[test]
    fn linear_interpolation() {
        let s = SampledProfile::new(vec![0.0, FRAC_PI_2], vec![1.0, 3.0], Interpolation::Linear).unwrap();
        assert_relative_eq!(s.radial(FRAC_PI_2 / 4.0), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let s = MeridianProfile::from(Catalog::Mod4).sample(257).unwrap();
        s.save_csv(&path).unwrap();
        let back = SampledProfile::load_csv(&path).unwrap();
        assert_eq!(back, s);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("theta,rho\n"));
    }

    #[test]
    fn csv_with_wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "x,y\n0,1\n1.5707963267948966,1\n").unwrap();
        assert!(SampledProfile::load_csv(&path).is_err());
        std::fs::write(&path, "theta,rho\n0,1\n1.5707963267948966,1\n").unwrap();
        assert!(SampledProfile::load_csv(&path).is_ok());
    }
}
