use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// `rho(theta) = max(floor, 1 + sum_k a_k cos(2 k theta))`.
///
/// Only even harmonics appear, so the profile is symmetric about both `0`
/// and `pi/2` without explicit reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    coeffs: Vec<f64>,
    floor: f64,
    kinks: Vec<f64>,
}

impl CosineSeries {
    pub fn new(coeffs: Vec<f64>, floor: f64) -> Result<Self> {
        if !(floor.is_finite() && floor > 0.0) {
            return Err(Error::InvalidParameter(format!("floor must be positive, got {floor}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        let mut s = Self {
            coeffs,
            floor,
            kinks: Vec::new(),
        };
        s.kinks = s.floor_crossings();
        Ok(s)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    fn series(&self, theta: f64) -> f64 {
        1.0 + self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * (2.0 * (k + 1) as f64 * theta).cos())
            .sum::<f64>()
    }

    pub(crate) fn radial(&self, theta: f64) -> f64 {
        self.series(theta).max(self.floor)
    }

    /// Angles where the series crosses the floor: the clipping corners.
    fn floor_crossings(&self) -> Vec<f64> {
        const SCAN: usize = 4096;
        let g = |t: f64| self.series(t) - self.floor;
        let mut out = Vec::new();
        let mut t0 = 0.0;
        let mut g0 = g(t0);
        for i in 1..=SCAN {
            let t1 = i as f64 * FRAC_PI_2 / SCAN as f64;
            let g1 = g(t1);
            if g0 * g1 < 0.0 {
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) * g0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            t0 = t1;
            g0 = g1;
        }
        out
    }
}
