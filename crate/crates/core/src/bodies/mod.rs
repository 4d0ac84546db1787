//! Symmetric bodies of revolution about the `e1` axis, represented by the
//! meridian radial function `rho(theta)` on `[0, pi/2]`, where `theta` is the
//! angle from the axis.
//!
//! Values outside `[0, pi/2]` follow from central and axial symmetry: the
//! profile is reflected evenly at `0` and at `pi/2` before evaluation.

mod catalog;
mod sampled;
mod series;

use std::f64::consts::{FRAC_PI_2, PI};

pub use catalog::{BodySpec, Catalog};
pub use sampled::{Interpolation, SampledProfile};
pub use series::CosineSeries;

use crate::error::{Error, Result};

/// Anything with a meridian radial function.
///
/// Implemented by every [`MeridianProfile`] and by evaluators whose values
/// come out of a quadrature (and can therefore fail).
pub trait Radial: Send + Sync {
    /// `rho(theta)` for any finite `theta`.
    fn eval(&self, theta: f64) -> Result<f64>;

    /// Angles in `(0, pi/2)` where the radial function is not smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<R: Radial + ?Sized> Radial for &R {
    fn eval(&self, theta: f64) -> Result<f64> {
        (**self).eval(theta)
    }

    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
}

/// Fold any finite angle into `[0, pi/2]`.
pub fn reflect(theta: f64) -> f64 {
    let t = theta.abs() % PI;
    if t > FRAC_PI_2 {
        PI - t
    } else {
        t
    }
}

/// `psi(x) = rho(theta) sin(theta)` with `theta = atan(1/x)`.
pub fn psi_of<R: Radial + ?Sized>(body: &R, x: f64) -> Result<f64> {
    let x = x.abs();
    let theta = 1.0f64.atan2(x);
    let sin = 1.0 / x.hypot(1.0);
    Ok(body.eval(theta)? * sin)
}

/// The meridian profile of a symmetric body of revolution.
#[derive(Debug, Clone)]
pub enum MeridianProfile {
    Catalog(Catalog),
    Sampled(SampledProfile),
    Series(CosineSeries),
    Dilated(Box<Dilated<MeridianProfile>>),
}

impl MeridianProfile {
    pub fn ball() -> Self {
        Self::Catalog(Catalog::Ball)
    }

    /// `rho(theta)`, with even reflection outside `[0, pi/2]`.
    pub fn radial(&self, theta: f64) -> f64 {
        let t = reflect(theta);
        match self {
            Self::Catalog(c) => c.radial(t),
            Self::Sampled(s) => s.radial(t),
            Self::Series(s) => s.radial(t),
            Self::Dilated(d) => d.map(t, |th| d.base.radial(th)),
        }
    }

    /// `rho` in the direction with the given cosine and sine, without
    /// forming the angle; this keeps full relative accuracy for catalog
    /// bodies when either component is tiny.
    pub fn radial_dir(&self, cos: f64, sin: f64) -> f64 {
        let (c, s) = (cos.abs(), sin.abs());
        match self {
            Self::Catalog(k) => k.radial_dir(c, s, || s.atan2(c)),
            Self::Dilated(d) => {
                let a = c / d.s_axis;
                let b = s / d.s_perp;
                let r = a.hypot(b);
                d.base.radial_dir(a / r, b / r) / r
            }
            _ => self.radial(s.atan2(c)),
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        let x = x.abs();
        let r = x.hypot(1.0);
        self.radial_dir(x / r, 1.0 / r) / r
    }

    /// Profile of `diag(s_axis, s_perp, ..., s_perp) K`.
    pub fn dilate(&self, s_axis: f64, s_perp: f64) -> Result<Self> {
        if s_axis == 1.0 && s_perp == 1.0 {
            validate_scales(s_axis, s_perp)?;
            return Ok(self.clone());
        }
        Ok(Self::Dilated(Box::new(Dilated::new(
            self.clone(),
            s_axis,
            s_perp,
        )?)))
    }

    /// The level crossing `psi(sigma) = 1 - 1/n` for a profile normalized to
    /// `psi(0) = rho(pi/2) = 1`.
    pub fn sigma(&self, n: usize) -> Result<f64> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("dimension {n} < 3")));
        }
        let eq = self.radial(FRAC_PI_2);
        if (eq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProfile(format!(
                "sigma needs rho(pi/2) = 1, got {eq}"
            )));
        }
        let level = 1.0 - 1.0 / n as f64;
        let mut hi = 1.0;
        while self.psi(hi) > level {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::UnreachableLevel {
                    level,
                    searched: hi,
                });
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.psi(mid) <= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Sample on `points` uniform angles, with monotone cubic interpolation.
    pub fn sample(&self, points: usize) -> Result<SampledProfile> {
        if points < 2 {
            return Err(Error::InvalidParameter("need at least two samples".into()));
        }
        let theta = uniform_grid(points);
        let rho = theta.iter().map(|&t| self.radial(t)).collect();
        SampledProfile::new(theta, rho, Interpolation::MonotoneCubic)
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Self::Catalog(c) => c.is_convex(),
            Self::Dilated(d) => d.base.is_convex(),
            _ => false,
        }
    }
}

impl Radial for MeridianProfile {
    fn eval(&self, theta: f64) -> Result<f64> {
        Ok(self.radial(theta))
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Catalog(c) => c.kinks(),
            Self::Sampled(_) => Vec::new(),
            Self::Series(s) => s.kinks().to_vec(),
            Self::Dilated(d) => d.kinks(),
        }
    }
}

impl From<Catalog> for MeridianProfile {
    fn from(c: Catalog) -> Self {
        Self::Catalog(c)
    }
}

impl From<SampledProfile> for MeridianProfile {
    fn from(s: SampledProfile) -> Self {
        Self::Sampled(s)
    }
}

/// `n` equally spaced angles from `0` to exactly `pi/2`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let step = FRAC_PI_2 / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    grid[n - 1] = FRAC_PI_2;
    grid
}

fn validate_scales(s_axis: f64, s_perp: f64) -> Result<()> {
    for s in [s_axis, s_perp] {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dilation scales must be positive and finite, got ({s_axis}, {s_perp})"
            )));
        }
    }
    Ok(())
}

/// The image of a body under `diag(s_axis, s_perp, ..., s_perp)`.
#[derive(Debug, Clone)]
pub struct Dilated<R> {
    base: R,
    s_axis: f64,
    s_perp: f64,
}

impl<R> Dilated<R> {
    pub fn new(base: R, s_axis: f64, s_perp: f64) -> Result<Self> {
        validate_scales(s_axis, s_perp)?;
        Ok(Self {
            base,
            s_axis,
            s_perp,
        })
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.s_axis, self.s_perp)
    }

    /// `rho'(theta') = rho(theta) / |T^{-1} u'|`, where `theta` is the
    /// direction of `T^{-1} u'`.
    fn map<T, F>(&self, theta: f64, base: F) -> T
    where
        F: FnOnce(f64) -> T,
        T: DivBy,
    {
        let t = reflect(theta);
        let a = t.cos() / self.s_axis;
        let b = t.sin() / self.s_perp;
        base(b.atan2(a)).div_by(a.hypot(b))
    }

    fn kinks(&self) -> Vec<f64>
    where
        R: Radial,
    {
        self.base
            .kinks()
            .into_iter()
            .map(|k| (self.s_perp * k.sin()).atan2(self.s_axis * k.cos()))
            .collect()
    }
}

trait DivBy {
    fn div_by(self, d: f64) -> Self;
}

impl DivBy for f64 {
    fn div_by(self, d: f64) -> Self {
        self / d
    }
}

impl DivBy for Result<f64> {
    fn div_by(self, d: f64) -> Self {
        self.map(|v| v / d)
    }
}

impl<R: Radial> Radial for Dilated<R> {
    fn eval(&self, theta: f64) -> Result<f64> {
        self.map(theta, |t| self.base.eval(t))
    }

    fn kinks(&self) -> Vec<f64> {
        Dilated::kinks(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn cat(c: Catalog) -> MeridianProfile {
        c.into()
    }

    #[test]
    fn radial_catalog_examples() {
        assert_eq!(MeridianProfile::ball().radial(0.3), 1.0);
        assert_relative_eq!(
            cat(Catalog::DoubleCone).radial(FRAC_PI_4),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            cat(Catalog::Cylinder).radial(PI / 3.0),
            2.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn reflection_is_even_at_both_ends() {
        let p = cat(Catalog::PBody { p: 3.0 });
        for &t in &[0.1, 0.7, 1.2] {
            assert_relative_eq!(p.radial(-t), p.radial(t), epsilon = 1e-15);
            assert_relative_eq!(p.radial(PI - t), p.radial(t), epsilon = 1e-14);
            assert_relative_eq!(p.radial(PI + t), p.radial(t), epsilon = 1e-14);
        }
        assert_eq!(reflect(FRAC_PI_2), FRAC_PI_2);
        assert_eq!(reflect(0.0), 0.0);
    }

    #[test]
    fn psi_examples() {
        assert_relative_eq!(
            cat(Catalog::Segment { a: 1.0, b: 1.0 }).psi(1.0),
            0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(cat(Catalog::Cylinder).psi(2.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(
            MeridianProfile::ball().psi(1.0),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(cat(Catalog::Cylinder).psi(0.0), 1.0);
    }

    #[test]
    fn psi_of_segment_bodies_is_reciprocal_linear() {
        for &a in &[0.25, 1.0, 3.0] {
            for &b in &[0.5, 1.0, 2.0] {
                let p = cat(Catalog::Segment { a, b });
                for i in 0..50 {
                    let x = i as f64 * 0.2;
                    assert!((p.psi(x) - 1.0 / (a * x + b)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dilate_examples() {
        let b2 = MeridianProfile::ball().dilate(2.0, 2.0).unwrap();
        for i in 0..20 {
            assert_relative_eq!(b2.radial(i as f64 * 0.08), 2.0, epsilon = 1e-15);
        }
        let s = 1.7;
        let cyl = cat(Catalog::Cylinder).dilate(s, 1.0).unwrap();
        for i in 0..=40 {
            let t = i as f64 * FRAC_PI_2 / 40.0;
            let want = (s / t.cos()).min(1.0 / t.sin());
            assert_relative_eq!(cyl.radial(t), want, max_relative = 1e-14);
        }
        let p = cat(Catalog::PBody { p: 2.5 });
        let same = p.dilate(1.0, 1.0).unwrap();
        assert_eq!(same.radial(0.4), p.radial(0.4));
    }

    #[test]
    fn dilate_rejects_bad_scales() {
        let b = MeridianProfile::ball();
        assert!(b.dilate(0.0, 1.0).is_err());
        assert!(b.dilate(1.0, -2.0).is_err());
        assert!(b.dilate(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn dilated_ellipse_composition_rule() {
        // A point of K at angle theta maps to T (rho cos, rho sin).
        let k = cat(Catalog::PBody { p: 3.0 });
        let (sa, sp) = (0.6, 1.9);
        let tk = k.dilate(sa, sp).unwrap();
        for i in 1..30 {
            let t = i as f64 * 0.05;
            let r = k.radial(t);
            let (x, y) = (sa * r * t.cos(), sp * r * t.sin());
            let t2 = y.atan2(x);
            assert_relative_eq!(tk.radial(t2), x.hypot(y), max_relative = 1e-13);
        }
    }

    #[test]
    fn dilated_kinks_follow_the_map() {
        let k = cat(Catalog::Cylinder).dilate(2.0, 1.0).unwrap();
        let kinks = k.kinks();
        assert_eq!(kinks.len(), 1);
        assert_relative_eq!(kinks[0], (1.0f64 / 2.0).atan(), epsilon = 1e-15);
    }

    #[test]
    fn sigma_examples() {
        for n in [3usize, 4, 7, 50] {
            let s = cat(Catalog::Cylinder).sigma(n).unwrap();
            assert_relative_eq!(s, n as f64 / (n as f64 - 1.0), max_relative = 1e-11);
        }
        let s = MeridianProfile::ball().sigma(50).unwrap();
        let want = (1.0 / (1.0 - 1.0 / 50.0f64).powi(2) - 1.0).sqrt();
        assert_relative_eq!(s, want, max_relative = 1e-11);
        // leading order sqrt(2/n)
        assert!((s / (2.0f64 / 50.0).sqrt() - 1.0).abs() < 0.02);
        let s = cat(Catalog::DoubleCone).sigma(4).unwrap();
        assert_relative_eq!(s, 1.0 / 3.0, max_relative = 1e-11);
    }

    #[test]
    fn sigma_requires_normalization() {
        let k = cat(Catalog::Segment { a: 1.0, b: 2.0 });
        assert!(matches!(k.sigma(5), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn sigma_reports_unreachable_level() {
        // psi of the slab-like segment body b = 1, a tiny stays near 1 far out.
        let k = cat(Catalog::Segment { a: 1e-14, b: 1.0 });
        assert!(matches!(k.sigma(5), Err(Error::UnreachableLevel { .. })));
    }

    fn normalized_convex() -> Vec<MeridianProfile> {
        let mut v = vec![
            MeridianProfile::ball(),
            cat(Catalog::DoubleCone),
            cat(Catalog::Cylinder),
        ];
        for p in [1.3, 2.0, 3.0, 4.0, 8.0] {
            v.push(cat(Catalog::PBody { p }));
        }
        // L_{2,1} rescaled to rho(0) = rho(pi/2) = 1.
        v.push(cat(Catalog::Segment { a: 2.0, b: 1.0 }).dilate(2.0, 1.0).unwrap());
        v
    }

    #[test]
    fn psi_lies_between_cone_and_cylinder() {
        for k in normalized_convex() {
            for i in 0..400 {
                let x = i as f64 * 0.025;
                let p = k.psi(x);
                assert!(p >= 1.0 / (x + 1.0) - 1e-12, "lower bound at {x}");
                assert!(p <= 1.0f64.min(1.0 / x) + 1e-12, "upper bound at {x}");
            }
        }
    }

    #[test]
    fn psi_upper_bound_from_three_point_convexity() {
        for k in normalized_convex() {
            for i in 1..=20 {
                let sigma = 0.1 * i as f64;
                for j in 0..18 {
                    let t = 1.5 + 0.5 * j as f64;
                    let bound = 1.0 / (1.0 + t * (1.0 / k.psi(sigma) - 1.0));
                    assert!(k.psi(sigma * t) <= bound + 1e-12);
                }
            }
        }
    }

    #[test]
    fn psi_is_non_increasing_for_convex_profiles() {
        for k in normalized_convex() {
            let mut prev = k.psi(0.0);
            for i in 1..500 {
                let v = k.psi(i as f64 * 0.02);
                assert!(v <= prev + 1e-14);
                prev = v;
            }
        }
    }
}
