use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{MeridianProfile, SampledProfile};

/// Closed-form bodies of revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalog {
    Ball,
    /// `{a|x| + b|y| <= 1}`.
    Segment { a: f64, b: f64 },
    /// `{|x| + |y| <= 1}`.
    DoubleCone,
    /// `{|x| <= 1, |y| <= 1}`.
    Cylinder,
    /// Rotated `{|x|^p + |y|^p <= 1}`.
    PBody { p: f64 },
    /// Union of the unit cylinder with the thin disc `{|x| <= e^{-1/t}, |y| <= 1/t}`.
    TwoCylinderUnion { t: f64 },
    /// Star body whose 4-dimensional intersection body has equatorial power type 4.
    Mod4,
    /// `rho = 0` on `[0, alpha]`, linear up to `1` at `pi/2`.
    CappedCylinder { alpha: f64 },
}

impl Catalog {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Catalog::Segment { a, b } => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
                    return bad(format!("segment body needs a > 0 and b > 0, got ({a}, {b})"));
                }
            }
            Catalog::PBody { p } => {
                if !(p.is_finite() && p >= 1.0) {
                    return bad(format!("p-body needs finite p >= 1, got {p}"));
                }
            }
            Catalog::TwoCylinderUnion { t } => {
                if !(t.is_finite() && t > 0.0) || (-1.0 / t).exp() < f64::MIN_POSITIVE {
                    return bad(format!("two-cylinder union needs t > 1/708, got {t}"));
                }
            }
            Catalog::CappedCylinder { alpha } => {
                if !(alpha > 0.0 && alpha < FRAC_PI_2) {
                    return bad(format!("capped cylinder needs alpha in (0, pi/2), got {alpha}"));
                }
            }
            Catalog::Ball | Catalog::DoubleCone | Catalog::Cylinder | Catalog::Mod4 => {}
        }
        Ok(())
    }

    /// `rho(theta)` for `theta` already folded into `[0, pi/2]`.
    pub(crate) fn radial(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.radial_dir(c, s, || theta)
    }

    /// `rho` in the direction `(cos, sin)` of the first quadrant; `angle`
    /// supplies `theta` for the entries that need it.
    pub(crate) fn radial_dir(&self, c: f64, s: f64, angle: impl FnOnce() -> f64) -> f64 {
        match *self {
            Catalog::Ball => 1.0,
            Catalog::Segment { a, b } => 1.0 / (a * c + b * s),
            Catalog::DoubleCone => 1.0 / (c + s),
            Catalog::Cylinder => 1.0 / c.max(s),
            Catalog::PBody { p } => (c.powf(p) + s.powf(p)).powf(-1.0 / p),
            Catalog::TwoCylinderUnion { t } => {
                let (w, h) = disc(t);
                let disc = 1.0 / (c / w).max(s / h);
                disc.max(1.0 / c.max(s))
            }
            Catalog::Mod4 => {
                let split = mod4_split();
                if angle() <= split {
                    (4.0 * s * s / c.powi(5)).cbrt()
                } else {
                    mod4_cap() / s
                }
            }
            Catalog::CappedCylinder { alpha } => {
                let theta = angle();
                if theta <= alpha {
                    0.0
                } else {
                    (theta - alpha) / (FRAC_PI_2 - alpha)
                }
            }
        }
    }

    pub(crate) fn kinks(&self) -> Vec<f64> {
        match *self {
            Catalog::Cylinder => vec![FRAC_PI_4],
            Catalog::TwoCylinderUnion { t } => {
                let (w, h) = disc(t);
                let mut k = vec![FRAC_PI_4, (1.0 / w).atan(), (h / w).atan(), h.atan()];
                k.sort_by(f64::total_cmp);
                k
            }
            Catalog::Mod4 => vec![mod4_split()],
            Catalog::CappedCylinder { alpha } => vec![alpha],
            _ => Vec::new(),
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            Catalog::Ball
                | Catalog::Segment { .. }
                | Catalog::DoubleCone
                | Catalog::Cylinder
                | Catalog::PBody { .. }
        )
    }
}

/// Axial half-width and radius of the disc in the two-cylinder union.
fn disc(t: f64) -> (f64, f64) {
    ((-1.0 / t).exp(), 1.0 / t)
}

/// `pi/2 - atan(5^{1/4})`, where the two branches of the Mod4 profile meet.
fn mod4_split() -> f64 {
    FRAC_PI_2 - 5f64.powf(0.25).atan()
}

/// The constant `A` making the Mod4 profile continuous: `A^3 = 4 tan^5(split)`.
fn mod4_cap() -> f64 {
    (4.0 * mod4_split().tan().powi(5)).cbrt()
}

/// A parsed `--body` argument.
///
/// Grammar: `ball | cone | cylinder | segment:a,b | pball:p | ktee:t | mod4 |
/// capped:alpha | file:<path.csv>`.
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Catalog(Catalog),
    File(PathBuf),
}

impl BodySpec {
    pub fn to_profile(&self) -> Result<MeridianProfile> {
        match self {
            BodySpec::Catalog(c) => {
                c.validate()?;
                Ok(MeridianProfile::Catalog(*c))
            }
            BodySpec::File(path) => Ok(MeridianProfile::Sampled(SampledProfile::load_csv(path)?)),
        }
    }
}

impl From<Catalog> for BodySpec {
    fn from(c: Catalog) -> Self {
        BodySpec::Catalog(c)
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Catalog::Ball => write!(f, "ball"),
            Catalog::Segment { a, b } => write!(f, "segment:{a},{b}"),
            Catalog::DoubleCone => write!(f, "cone"),
            Catalog::Cylinder => write!(f, "cylinder"),
            Catalog::PBody { p } => write!(f, "pball:{p}"),
            Catalog::TwoCylinderUnion { t } => write!(f, "ktee:{t}"),
            Catalog::Mod4 => write!(f, "mod4"),
            Catalog::CappedCylinder { alpha } => write!(f, "capped:{alpha}"),
        }
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySpec::Catalog(c) => c.fmt(f),
            BodySpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for BodySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::BodySpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        if head == "file" {
            let path = args.filter(|p| !p.is_empty()).ok_or_else(|| fail("missing path"))?;
            return Ok(BodySpec::File(PathBuf::from(path)));
        }
        let nums: Vec<f64> = match args {
            None => Vec::new(),
            Some(a) => a
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fail("parameters must be numbers"))?,
        };
        let want = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(fail(&format!("expected {k} parameter(s), got {}", nums.len())))
            }
        };
        let cat = match head {
            "ball" => {
                want(0)?;
                Catalog::Ball
            }
            "cone" => {
                want(0)?;
                Catalog::DoubleCone
            }
            "cylinder" => {
                want(0)?;
                Catalog::Cylinder
            }
            "mod4" => {
                want(0)?;
                Catalog::Mod4
            }
            "segment" => {
                want(2)?;
                Catalog::Segment {
                    a: nums[0],
                    b: nums[1],
                }
            }
            "pball" => {
                want(1)?;
                Catalog::PBody { p: nums[0] }
            }
            "ktee" => {
                want(1)?;
                Catalog::TwoCylinderUnion { t: nums[0] }
            }
            "capped" => {
                want(1)?;
                Catalog::CappedCylinder { alpha: nums[0] }
            }
            _ => return Err(fail("unknown body")),
        };
        cat.validate().map_err(|e| fail(&e.to_string()))?;
        Ok(BodySpec::Catalog(cat))
    }
}
