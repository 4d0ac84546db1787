use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse body spec `{spec}`: {reason}")]
    BodySpec { spec: String, reason: String },

    #[error("level {level} is never reached by psi on [0, {searched}]")]
    UnreachableLevel { level: f64, searched: f64 },

    #[error("quadrature did not reach tolerance {tol:e} within {panels} panels (error estimate {estimate:e})")]
    Quadrature {
        tol: f64,
        panels: usize,
        estimate: f64,
    },

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("epsilon {eps} is not attainable for this profile")]
    NoRoot { eps: f64 },

    #[error("modulus of convexity vanishes at epsilon {eps}: power type is infinite")]
    FlatEquator { eps: f64 },

    #[error("radial function vanishes at theta {theta}: distance to the ball is undefined")]
    VanishingRadius { theta: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical operator itself (as opposed to
    /// bad input or analysis preconditions).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::Degenerate(_))
    }
}
