//! Intersection bodies of symmetric bodies of revolution.
//!
//! A body of revolution about the `e1` axis is described by its meridian
//! radial function `rho(theta)` on `[0, pi/2]` ([`bodies`]). The intersection
//! body operator reduces to one-dimensional integrals of that profile
//! ([`radon`]); [`analysis`] measures how round the result is at the equator
//! and globally, and [`experiments`] packages the standard checks as named,
//! reproducible scenarios. The `revolve` binary fronts all of it ([`cli`]).

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bodies;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod quadrature;
pub mod radon;

pub use error::{Error, Result};
