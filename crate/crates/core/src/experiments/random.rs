use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bodies::{CosineSeries, MeridianProfile};
use crate::error::{Error, Result};

/// Harmonics in a random profile.
pub const HARMONICS: usize = 6;
/// Lower clip of a random profile.
pub const FLOOR: f64 = 0.05;

/// `max(0.05, 1 + sum_k a_k cos(2 k theta))` with `|a_k| <= roughness / k`
/// drawn from a seeded ChaCha stream.
pub fn random_star_profile(seed: u64, roughness: f64) -> Result<MeridianProfile> {
    if !(0.0..=1.0).contains(&roughness) {
        return Err(Error::InvalidParameter(format!(
            "roughness must lie in [0, 1], got {roughness}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (1..=HARMONICS)
        .map(|k| roughness * rng.random_range(-1.0..=1.0) / k as f64)
        .collect();
    Ok(MeridianProfile::Series(CosineSeries::new(coeffs, FLOOR)?))
}
