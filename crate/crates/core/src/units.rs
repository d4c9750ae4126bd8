//! Physical constants and unit conversions.

/// Speed of sound in sea water (m/s).
pub const SOUND_SPEED: f64 = 1500.0;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
