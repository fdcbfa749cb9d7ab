//! Standard normal helpers.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

pub fn pdf(z: f64) -> f64 {
    standard().pdf(z)
}

pub fn cdf(z: f64) -> f64 {
    standard().cdf(z)
}

pub fn quantile(p: f64) -> f64 {
    standard().inverse_cdf(p)
}

/// `E[Z² 1{|Z| ≤ c}]` for standard normal `Z`.
pub fn truncated_second_moment(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    2.0 * cdf(c) - 1.0 - 2.0 * c * pdf(c)
}
