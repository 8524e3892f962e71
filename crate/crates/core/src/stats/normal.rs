use alloc::vec::Vec;

use crate::{Error, Result};

/// Standard normal CDF via the complementary error function.
///
/// `libm::erfc` is the fdlibm rational approximation, accurate to a few ulps.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and the standard normal CDF.
pub fn ks_distance(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = normal_cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d.max(upper).max(lower)
    });
    Ok(d)
}

/// Asymptotic critical value `sqrt(-ln(alpha / 2) / 2) / sqrt(n)` of the
/// Kolmogorov distribution at level `alpha`.
pub fn kolmogorov_critical_value(n: usize, alpha: f64) -> f64 {
    libm::sqrt(-libm::log(alpha / 2.0) / 2.0) / libm::sqrt(n as f64)
}
