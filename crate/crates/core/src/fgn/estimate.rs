use statrs::function::erf::erfc;

use super::{FgnError, RateBounds};

/// Minimum input length for [`estimate_hurst`].
pub const MIN_HURST_SAMPLES: usize = 1 << 10;

const AGGREGATION_LEVELS: std::ops::RangeInclusive<u32> = 1..=8;

/// Sample mean and (n-1)-normalised standard deviation. Zero sigma for one value.
pub fn sample_mean_sigma(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Sample autocorrelation at `lag`.
pub fn lag_autocorrelation(values: &[f64], lag: usize) -> f64 {
    let n = values.len();
    if lag >= n {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let denom: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = values
        .windows(lag + 1)
        .map(|w| (w[0] - mean) * (w[lag] - mean))
        .sum();
    num / denom
}

/// Variance-time Hurst estimate.
///
/// The series is aggregated into non-overlapping block means at block sizes
/// `m = 2^1 .. 2^8`; `log Var(X^(m))` is regressed on `log m` and the slope
/// decay exponent `beta = -slope` gives `H = 1 - beta / 2`.
pub fn estimate_hurst(values: &[f64]) -> Result<f64, FgnError> {
    if values.len() < MIN_HURST_SAMPLES {
        return Err(FgnError::TooShort {
            needed: MIN_HURST_SAMPLES,
            got: values.len(),
        });
    }
    let (_, sigma) = sample_mean_sigma(values);
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(FgnError::ZeroVariance);
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for level in AGGREGATION_LEVELS {
        let m = 1usize << level;
        let blocks: Vec<f64> = values
            .chunks_exact(m)
            .map(|c| c.iter().sum::<f64>() / m as f64)
            .collect();
        let (_, s) = sample_mean_sigma(&blocks);
        if s > 0.0 {
            xs.push((m as f64).ln());
            ys.push((s * s).ln());
        }
    }
    if xs.len() < 2 {
        return Err(FgnError::ZeroVariance);
    }
    let beta = -least_squares_slope(&xs, &ys);
    Ok(1.0 - beta / 2.0)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Mean of `Normal(mean, sigma^2)` conditioned on `[lo, hi]`.
pub fn truncated_normal_mean(mean: f64, sigma: f64, bounds: RateBounds) -> Result<f64, FgnError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(FgnError::InvalidSigma(sigma));
    }
    let RateBounds { lo, hi } = bounds;
    if sigma == 0.0 {
        return if bounds.contains(mean) {
            Ok(mean)
        } else {
            Err(FgnError::NegligibleMass { lo, hi })
        };
    }
    let alpha = (lo - mean) / sigma;
    let beta = (hi - mean) / sigma;
    // take the difference in whichever tail keeps it well conditioned
    let mass = if alpha > 0.0 {
        std_normal_sf(alpha) - std_normal_sf(beta)
    } else {
        std_normal_cdf(beta) - std_normal_cdf(alpha)
    };
    if !(mass > 1e-12) {
        return Err(FgnError::NegligibleMass { lo, hi });
    }
    Ok(mean + sigma * (std_normal_pdf(alpha) - std_normal_pdf(beta)) / mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn truncated_mean_points() {
        let b = RateBounds::default();
        assert_eq!(truncated_normal_mean(7.5, 7.0, b).unwrap(), 7.5);
        assert!((truncated_normal_mean(5.0, 5.0, b).unwrap() - 6.148).abs() < 5e-4);
        assert!((truncated_normal_mean(10.0, 5.0, b).unwrap() - 8.852).abs() < 5e-4);
        assert_eq!(truncated_normal_mean(3.0, 0.0, b).unwrap(), 3.0);
    }

    // Midpoint-rule quadrature of x*pdf(x) over [lo, hi], independent of the
    // closed form above.
    #[test]
    fn truncated_mean_matches_quadrature() {
        let b = RateBounds::default();
        for &(mu, s) in &[(5.0, 5.0), (10.0, 5.0), (7.5, 7.0), (2.0, 1.0), (14.0, 3.0)] {
            let steps = 200_000;
            let h = (b.hi - b.lo) / steps as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..steps {
                let x = b.lo + (i as f64 + 0.5) * h;
                let w = (-0.5 * ((x - mu) / s).powi(2)).exp();
                num += x * w;
                den += w;
            }
            let quad = num / den;
            let closed = truncated_normal_mean(mu, s, b).unwrap();
            assert!((quad - closed).abs() < 1e-6, "({mu},{s}): {quad} vs {closed}");
        }
    }

    #[test]
    fn truncated_mean_far_tail() {
        let b = RateBounds::default();
        let m = truncated_normal_mean(-10.0, 2.0, b).unwrap();
        assert!(m > 0.0 && m < 0.5, "{m}");
        assert!(matches!(
            truncated_normal_mean(-1e4, 1.0, b),
            Err(FgnError::NegligibleMass { .. })
        ));
        assert!(truncated_normal_mean(20.0, 0.0, b).is_err());
    }

    #[test]
    fn hurst_of_white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..1 << 16).map(|_| rng.sample(StandardNormal)).collect();
        let h = estimate_hurst(&xs).unwrap();
        assert!((h - 0.5).abs() < 0.05, "{h}");
    }

    #[test]
    fn hurst_errors() {
        assert_eq!(estimate_hurst(&vec![1.0; 4096]), Err(FgnError::ZeroVariance));
        assert!(matches!(
            estimate_hurst(&[1.0, 2.0, 3.0]),
            Err(FgnError::TooShort { .. })
        ));
    }

    #[test]
    fn autocorrelation_basics() {
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((lag_autocorrelation(&alt, 1) + 0.99).abs() < 1e-9);
        assert_eq!(lag_autocorrelation(&[2.0; 10], 1), 0.0);
    }
}
