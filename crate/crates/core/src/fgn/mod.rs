//! Fractional Gaussian noise (FGN) rate sequences.
//!
//! Exact synthesis by circulant embedding of the FGN autocovariance, the four
//! techniques for forcing raw samples into a valid rate range, and the two
//! statistical oracles used to validate generated sequences (a variance-time
//! Hurst estimator and the analytic mean of a truncated normal).

mod bound;
mod estimate;
mod stream;
mod synth;

pub use bound::{bound_sequence, BoundingMode, RateBounds, RateSequence};
pub use estimate::{estimate_hurst, lag_autocorrelation, sample_mean_sigma, truncated_normal_mean};
pub use stream::{BoundedFgnStream, DEFAULT_BLOCK_LEN};
pub use synth::{fgn_autocovariance, generate_fgn, CirculantSynthesizer, MAX_BLOCK_LEN};

use thiserror::Error;

/// Default Hurst parameter used when an experiment does not set one.
pub const DEFAULT_HURST: f64 = 0.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FgnError {
    #[error("hurst parameter must lie strictly inside (0, 1), got {0}")]
    InvalidHurst(f64),
    #[error("sigma must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error("mean must be finite, got {0}")]
    InvalidMean(f64),
    #[error("sequence length must be at least 1")]
    ZeroLength,
    #[error(
        "length {requested} exceeds the largest single synthesis block of {max} samples; \
         use BoundedFgnStream to generate longer sequences block by block"
    )]
    LengthTooLarge { requested: usize, max: usize },
    #[error("circulant embedding has a negative eigenvalue ({0:e}); the embedding is not valid")]
    NegativeEigenvalue(f64),
    #[error("rate bounds must satisfy lo < hi, got [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("no sample fell inside [{lo}, {hi}]; mean and sigma are degenerate for these bounds")]
    DegenerateReject { lo: f64, hi: f64 },
    #[error("at least {needed} samples are required, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sequence has zero variance; the Hurst estimate is undefined")]
    ZeroVariance,
    #[error("normal probability mass inside [{lo}, {hi}] is below the numeric floor")]
    NegligibleMass { lo: f64, hi: f64 },
}

/// Parameters of one FGN realisation. Rates are in Mbps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgnParams {
    pub hurst: f64,
    pub mean: f64,
    pub sigma: f64,
    pub length: usize,
    pub seed: u64,
}

impl FgnParams {
    pub fn new(hurst: f64, mean: f64, sigma: f64, length: usize, seed: u64) -> Self {
        Self {
            hurst,
            mean,
            sigma,
            length,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), FgnError> {
        validate_shape(self.hurst, self.mean, self.sigma)?;
        if self.length == 0 {
            return Err(FgnError::ZeroLength);
        }
        Ok(())
    }
}

pub(crate) fn validate_shape(hurst: f64, mean: f64, sigma: f64) -> Result<(), FgnError> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(FgnError::InvalidHurst(hurst));
    }
    if !mean.is_finite() {
        return Err(FgnError::InvalidMean(mean));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(FgnError::InvalidSigma(sigma));
    }
    Ok(())
}
