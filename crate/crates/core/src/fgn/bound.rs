use std::fmt;
use std::str::FromStr;

use super::estimate::sample_mean_sigma;
use super::FgnError;

/// Valid range for a per-interval rate, in Mbps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub lo: f64,
    pub hi: f64,
}

impl RateBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self, FgnError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(FgnError::InvalidBounds { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl Default for RateBounds {
    fn default() -> Self {
        Self { lo: 0.0, hi: 15.0 }
    }
}

/// How raw FGN samples outside [`RateBounds`] are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundingMode {
    /// Use `round(e^x)`, clamped into the bounds.
    Exponentiate,
    /// Clamp below to `lo` and above to `hi`.
    ClipZero,
    /// Clamp below to `lo`, carrying the clipped deficit into the following
    /// samples so the mean is preserved where possible; clamp above to `hi`.
    ClipCompensate,
    /// Drop every sample outside the bounds.
    #[default]
    Reject,
}

impl fmt::Display for BoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundingMode::Exponentiate => "exponentiate",
            BoundingMode::ClipZero => "clip-zero",
            BoundingMode::ClipCompensate => "clip-compensate",
            BoundingMode::Reject => "reject",
        };
        f.write_str(s)
    }
}

impl FromStr for BoundingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "exponentiate" | "exp" => Ok(BoundingMode::Exponentiate),
            "clip-zero" => Ok(BoundingMode::ClipZero),
            "clip-compensate" => Ok(BoundingMode::ClipCompensate),
            "reject" => Ok(BoundingMode::Reject),
            other => Err(format!(
                "unknown bounding mode '{other}' (expected exponentiate, clip-zero, clip-compensate or reject)"
            )),
        }
    }
}

/// A bounded sequence of per-interval rates together with its achieved moments.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSequence {
    pub values: Vec<f64>,
    pub achieved_mean: f64,
    pub achieved_sigma: f64,
}

impl RateSequence {
    fn from_values(values: Vec<f64>) -> Self {
        let (achieved_mean, achieved_sigma) = sample_mean_sigma(&values);
        Self {
            values,
            achieved_mean,
            achieved_sigma,
        }
    }
}

pub fn bound_sequence(
    raw: &[f64],
    mode: BoundingMode,
    bounds: RateBounds,
) -> Result<RateSequence, FgnError> {
    if raw.is_empty() {
        return Err(FgnError::EmptyInput);
    }
    let RateBounds { lo, hi } = bounds;
    let values: Vec<f64> = match mode {
        BoundingMode::Reject => raw.iter().copied().filter(|&x| bounds.contains(x)).collect(),
        BoundingMode::ClipZero => raw.iter().map(|&x| x.clamp(lo, hi)).collect(),
        BoundingMode::ClipCompensate => {
            let mut deficit = 0.0;
            raw.iter()
                .map(|&x| {
                    if x < lo {
                        deficit += lo - x;
                        return lo;
                    }
                    let v = x - deficit;
                    if v < lo {
                        deficit = lo - v;
                        lo
                    } else {
                        deficit = 0.0;
                        v.min(hi)
                    }
                })
                .collect()
        }
        BoundingMode::Exponentiate => raw.iter().map(|&x| x.exp().round().clamp(lo, hi)).collect(),
    };
    if values.is_empty() {
        return Err(FgnError::DegenerateReject { lo, hi });
    }
    Ok(RateSequence::from_values(values))
}
