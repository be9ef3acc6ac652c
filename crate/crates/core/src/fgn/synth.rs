use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{FgnError, FgnParams};

/// Largest sequence produced by one synthesis call. The embedding uses twice
/// the next power of two, so this caps a single FFT at 2^23 points.
pub const MAX_BLOCK_LEN: usize = 1 << 22;

/// Exact autocovariance of FGN at `lag`:
/// `(sigma^2 / 2) (|k+1|^2H - 2|k|^2H + |k-1|^2H)`.
pub fn fgn_autocovariance(lag: u64, hurst: f64, sigma: f64) -> f64 {
    let k = lag as f64;
    let h2 = 2.0 * hurst;
    let unit = 0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2));
    sigma * sigma * unit
}

/// Circulant-embedding (Davies-Harte) synthesizer for unit-variance FGN.
///
/// The first row of a `2m`-point circulant matrix is built from the
/// autocovariance, its eigenvalues are obtained with one FFT, and each sample
/// path costs one more FFT of `2m` complex Gaussians scaled by the square
/// roots of those eigenvalues. The map from the `2m` input normals to the
/// output is linear, which is what [`CirculantSynthesizer::synthesize`]
/// exposes so the covariance can be checked exactly.
pub struct CirculantSynthesizer {
    len: usize,
    half: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSynthesizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSynthesizer")
            .field("len", &self.len)
            .field("half", &self.half)
            .finish()
    }
}

impl CirculantSynthesizer {
    pub fn new(hurst: f64, len: usize) -> Result<Self, FgnError> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(FgnError::InvalidHurst(hurst));
        }
        if len == 0 {
            return Err(FgnError::ZeroLength);
        }
        if len > MAX_BLOCK_LEN {
            return Err(FgnError::LengthTooLarge {
                requested: len,
                max: MAX_BLOCK_LEN,
            });
        }
        let half = len.next_power_of_two().max(2);
        let size = 2 * half;

        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|j| {
                let lag = if j <= half { j } else { size - j };
                Complex::new(fgn_autocovariance(lag as u64, hurst, 1.0), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);

        let max_eig = row.iter().map(|c| c.re).fold(0.0_f64, f64::max);
        let mut scale = Vec::with_capacity(size);
        for (k, c) in row.iter().enumerate() {
            let mut eig = c.re;
            if eig < 0.0 {
                // round-off only; a genuinely negative eigenvalue invalidates the embedding
                if eig < -1e-9 * max_eig {
                    return Err(FgnError::NegativeEigenvalue(eig));
                }
                eig = 0.0;
            }
            let denom = if k == 0 || k == half {
                size as f64
            } else {
                2.0 * size as f64
            };
            scale.push((eig / denom).sqrt());
        }

        Ok(Self {
            len,
            half,
            scale,
            fft,
        })
    }

    /// Number of output samples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of standard normals consumed per sample path.
    pub fn input_len(&self) -> usize {
        2 * self.half
    }

    /// Map `input_len()` standard normals to `len()` unit-variance FGN samples.
    ///
    /// `normals[0]` and `normals[1]` drive the two real frequencies (0 and the
    /// Nyquist bin); `normals[2k]`, `normals[2k+1]` are the real and imaginary
    /// parts for frequency `k`, mirrored as a conjugate at `2m - k`.
    pub fn synthesize(&self, normals: &[f64]) -> Vec<f64> {
        assert_eq!(normals.len(), self.input_len(), "wrong number of input normals");
        let size = 2 * self.half;
        let mut w = vec![Complex::new(0.0, 0.0); size];
        w[0] = Complex::new(self.scale[0] * normals[0], 0.0);
        w[self.half] = Complex::new(self.scale[self.half] * normals[1], 0.0);
        for k in 1..self.half {
            let s = self.scale[k];
            let v = Complex::new(s * normals[2 * k], s * normals[2 * k + 1]);
            w[k] = v;
            w[size - k] = v.conj();
        }
        self.fft.process(&mut w);
        w.truncate(self.len);
        w.into_iter().map(|c| c.re).collect()
    }

    /// Draw one unit-variance sample path from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let normals: Vec<f64> = (0..self.input_len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.synthesize(&normals)
    }
}

/// Generate `params.length` raw (unbounded) FGN samples with the requested
/// mean and standard deviation. Output is a pure function of `params`.
pub fn generate_fgn(params: &FgnParams) -> Result<Vec<f64>, FgnError> {
    params.validate()?;
    if params.length > MAX_BLOCK_LEN {
        return Err(FgnError::LengthTooLarge {
            requested: params.length,
            max: MAX_BLOCK_LEN,
        });
    }
    if params.sigma == 0.0 {
        return Ok(vec![params.mean; params.length]);
    }
    let synth = CirculantSynthesizer::new(params.hurst, params.length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok(scale_path(synth.sample(&mut rng), params.mean, params.sigma))
}

pub(crate) fn scale_path(unit: Vec<f64>, mean: f64, sigma: f64) -> Vec<f64> {
    unit.into_iter().map(|x| mean + sigma * x).collect()
}
