use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::synth::scale_path;
use super::{bound_sequence, validate_shape, BoundingMode, CirculantSynthesizer, FgnError, RateBounds};

/// Block size used when the caller does not choose one.
pub const DEFAULT_BLOCK_LEN: usize = 1 << 16;

/// Lazily generated, bounded FGN rate stream for one source.
///
/// Raw FGN is synthesised one block at a time and bounded on demand. Block 0
/// is the same realisation [`super::generate_fgn`] returns for the same seed;
/// block `k` uses ChaCha stream `k` of that seed.
#[derive(Debug)]
pub struct BoundedFgnStream {
    mean: f64,
    sigma: f64,
    seed: u64,
    mode: BoundingMode,
    bounds: RateBounds,
    block_len: usize,
    synth: Option<CirculantSynthesizer>,
    next_block: u64,
    buf: Vec<f64>,
    pos: usize,
}

impl BoundedFgnStream {
    pub fn new(
        hurst: f64,
        mean: f64,
        sigma: f64,
        seed: u64,
        mode: BoundingMode,
        bounds: RateBounds,
    ) -> Result<Self, FgnError> {
        Self::with_block_len(hurst, mean, sigma, seed, mode, bounds, DEFAULT_BLOCK_LEN)
    }

    pub fn with_block_len(
        hurst: f64,
        mean: f64,
        sigma: f64,
        seed: u64,
        mode: BoundingMode,
        bounds: RateBounds,
        block_len: usize,
    ) -> Result<Self, FgnError> {
        validate_shape(hurst, mean, sigma)?;
        RateBounds::new(bounds.lo, bounds.hi)?;
        let synth = if sigma > 0.0 {
            Some(CirculantSynthesizer::new(hurst, block_len)?)
        } else if block_len == 0 {
            return Err(FgnError::ZeroLength);
        } else {
            None
        };
        Ok(Self {
            mean,
            sigma,
            seed,
            mode,
            bounds,
            block_len,
            synth,
            next_block: 0,
            buf: Vec::new(),
            pos: 0,
        })
    }

    /// Number of raw blocks synthesised so far.
    pub fn blocks_generated(&self) -> u64 {
        self.next_block
    }

    pub fn next_value(&mut self) -> Result<f64, FgnError> {
        if self.pos == self.buf.len() {
            self.refill()?;
        }
        let v = self.buf[self.pos];
        self.pos += 1;
        Ok(v)
    }

    fn refill(&mut self) -> Result<(), FgnError> {
        let raw = match &self.synth {
            Some(synth) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(self.next_block);
                scale_path(synth.sample(&mut rng), self.mean, self.sigma)
            }
            None => vec![self.mean; self.block_len],
        };
        self.next_block += 1;
        self.buf = bound_sequence(&raw, self.mode, self.bounds)?.values;
        self.pos = 0;
        Ok(())
    }
}

impl Iterator for BoundedFgnStream {
    type Item = Result<f64, FgnError>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_value())
    }
}
