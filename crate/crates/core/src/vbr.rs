//! Piecewise-CBR MPEG-2 single-program transport stream sources and their
//! multiplex onto one VBR virtual circuit.
//!
//! Each source alternates inter-MPCR intervals `T_i ~ U[20 ms, 100 ms]` with
//! a rate `R_i` drawn from its own REJECT-bounded FGN stream, and emits cells
//! uniformly spaced at `R_i` inside the interval. Fractional cells carry over
//! to the next interval as credit.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fgn::{BoundedFgnStream, BoundingMode, FgnError, RateBounds, DEFAULT_BLOCK_LEN};
use crate::sim::{Cell, PayloadTag, ServiceClass, SimTime, VcId, CELL_BITS};

/// Leaky-bucket peak rate of one video source, Mbps.
pub const PEAK_RATE_MBPS: f64 = 15.0;
pub const DEFAULT_MPCR_MIN: SimTime = SimTime::from_millis(20);
pub const DEFAULT_MPCR_MAX: SimTime = SimTime::from_millis(100);

// ChaCha stream for inter-MPCR intervals; FGN blocks use the low stream ids.
const INTERVAL_STREAM: u64 = u64::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VbrError {
    #[error("invalid MPCR spacing: need 0 < min <= max, got [{min}, {max}]")]
    InvalidMpcrSpacing { min: SimTime, max: SimTime },
    #[error("rate bound hi = {0} Mbps exceeds the {PEAK_RATE_MBPS} Mbps peak")]
    AbovePeak(f64),
    #[error("a VBR multiplex needs at least one source")]
    NoSources,
    #[error(transparent)]
    Fgn(#[from] FgnError),
}

/// Configuration of one SPTS video source.
#[derive(Debug, Clone, PartialEq)]
pub struct SptsSourceConfig {
    pub hurst: f64,
    pub mean_mbps: f64,
    pub sigma_mbps: f64,
    pub seed: u64,
    pub bounds: RateBounds,
    pub mpcr_min: SimTime,
    pub mpcr_max: SimTime,
    pub block_len: usize,
}

impl SptsSourceConfig {
    pub fn new(hurst: f64, mean_mbps: f64, sigma_mbps: f64, seed: u64) -> Self {
        Self {
            hurst,
            mean_mbps,
            sigma_mbps,
            seed,
            bounds: RateBounds::default(),
            mpcr_min: DEFAULT_MPCR_MIN,
            mpcr_max: DEFAULT_MPCR_MAX,
            block_len: DEFAULT_BLOCK_LEN,
        }
    }

    pub fn validate(&self) -> Result<(), VbrError> {
        if self.mpcr_min == SimTime::ZERO || self.mpcr_min > self.mpcr_max {
            return Err(VbrError::InvalidMpcrSpacing {
                min: self.mpcr_min,
                max: self.mpcr_max,
            });
        }
        if self.bounds.hi > PEAK_RATE_MBPS {
            return Err(VbrError::AbovePeak(self.bounds.hi));
        }
        RateBounds::new(self.bounds.lo, self.bounds.hi)?;
        Ok(())
    }
}

/// Draw one inter-MPCR interval uniformly from `[min, max]`.
pub fn next_mpcr_interval<R: Rng + ?Sized>(rng: &mut R, min: SimTime, max: SimTime) -> SimTime {
    if min >= max {
        return min;
    }
    SimTime(rng.random_range(min.0..=max.0))
}

/// Cell schedule for one constant-rate interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEmission {
    pub count: u64,
    /// Spacing between consecutive cells, picoseconds.
    pub gap_ps: f64,
    pub credit_out: f64,
}

impl IntervalEmission {
    /// Emission time of cell `k` for an interval starting at `origin`.
    pub fn time_of(&self, k: u64, origin: SimTime) -> SimTime {
        origin + SimTime((k as f64 * self.gap_ps).round() as u64)
    }

    pub fn times(&self, origin: SimTime) -> impl Iterator<Item = SimTime> + '_ {
        (0..self.count).map(move |k| self.time_of(k, origin))
    }
}

/// Budget `x = R*T/424 + credit_in`; emit `floor(x)` uniformly spaced cells
/// and carry the fraction.
pub fn emit_interval_cells(rate_mbps: f64, duration: SimTime, credit_in: f64) -> IntervalEmission {
    if rate_mbps <= 0.0 {
        return IntervalEmission {
            count: 0,
            gap_ps: f64::INFINITY,
            credit_out: credit_in,
        };
    }
    let bits = rate_mbps * 1e6 * duration.as_secs_f64();
    let budget = bits / CELL_BITS as f64 + credit_in;
    let count = budget.floor();
    IntervalEmission {
        count: count as u64,
        gap_ps: CELL_BITS as f64 * 1e6 / rate_mbps,
        credit_out: (budget - count).clamp(0.0, 1.0 - f64::EPSILON),
    }
}

/// One MPCR boundary: the start of an interval and the rate chosen for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcrRecord {
    pub time: SimTime,
    pub rate_mbps: f64,
    pub interval: SimTime,
}

/// Runtime state of one SPTS source.
#[derive(Debug)]
pub struct SptsSource {
    rates: BoundedFgnStream,
    interval_rng: ChaCha8Rng,
    mpcr_min: SimTime,
    mpcr_max: SimTime,
    current_rate: f64,
    interval_start: SimTime,
    interval_len: SimTime,
    emission: IntervalEmission,
    next_index: u64,
    credit: f64,
    cells_emitted: u64,
    nominal_cells: f64,
    mpcr_log: Option<Vec<MpcrRecord>>,
}

impl SptsSource {
    pub fn new(config: &SptsSourceConfig) -> Result<Self, VbrError> {
        config.validate()?;
        let rates = BoundedFgnStream::with_block_len(
            config.hurst,
            config.mean_mbps,
            config.sigma_mbps,
            config.seed,
            BoundingMode::Reject,
            config.bounds,
            config.block_len,
        )?;
        let mut interval_rng = ChaCha8Rng::seed_from_u64(config.seed);
        interval_rng.set_stream(INTERVAL_STREAM);
        let mut src = Self {
            rates,
            interval_rng,
            mpcr_min: config.mpcr_min,
            mpcr_max: config.mpcr_max,
            current_rate: 0.0,
            interval_start: SimTime::ZERO,
            interval_len: SimTime::ZERO,
            emission: emit_interval_cells(0.0, SimTime::ZERO, 0.0),
            next_index: 0,
            credit: 0.0,
            cells_emitted: 0,
            nominal_cells: 0.0,
            mpcr_log: None,
        };
        src.begin_interval(SimTime::ZERO)?;
        Ok(src)
    }

    /// Keep a record of every MPCR boundary (for tracing).
    pub fn enable_mpcr_log(&mut self) {
        let first = MpcrRecord {
            time: self.interval_start,
            rate_mbps: self.current_rate,
            interval: self.interval_len,
        };
        self.mpcr_log = Some(vec![first]);
    }

    pub fn drain_mpcr_log(&mut self) -> Vec<MpcrRecord> {
        self.mpcr_log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Next interval rate `R_i` from the bounded FGN stream.
    pub fn next_interval_rate(&mut self) -> Result<f64, VbrError> {
        Ok(self.rates.next_value()?)
    }

    fn begin_interval(&mut self, origin: SimTime) -> Result<(), VbrError> {
        let len = next_mpcr_interval(&mut self.interval_rng, self.mpcr_min, self.mpcr_max);
        let rate = self.next_interval_rate()?;
        self.emission = emit_interval_cells(rate, len, self.credit);
        self.credit = self.emission.credit_out;
        self.current_rate = rate;
        self.interval_start = origin;
        self.interval_len = len;
        self.next_index = 0;
        self.nominal_cells += rate * 1e6 * len.as_secs_f64() / CELL_BITS as f64;
        if let Some(log) = self.mpcr_log.as_mut() {
            log.push(MpcrRecord {
                time: origin,
                rate_mbps: rate,
                interval: len,
            });
        }
        Ok(())
    }

    pub fn current_rate(&self) -> f64 {
        self.current_rate
    }

    pub fn interval_start(&self) -> SimTime {
        self.interval_start
    }

    pub fn interval_end(&self) -> SimTime {
        self.interval_start + self.interval_len
    }

    pub fn credit(&self) -> f64 {
        self.credit
    }

    pub fn cells_emitted(&self) -> u64 {
        self.cells_emitted
    }

    /// `sum R_i * T_i / 424` over every interval started so far.
    pub fn nominal_cells(&self) -> f64 {
        self.nominal_cells
    }

    /// Cells still to come in the current interval.
    pub fn remaining_in_interval(&self) -> u64 {
        self.emission.count - self.next_index
    }

    /// Time of the next cell, or of the next MPCR boundary when the current
    /// interval has no cells left.
    pub fn next_event_time(&self) -> SimTime {
        if self.next_index < self.emission.count {
            self.emission.time_of(self.next_index, self.interval_start)
        } else {
            self.interval_end()
        }
    }

    /// Process the next event. Returns the emission time if it was a cell,
    /// `None` if it was an MPCR boundary.
    pub fn step(&mut self) -> Result<Option<SimTime>, VbrError> {
        if self.next_index < self.emission.count {
            let t = self.emission.time_of(self.next_index, self.interval_start);
            self.next_index += 1;
            self.cells_emitted += 1;
            Ok(Some(t))
        } else {
            let end = self.interval_end();
            self.begin_interval(end)?;
            Ok(None)
        }
    }
}

/// A cell produced by the multiplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VbrCell {
    pub time: SimTime,
    pub source: usize,
    pub cell: Cell,
}

/// Time-ordered merge of N SPTS sources onto one VBR VC.
#[derive(Debug)]
pub struct VbrMux {
    sources: Vec<SptsSource>,
    vc: VcId,
}

impl VbrMux {
    pub fn new(sources: Vec<SptsSource>, vc: VcId) -> Result<Self, VbrError> {
        if sources.is_empty() {
            return Err(VbrError::NoSources);
        }
        Ok(Self { sources, vc })
    }

    /// `n` sources sharing (hurst, mean, sigma). Source seeds are successive
    /// draws from a ChaCha8 generator seeded with `seed`, so runs with
    /// different seeds share no sources.
    pub fn homogeneous(
        n: usize,
        hurst: f64,
        mean_mbps: f64,
        sigma_mbps: f64,
        seed: u64,
        vc: VcId,
    ) -> Result<Self, VbrError> {
        let mut seeder = ChaCha8Rng::seed_from_u64(seed);
        let sources = (0..n)
            .map(|_| SptsSource::new(&SptsSourceConfig::new(hurst, mean_mbps, sigma_mbps, seeder.next_u64())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sources, vc)
    }

    pub fn vc(&self) -> VcId {
        self.vc
    }

    pub fn sources(&self) -> &[SptsSource] {
        &self.sources
    }

    pub fn sources_mut(&mut self) -> &mut [SptsSource] {
        &mut self.sources
    }

    fn earliest(&self) -> usize {
        let mut best = 0;
        let mut best_t = self.sources[0].next_event_time();
        for (i, s) in self.sources.iter().enumerate().skip(1) {
            let t = s.next_event_time();
            if t < best_t {
                best = i;
                best_t = t;
            }
        }
        best
    }

    /// Time of the next source event (cell or MPCR boundary).
    pub fn peek_time(&self) -> SimTime {
        self.sources[self.earliest()].next_event_time()
    }

    /// Advance the earliest source by one event; ties go to the lowest index.
    pub fn step(&mut self) -> Result<Option<VbrCell>, VbrError> {
        let i = self.earliest();
        Ok(self.sources[i].step()?.map(|time| VbrCell {
            time,
            source: i,
            cell: Cell::data(self.vc, ServiceClass::Vbr, PayloadTag::Filler),
        }))
    }

    /// Earliest pending cell across all sources, skipping MPCR boundaries.
    /// Returns `None` if no cell is due at or before `horizon`.
    pub fn next_cell(&mut self, horizon: SimTime) -> Result<Option<VbrCell>, VbrError> {
        while self.peek_time() <= horizon {
            if let Some(c) = self.step()? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_support_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let t = next_mpcr_interval(&mut rng, DEFAULT_MPCR_MIN, DEFAULT_MPCR_MAX);
            assert!(t >= DEFAULT_MPCR_MIN && t <= DEFAULT_MPCR_MAX);
            sum += t.as_millis_f64();
        }
        assert!((sum / n as f64 - 60.0).abs() < 1.0);
    }

    #[test]
    fn degenerate_interval_is_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fifty = SimTime::from_millis(50);
        assert!((0..100).all(|_| next_mpcr_interval(&mut rng, fifty, fifty) == fifty));
    }

    #[test]
    fn interval_budget_examples() {
        let e = emit_interval_cells(0.0, SimTime::from_millis(50), 0.0);
        assert_eq!((e.count, e.credit_out), (0, 0.0));
        let e = emit_interval_cells(0.0, SimTime::from_millis(50), 0.3);
        assert_eq!((e.count, e.credit_out), (0, 0.3));

        let e = emit_interval_cells(15.0, SimTime::from_millis(20), 0.0);
        assert_eq!(e.count, 707);
        assert!((e.credit_out - 0.547).abs() < 1e-3);

        let e = emit_interval_cells(5.0, SimTime::from_millis(100), 0.9);
        assert_eq!(e.count, 1180);
    }

    #[test]
    fn cells_uniformly_spaced_inside_interval() {
        let e = emit_interval_cells(15.0, SimTime::from_millis(20), 0.0);
        let origin = SimTime::from_millis(3);
        let times: Vec<SimTime> = e.times(origin).collect();
        assert_eq!(times[0], origin);
        let gap = 424.0 / 15e6 * 1e12;
        for (k, t) in times.iter().enumerate() {
            let want = origin.0 as f64 + k as f64 * gap;
            assert!((t.0 as f64 - want).abs() <= 0.5);
        }
        assert!(*times.last().unwrap() < origin + SimTime::from_millis(20));
    }

    #[test]
    fn constant_source_rate() {
        let mut src = SptsSource::new(&SptsSourceConfig::new(0.8, 5.0, 0.0, 1)).unwrap();
        for _ in 0..50 {
            assert_eq!(src.next_interval_rate().unwrap(), 5.0);
        }
    }

    #[test]
    fn credit_is_conserved_at_boundaries() {
        let mut src = SptsSource::new(&SptsSourceConfig::new(0.8, 5.0, 5.0, 77)).unwrap();
        let mut boundaries = 0;
        while boundaries < 300 {
            if src.step().unwrap().is_none() {
                boundaries += 1;
                // the interval just started has emitted nothing yet
                let started = src.nominal_cells()
                    - src.current_rate() * 1e6 * (src.interval_end() - src.interval_start()).as_secs_f64()
                        / 424.0;
                let diff = started - src.cells_emitted() as f64;
                assert!((0.0..1.0 + 1e-6).contains(&diff), "diff {diff}");
                assert!((0.0..1.0).contains(&src.credit()));
            }
        }
    }

    #[test]
    fn singleton_mux_matches_source() {
        let cfg = SptsSourceConfig::new(0.8, 7.5, 7.0, 3);
        let mut solo = SptsSource::new(&cfg).unwrap();
        let mut mux = VbrMux::new(vec![SptsSource::new(&cfg).unwrap()], VcId(9)).unwrap();
        let horizon = SimTime::from_secs(2);
        let mut solo_times = Vec::new();
        while solo.next_event_time() <= horizon {
            if let Some(t) = solo.step().unwrap() {
                solo_times.push(t);
            }
        }
        let mut mux_times = Vec::new();
        while let Some(c) = mux.next_cell(horizon).unwrap() {
            assert_eq!(c.cell.vc, VcId(9));
            assert_eq!(c.cell.service, ServiceClass::Vbr);
            mux_times.push(c.time);
        }
        assert_eq!(solo_times, mux_times);
    }

    #[test]
    fn mux_output_is_time_ordered() {
        let mut mux = VbrMux::homogeneous(9, 0.8, 5.0, 5.0, 11, VcId(15)).unwrap();
        let mut last = SimTime::ZERO;
        let mut n = 0;
        while let Some(c) = mux.next_cell(SimTime::from_secs(1)).unwrap() {
            assert!(c.time >= last);
            last = c.time;
            n += 1;
        }
        assert!(n > 10_000);
    }

    #[test]
    fn earliest_first_and_index_tie_break() {
        let cfg = SptsSourceConfig::new(0.8, 5.0, 0.0, 1);
        let mut mux = VbrMux::new(
            vec![SptsSource::new(&cfg).unwrap(), SptsSource::new(&cfg).unwrap()],
            VcId(0),
        )
        .unwrap();
        // identical sources: every cell time appears twice, lower index first
        let a = mux.next_cell(SimTime::MAX).unwrap().unwrap();
        let b = mux.next_cell(SimTime::MAX).unwrap().unwrap();
        assert_eq!(a.time, b.time);
        assert_eq!((a.source, b.source), (0, 1));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SptsSourceConfig::new(0.8, 5.0, 5.0, 1);
        cfg.bounds = RateBounds { lo: 0.0, hi: 20.0 };
        assert_eq!(cfg.validate(), Err(VbrError::AbovePeak(20.0)));
        let mut cfg = SptsSourceConfig::new(0.8, 5.0, 5.0, 1);
        cfg.mpcr_min = SimTime::from_millis(200);
        assert!(matches!(cfg.validate(), Err(VbrError::InvalidMpcrSpacing { .. })));
        assert_eq!(VbrMux::new(vec![], VcId(0)).unwrap_err(), VbrError::NoSources);
    }
}
