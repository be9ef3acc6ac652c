use std::str::FromStr;

use super::EricaError;
use crate::sim::{Cell, RmPayload, SimTime, VcId, CELL_BITS};

/// Target capacities below this (cells/s) are treated as no capacity.
const MIN_TARGET_CAPACITY: f64 = 1.0;
/// Overload factor used when there is no ABR capacity to share.
const STARVED_OVERLOAD: f64 = 1e12;
/// Floor on the overload factor when an interval saw no ABR input.
const MIN_OVERLOAD: f64 = 1e-9;

/// How the target queue length `Q0` is derived from `T0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Q0Mode {
    /// `Q0 = T0 * link cell rate`, a constant.
    #[default]
    LinkRate,
    /// `Q0 = T0 * ABR capacity` measured in the interval.
    AbrCapacity,
}

impl FromStr for Q0Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "link" | "link-rate" => Ok(Q0Mode::LinkRate),
            "abr" | "abr-capacity" => Ok(Q0Mode::AbrCapacity),
            other => Err(format!("unknown Q0 mode '{other}' (expected link-rate or abr-capacity)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EricaParams {
    /// Averaging interval ends after this many ABR input cells...
    pub interval_cells: u32,
    /// ...or after this long, whichever happens first.
    pub interval_time: SimTime,
    /// Target queueing delay.
    pub t0: SimTime,
    pub a: f64,
    pub b: f64,
    /// Queue drain limit factor: floor of the queue-control function.
    pub qdlf: f64,
    pub q0_mode: Q0Mode,
}

impl Default for EricaParams {
    fn default() -> Self {
        Self {
            interval_cells: 500,
            interval_time: SimTime::from_millis(5),
            t0: SimTime::from_micros(500),
            a: 1.15,
            b: 1.05,
            qdlf: 0.5,
            q0_mode: Q0Mode::LinkRate,
        }
    }
}

impl EricaParams {
    pub fn validate(&self) -> Result<(), EricaError> {
        if !(self.a > 1.0) {
            return Err(EricaError::InvalidParams("a must exceed 1"));
        }
        if !(self.b > 1.0) {
            return Err(EricaError::InvalidParams("b must exceed 1"));
        }
        if !(self.qdlf > 0.0 && self.qdlf <= 1.0) {
            return Err(EricaError::InvalidParams("QDLF must lie in (0, 1]"));
        }
        if self.interval_cells == 0 || self.interval_time == SimTime::ZERO {
            return Err(EricaError::InvalidParams("averaging interval must be non-empty"));
        }
        if self.t0 == SimTime::ZERO {
            return Err(EricaError::InvalidParams("T0 must be positive"));
        }
        Ok(())
    }

    /// Constant target queue for a link of `link_cell_rate` cells/s.
    pub fn q0_for_rate(&self, cell_rate: f64) -> f64 {
        self.t0.as_secs_f64() * cell_rate
    }
}

/// Queue-control fraction `f(q)`: two rectangular hyperbolas through
/// `(0, b)` and `(Q0, 1)` and through `(Q0, 1)` towards `1/(a-1)` scale,
/// floored at QDLF.
pub fn queue_control_fraction(q: f64, q0: f64, params: &EricaParams) -> Result<f64, EricaError> {
    if !(q0 > 0.0) {
        return Err(EricaError::NonPositiveQ0(q0));
    }
    let q = q.max(0.0);
    let g = if q <= q0 {
        params.b * q0 / ((params.b - 1.0) * q + q0)
    } else {
        params.a * q0 / ((params.a - 1.0) * q + q0)
    };
    Ok(g.max(params.qdlf))
}

/// Per-interval measurements published when an averaging interval closes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSummary {
    pub time: SimTime,
    pub elapsed: SimTime,
    pub queue_cells: usize,
    /// Rates in cells/s.
    pub vbr_rate: f64,
    pub abr_capacity: f64,
    pub target_capacity: f64,
    pub abr_input_rate: f64,
    pub overload: f64,
    pub fair_share: f64,
    pub active_vcs: usize,
    pub queue_factor: f64,
}

impl IntervalSummary {
    pub fn cells_to_mbps(rate: f64) -> f64 {
        rate * CELL_BITS as f64 / 1e6
    }
}

/// ERICA+ measurement and allocation state of one output port.
#[derive(Debug, Clone)]
pub struct EricaPortState {
    params: EricaParams,
    link_cell_rate: f64,
    interval_start: SimTime,
    abr_input_cells: u32,
    vbr_output_cells: u64,
    active: Vec<bool>,
    active_count: usize,
    last_ccr: Vec<Option<f64>>,
    q0: f64,
    target_capacity: f64,
    overload: f64,
    fair_share: f64,
    n_active: usize,
    intervals: u64,
}

impl EricaPortState {
    pub fn new(params: EricaParams, link_cell_rate: f64) -> Result<Self, EricaError> {
        params.validate()?;
        let q0 = params.q0_for_rate(link_cell_rate);
        Ok(Self {
            params,
            link_cell_rate,
            interval_start: SimTime::ZERO,
            abr_input_cells: 0,
            vbr_output_cells: 0,
            active: Vec::new(),
            active_count: 0,
            last_ccr: Vec::new(),
            q0,
            target_capacity: link_cell_rate,
            overload: 1.0,
            fair_share: link_cell_rate,
            n_active: 1,
            intervals: 0,
        })
    }

    pub fn params(&self) -> &EricaParams {
        &self.params
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn target_capacity(&self) -> f64 {
        self.target_capacity
    }

    pub fn overload(&self) -> f64 {
        self.overload
    }

    pub fn fair_share(&self) -> f64 {
        self.fair_share
    }

    pub fn n_active(&self) -> usize {
        self.n_active
    }

    pub fn abr_input_cells(&self) -> u32 {
        self.abr_input_cells
    }

    pub fn vbr_output_cells(&self) -> u64 {
        self.vbr_output_cells
    }

    pub fn intervals_completed(&self) -> u64 {
        self.intervals
    }

    pub fn interval_start(&self) -> SimTime {
        self.interval_start
    }

    /// When the current interval ends if the cell count is not reached first.
    pub fn interval_deadline(&self) -> SimTime {
        self.interval_start + self.params.interval_time
    }

    pub fn last_ccr(&self, vc: VcId) -> Option<f64> {
        self.last_ccr.get(vc.index()).copied().flatten()
    }

    /// Account one ABR input cell. Returns true once the interval's cell
    /// count is reached.
    pub fn record_abr_input(&mut self, cell: &Cell) -> bool {
        let i = cell.vc.index();
        if i >= self.active.len() {
            self.active.resize(i + 1, false);
            self.last_ccr.resize(i + 1, None);
        }
        if !self.active[i] {
            self.active[i] = true;
            self.active_count += 1;
        }
        if let Some(rm) = cell.rm.filter(|_| cell.is_forward_rm()) {
            self.last_ccr[i] = Some(rm.ccr);
        }
        self.abr_input_cells += 1;
        self.abr_input_cells >= self.params.interval_cells
    }

    pub fn record_vbr_output(&mut self) {
        self.vbr_output_cells += 1;
    }

    /// Close the averaging interval at `now` with `queue_cells` ABR cells
    /// waiting, recompute the allocation and start a new interval.
    pub fn end_of_interval(&mut self, now: SimTime, queue_cells: usize) -> IntervalSummary {
        let elapsed = now.saturating_sub(self.interval_start).max(SimTime(1));
        let secs = elapsed.as_secs_f64();
        let vbr_rate = self.vbr_output_cells as f64 / secs;
        let abr_capacity = (self.link_cell_rate - vbr_rate).max(0.0);
        if self.params.q0_mode == Q0Mode::AbrCapacity {
            self.q0 = self.params.q0_for_rate(abr_capacity).max(1.0);
        }
        let f = queue_control_fraction(queue_cells as f64, self.q0, &self.params)
            .expect("q0 is kept positive");
        let target = f * abr_capacity;
        let abr_input_rate = self.abr_input_cells as f64 / secs;
        self.overload = if target < MIN_TARGET_CAPACITY {
            STARVED_OVERLOAD
        } else {
            (abr_input_rate / target).max(MIN_OVERLOAD)
        };
        self.target_capacity = target;
        self.n_active = self.active_count.max(1);
        self.fair_share = target / self.n_active as f64;
        self.intervals += 1;

        let summary = IntervalSummary {
            time: now,
            elapsed,
            queue_cells,
            vbr_rate,
            abr_capacity,
            target_capacity: target,
            abr_input_rate,
            overload: self.overload,
            fair_share: self.fair_share,
            active_vcs: self.active_count,
            queue_factor: f,
        };

        self.interval_start = now;
        self.abr_input_cells = 0;
        self.vbr_output_cells = 0;
        self.active.iter_mut().for_each(|a| *a = false);
        self.active_count = 0;
        summary
    }

    /// Explicit rate for a backward RM cell of `vc`. Before the first
    /// interval completes the cell passes through untouched.
    pub fn process_backward_rm(&self, rm: RmPayload, vc: VcId) -> RmPayload {
        if self.intervals == 0 {
            return rm;
        }
        let share = match self.last_ccr(vc) {
            Some(ccr) => self.fair_share.max(ccr / self.overload),
            None => self.fair_share,
        };
        let er = share.min(self.target_capacity);
        RmPayload {
            er: rm.er.min(er),
            ..rm
        }
    }
}
