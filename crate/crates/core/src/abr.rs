//! ABR end systems: rate-paced source with in-rate forward RM cells, and the
//! destination's RM turnaround.

use std::collections::VecDeque;

use thiserror::Error;

use crate::sim::{Cell, PayloadTag, RmDirection, RmPayload, ServiceClass, SimTime, VcId};

pub const DEFAULT_NRM: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbrError {
    #[error("invalid ABR rates: need 0 <= MCR ({mcr}) <= ICR ({icr}) <= PCR ({pcr}), PCR > 0")]
    InvalidRates { mcr: f64, icr: f64, pcr: f64 },
    #[error("Nrm must be at least 2, got {0}")]
    InvalidNrm(u32),
    #[error("destination turnaround expects a forward RM cell")]
    NotForwardRm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbrParams {
    /// Rates in cells/s.
    pub pcr: f64,
    pub mcr: f64,
    pub icr: f64,
    pub nrm: u32,
}

impl AbrParams {
    /// PCR at the link cell rate, MCR 0, ICR = PCR/32.
    pub fn for_link(cell_rate: f64) -> Self {
        Self {
            pcr: cell_rate,
            mcr: 0.0,
            icr: cell_rate / 32.0,
            nrm: DEFAULT_NRM,
        }
    }

    pub fn validate(&self) -> Result<(), AbrError> {
        let ok = self.pcr > 0.0
            && self.mcr >= 0.0
            && self.mcr <= self.icr
            && self.icr <= self.pcr
            && self.pcr.is_finite();
        if !ok {
            return Err(AbrError::InvalidRates {
                mcr: self.mcr,
                icr: self.icr,
                pcr: self.pcr,
            });
        }
        if self.nrm < 2 {
            return Err(AbrError::InvalidNrm(self.nrm));
        }
        Ok(())
    }
}

/// Pacing gap for `rate` cells/s, rounded to the nearest picosecond.
pub fn pacing_gap(rate: f64) -> SimTime {
    SimTime((1e12 / rate).round() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PendingSegment {
    seq: u64,
    len: u32,
    count: u16,
}

/// Result of a pacing slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub cell: Option<Cell>,
    /// Next slot to schedule, tagged with its generation.
    pub next: Option<(SimTime, u64)>,
}

#[derive(Debug, Clone)]
pub struct AbrSource {
    vc: VcId,
    params: AbrParams,
    acr: f64,
    cells_since_frm: u32,
    pending: VecDeque<PendingSegment>,
    cursor: u16,
    pending_cells: u64,
    last_emit: Option<SimTime>,
    armed: Option<SimTime>,
    generation: u64,
    emitted: u64,
    frm_sent: u64,
    data_sent: u64,
    brm_received: u64,
    acr_log: Option<Vec<(SimTime, f64)>>,
}

impl AbrSource {
    pub fn new(vc: VcId, params: AbrParams) -> Result<Self, AbrError> {
        params.validate()?;
        Ok(Self {
            vc,
            params,
            acr: params.icr,
            cells_since_frm: 0,
            pending: VecDeque::new(),
            cursor: 0,
            pending_cells: 0,
            last_emit: None,
            armed: None,
            generation: 0,
            emitted: 0,
            frm_sent: 0,
            data_sent: 0,
            brm_received: 0,
            acr_log: None,
        })
    }

    pub fn vc(&self) -> VcId {
        self.vc
    }

    pub fn params(&self) -> &AbrParams {
        &self.params
    }

    pub fn acr(&self) -> f64 {
        self.acr
    }

    pub fn cells_since_frm(&self) -> u32 {
        self.cells_since_frm
    }

    pub fn pending_cells(&self) -> u64 {
        self.pending_cells
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn frm_sent(&self) -> u64 {
        self.frm_sent
    }

    pub fn data_sent(&self) -> u64 {
        self.data_sent
    }

    pub fn brm_received(&self) -> u64 {
        self.brm_received
    }

    pub fn last_emit(&self) -> Option<SimTime> {
        self.last_emit
    }

    pub fn armed(&self) -> Option<SimTime> {
        self.armed
    }

    pub fn enable_acr_log(&mut self) {
        self.acr_log.get_or_insert_with(Vec::new);
    }

    pub fn drain_acr_log(&mut self) -> Vec<(SimTime, f64)> {
        self.acr_log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Queue one AAL5 PDU of `count` cells carrying bytes `seq..seq+len`.
    pub fn enqueue_segment(&mut self, seq: u64, len: u32, count: u16) {
        assert!(count > 0);
        self.pending.push_back(PendingSegment { seq, len, count });
        self.pending_cells += count as u64;
    }

    fn has_work(&self) -> bool {
        !self.pending.is_empty()
    }

    fn earliest_slot(&self, now: SimTime) -> SimTime {
        match self.last_emit {
            Some(t) => now.max(t + pacing_gap(self.acr)),
            None => now,
        }
    }

    fn arm(&mut self, at: SimTime) -> (SimTime, u64) {
        self.generation += 1;
        self.armed = Some(at);
        (at, self.generation)
    }

    /// Arm the pacing timer if the source has work and is not yet armed.
    pub fn wake(&mut self, now: SimTime) -> Option<(SimTime, u64)> {
        if self.armed.is_some() || !self.has_work() || self.acr <= 0.0 {
            return None;
        }
        let at = self.earliest_slot(now);
        Some(self.arm(at))
    }

    /// Handle the pacing slot `generation` firing at `at`. Stale
    /// generations are ignored.
    pub fn emit_slot(&mut self, at: SimTime, generation: u64) -> SlotOutcome {
        if generation != self.generation || self.armed != Some(at) {
            return SlotOutcome { cell: None, next: None };
        }
        self.armed = None;
        let cell = if self.cells_since_frm + 1 == self.params.nrm {
            self.cells_since_frm = 0;
            self.frm_sent += 1;
            Some(Cell::rm(self.vc, RmPayload::forward(self.params.pcr, self.acr)))
        } else if let Some(seg) = self.pending.front().copied() {
            let tag = PayloadTag::Segment {
                seq: seg.seq,
                len: seg.len,
                index: self.cursor,
                count: seg.count,
            };
            self.cursor += 1;
            if self.cursor == seg.count {
                self.cursor = 0;
                self.pending.pop_front();
            }
            self.pending_cells -= 1;
            self.cells_since_frm += 1;
            self.data_sent += 1;
            Some(Cell::data(self.vc, ServiceClass::Abr, tag))
        } else {
            None
        };
        if cell.is_some() {
            self.emitted += 1;
            self.last_emit = Some(at);
        }
        let next = if self.has_work() && self.acr > 0.0 {
            Some(self.arm(at + pacing_gap(self.acr)))
        } else {
            None
        };
        SlotOutcome { cell, next }
    }

    /// Adopt the explicit rate of a backward RM cell. Returns a new slot to
    /// schedule when the pacing instant moved.
    pub fn on_brm(&mut self, rm: RmPayload, now: SimTime) -> Option<(SimTime, u64)> {
        debug_assert_eq!(rm.direction, RmDirection::Backward);
        self.brm_received += 1;
        let acr = rm.er.clamp(self.params.mcr, self.params.pcr);
        if acr == self.acr {
            return None;
        }
        self.acr = acr;
        if let Some(log) = self.acr_log.as_mut() {
            log.push((now, acr));
        }
        if acr <= 0.0 {
            // stalled until a later BRM raises the rate
            self.armed = None;
            self.generation += 1;
            return None;
        }
        match self.armed {
            Some(old) => {
                let at = self.earliest_slot(now).max(now);
                if at == old {
                    None
                } else {
                    Some(self.arm(at))
                }
            }
            None => self.wake(now),
        }
    }
}

/// Destination turnaround: the forward RM cell comes back unchanged except
/// for its direction.
pub fn dest_turnaround(frm: &Cell) -> Result<Cell, AbrError> {
    match frm.rm {
        Some(rm) if rm.direction == RmDirection::Forward => Ok(Cell {
            rm: Some(RmPayload {
                direction: RmDirection::Backward,
                ..rm
            }),
            ..*frm
        }),
        _ => Err(AbrError::NotForwardRm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::CellKind;

    const PCR: f64 = 149.76e6 / 424.0;

    fn source() -> AbrSource {
        AbrSource::new(VcId(0), AbrParams::for_link(PCR)).unwrap()
    }

    /// Run the source until it goes idle, returning (time, cell) pairs.
    fn drain(src: &mut AbrSource, start: SimTime) -> Vec<(SimTime, Cell)> {
        let mut out = Vec::new();
        let mut next = src.wake(start);
        while let Some((t, g)) = next {
            let o = src.emit_slot(t, g);
            if let Some(c) = o.cell {
                out.push((t, c));
            }
            next = o.next;
        }
        out
    }

    #[test]
    fn every_32nd_cell_is_frm() {
        let mut s = source();
        s.enqueue_segment(0, 512 * 10, 120);
        let cells = drain(&mut s, SimTime::ZERO);
        for (k, (_, c)) in cells.iter().enumerate() {
            let is_frm = (k + 1) % 32 == 0;
            assert_eq!(c.kind() == CellKind::Rm, is_frm, "cell {}", k + 1);
            if is_frm {
                let rm = c.rm.unwrap();
                assert_eq!(rm.direction, RmDirection::Forward);
                assert_eq!(rm.er, PCR);
                assert_eq!(rm.ccr, s.acr());
            }
        }
        assert_eq!(s.data_sent(), 120);
        assert_eq!(s.frm_sent(), 3);
        assert_eq!(s.pending_cells(), 0);
    }

    #[test]
    fn pacing_gap_at_link_rate() {
        assert_eq!(pacing_gap(PCR), SimTime(2_831_197));
        assert!((pacing_gap(353_207.0).as_secs_f64() * 1e6 - 2.8312).abs() < 1e-4);
    }

    #[test]
    fn emissions_paced_at_icr() {
        let mut s = source();
        s.enqueue_segment(0, 512, 12);
        let cells = drain(&mut s, SimTime::ZERO);
        let gap = pacing_gap(PCR / 32.0);
        for w in cells.windows(2) {
            assert_eq!(w[1].0 - w[0].0, gap);
        }
    }

    #[test]
    fn idle_source_keeps_frm_position() {
        let mut s = source();
        s.enqueue_segment(0, 100, 20);
        drain(&mut s, SimTime::ZERO);
        assert_eq!(s.cells_since_frm(), 20);
        assert!(s.wake(SimTime::from_millis(10)).is_none());
        s.enqueue_segment(100, 100, 20);
        let cells = drain(&mut s, SimTime::from_millis(10));
        // 11 more data cells, then the FRM
        assert_eq!(cells[11].1.kind(), CellKind::Rm);
        assert!(cells[..11].iter().all(|(_, c)| c.kind() == CellKind::Data));
        // first slot after a long idle period is immediate
        assert_eq!(cells[0].0, SimTime::from_millis(10));
    }

    #[test]
    fn brm_sets_acr_with_clamp() {
        let mut s = source();
        s.on_brm(RmPayload::backward(PCR, 0.0), SimTime::ZERO);
        assert_eq!(s.acr(), PCR);
        s.on_brm(RmPayload::backward(50_000.0, 0.0), SimTime::ZERO);
        assert_eq!(s.acr(), 50_000.0);
        s.on_brm(RmPayload::backward(1e9, 0.0), SimTime::ZERO);
        assert_eq!(s.acr(), PCR);
        s.on_brm(RmPayload::backward(0.0, 0.0), SimTime::ZERO);
        assert_eq!(s.acr(), 0.0);
    }

    #[test]
    fn zero_acr_stalls_until_raised() {
        let mut s = source();
        s.enqueue_segment(0, 512, 12);
        let (t, g) = s.wake(SimTime::ZERO).unwrap();
        let o = s.emit_slot(t, g);
        assert!(o.cell.is_some());
        let (t1, g1) = o.next.unwrap();
        assert!(s.on_brm(RmPayload::backward(0.0, 0.0), SimTime::ZERO).is_none());
        // the old slot is now stale
        assert_eq!(s.emit_slot(t1, g1).cell, None);
        let now = SimTime::from_millis(1);
        let (t2, g2) = s.on_brm(RmPayload::backward(PCR, 0.0), now).unwrap();
        assert_eq!(t2, now);
        assert!(s.emit_slot(t2, g2).cell.is_some());
    }

    #[test]
    fn rate_increase_reschedules_earlier() {
        let mut s = source();
        s.enqueue_segment(0, 512, 12);
        let (t, g) = s.wake(SimTime::ZERO).unwrap();
        let (t1, _) = s.emit_slot(t, g).next.unwrap();
        assert_eq!(t1, pacing_gap(PCR / 32.0));
        let (t2, g2) = s.on_brm(RmPayload::backward(PCR, 0.0), SimTime(1000)).unwrap();
        assert_eq!(t2, pacing_gap(PCR));
        assert!(s.emit_slot(t2, g2).cell.is_some());
    }

    #[test]
    fn turnaround_preserves_fields() {
        let frm = Cell::rm(VcId(4), RmPayload::forward(PCR, 1234.5));
        let brm = dest_turnaround(&frm).unwrap();
        let rm = brm.rm.unwrap();
        assert_eq!(rm.direction, RmDirection::Backward);
        assert_eq!(rm.er, PCR);
        assert_eq!(rm.ccr, 1234.5);
        assert_eq!(brm.vc, VcId(4));
        let data = Cell::data(VcId(4), ServiceClass::Abr, PayloadTag::Filler);
        assert_eq!(dest_turnaround(&data), Err(AbrError::NotForwardRm));
        let back = Cell::rm(VcId(4), RmPayload::backward(PCR, 1.0));
        assert_eq!(dest_turnaround(&back), Err(AbrError::NotForwardRm));
    }

    #[test]
    fn params_validation() {
        assert!(AbrParams::for_link(PCR).validate().is_ok());
        let bad = AbrParams { mcr: PCR, ..AbrParams::for_link(PCR) };
        assert!(bad.validate().is_err());
        let bad = AbrParams { nrm: 1, ..AbrParams::for_link(PCR) };
        assert_eq!(bad.validate(), Err(AbrError::InvalidNrm(1)));
    }
}
