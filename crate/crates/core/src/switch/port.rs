use std::collections::VecDeque;

use super::{EricaError, EricaParams, EricaPortState, IntervalSummary};
use crate::sim::{Cell, ServiceClass, SimTime};

/// Per-class FIFOs of one output port. Unbounded; nothing is dropped.
#[derive(Debug, Clone, Default)]
pub struct PortQueues {
    vbr: VecDeque<Cell>,
    abr: VecDeque<Cell>,
    max_abr_depth_seen: usize,
}

impl PortQueues {
    pub fn vbr_depth(&self) -> usize {
        self.vbr.len()
    }

    pub fn abr_depth(&self) -> usize {
        self.abr.len()
    }

    pub fn max_abr_depth_seen(&self) -> usize {
        self.max_abr_depth_seen
    }

    /// Queued cells, VBR first.
    pub fn iter(&self) -> impl Iterator<Item = &Cell> {
        self.vbr.iter().chain(self.abr.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.vbr.is_empty() && self.abr.is_empty()
    }

    pub fn push(&mut self, cell: Cell) {
        match cell.service {
            ServiceClass::Vbr => self.vbr.push_back(cell),
            ServiceClass::Abr => {
                self.abr.push_back(cell);
                self.max_abr_depth_seen = self.max_abr_depth_seen.max(self.abr.len());
            }
        }
    }

    /// Head of the VBR queue if any, else head of the ABR queue.
    pub fn pop(&mut self) -> Option<Cell> {
        self.vbr.pop_front().or_else(|| self.abr.pop_front())
    }
}

/// A switch output port: class queues plus the ERICA+ state of its link.
#[derive(Debug, Clone)]
pub struct OutputPort {
    queues: PortQueues,
    erica: EricaPortState,
    abr_departures: u64,
    vbr_departures: u64,
}

impl OutputPort {
    pub fn new(params: EricaParams, link_cell_rate: f64) -> Result<Self, EricaError> {
        Ok(Self {
            queues: PortQueues::default(),
            erica: EricaPortState::new(params, link_cell_rate)?,
            abr_departures: 0,
            vbr_departures: 0,
        })
    }

    pub fn queues(&self) -> &PortQueues {
        &self.queues
    }

    pub fn erica(&self) -> &EricaPortState {
        &self.erica
    }

    pub fn abr_departures(&self) -> u64 {
        self.abr_departures
    }

    pub fn vbr_departures(&self) -> u64 {
        self.vbr_departures
    }

    /// Queue `cell` in its class FIFO. If it is the ABR cell that completes
    /// the interval's cell count, the interval is closed immediately and
    /// its summary returned.
    pub fn enqueue_cell(&mut self, cell: Cell, now: SimTime) -> Option<IntervalSummary> {
        let is_abr = cell.is_abr();
        let trigger = is_abr && self.erica.record_abr_input(&cell);
        self.queues.push(cell);
        if trigger {
            Some(self.end_of_interval(now))
        } else {
            None
        }
    }

    /// Next cell for the link under strict VBR priority.
    pub fn dequeue_next(&mut self) -> Option<Cell> {
        let cell = self.queues.pop()?;
        match cell.service {
            ServiceClass::Vbr => {
                self.vbr_departures += 1;
                self.erica.record_vbr_output();
            }
            ServiceClass::Abr => self.abr_departures += 1,
        }
        Some(cell)
    }

    pub fn end_of_interval(&mut self, now: SimTime) -> IntervalSummary {
        self.erica.end_of_interval(now, self.queues.abr_depth())
    }

    pub fn process_backward_rm(&self, rm: crate::sim::RmPayload, vc: crate::sim::VcId) -> crate::sim::RmPayload {
        self.erica.process_backward_rm(rm, vc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{PayloadTag, VcId};

    fn port() -> OutputPort {
        OutputPort::new(EricaParams::default(), 149.76e6 / 424.0).unwrap()
    }

    fn abr() -> Cell {
        Cell::data(VcId(0), ServiceClass::Abr, PayloadTag::Filler)
    }

    fn vbr() -> Cell {
        Cell::data(VcId(15), ServiceClass::Vbr, PayloadTag::Filler)
    }

    #[test]
    fn class_separation() {
        let mut p = port();
        p.enqueue_cell(abr(), SimTime::ZERO);
        assert_eq!(p.queues().abr_depth(), 1);
        assert_eq!(p.erica().abr_input_cells(), 1);
        p.enqueue_cell(vbr(), SimTime::ZERO);
        assert_eq!(p.queues().vbr_depth(), 1);
        assert_eq!(p.erica().abr_input_cells(), 1);
    }

    #[test]
    fn vbr_has_strict_priority() {
        let mut p = port();
        for _ in 0..100 {
            p.enqueue_cell(abr(), SimTime::ZERO);
        }
        for _ in 0..3 {
            p.enqueue_cell(vbr(), SimTime::ZERO);
        }
        for _ in 0..3 {
            assert_eq!(p.dequeue_next().unwrap().service, ServiceClass::Vbr);
        }
        assert_eq!(p.dequeue_next().unwrap().service, ServiceClass::Abr);
        assert_eq!(p.erica().vbr_output_cells(), 3);
    }

    #[test]
    fn empty_port_idles() {
        let mut p = port();
        assert!(p.dequeue_next().is_none());
        p.enqueue_cell(abr(), SimTime::ZERO);
        assert!(p.dequeue_next().is_some());
        assert!(p.dequeue_next().is_none());
    }

    #[test]
    fn five_hundredth_cell_closes_interval() {
        let mut p = port();
        let t = SimTime::from_millis(1);
        for _ in 0..499 {
            assert!(p.enqueue_cell(abr(), t).is_none());
        }
        let s = p.enqueue_cell(abr(), t).expect("interval closes on cell 500");
        assert_eq!(s.time, t);
        assert_eq!(s.queue_cells, 500);
        assert_eq!(p.erica().abr_input_cells(), 0);
        assert_eq!(p.erica().interval_start(), t);
    }

    #[test]
    fn max_depth_tracks_peak() {
        let mut p = port();
        for _ in 0..10 {
            p.enqueue_cell(abr(), SimTime::ZERO);
        }
        for _ in 0..7 {
            p.dequeue_next();
        }
        p.enqueue_cell(abr(), SimTime::ZERO);
        assert_eq!(p.queues().max_abr_depth_seen(), 10);
        assert_eq!(p.queues().abr_depth(), 4);
    }
}
