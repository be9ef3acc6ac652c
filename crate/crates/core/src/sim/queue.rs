use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{SimError, SimTime};

struct Entry<E> {
    at: SimTime,
    seq: u64,
    event: E,
}

// BinaryHeap is a max-heap: invert so the earliest (time, seq) pops first.
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}

impl<E> Eq for Entry<E> {}

/// Pending events ordered by `(time, insertion sequence)`.
///
/// Equal-time events dispatch in the order they were scheduled. The clock
/// only moves forward: popping an event advances `now` to its time.
pub struct EventQueue<E> {
    heap: BinaryHeap<Entry<E>>,
    now: SimTime,
    next_seq: u64,
    dispatched: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            now: SimTime::ZERO,
            next_seq: 0,
            dispatched: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Number of events popped so far.
    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn schedule(&mut self, at: SimTime, event: E) -> Result<(), SimError> {
        if at < self.now {
            return Err(SimError::PastEvent { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { at, seq, event });
        Ok(())
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.at)
    }

    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        let entry = self.heap.pop()?;
        self.now = entry.at;
        self.dispatched += 1;
        Some((entry.at, entry.event))
    }

    /// Pop the next event if it is due at or before `t_end`.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        match self.heap.peek() {
            Some(e) if e.at <= t_end => self.pop(),
            _ => None,
        }
    }

    /// Dispatch every event with time `<= t_end`, then set the clock to
    /// `t_end`. The handler may schedule further events.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F)
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        while let Some((at, event)) = self.pop_until(t_end) {
            handler(self, at, event);
        }
        self.advance_to(t_end);
    }

    /// Move the clock forward to `t` without dispatching anything.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }
}
