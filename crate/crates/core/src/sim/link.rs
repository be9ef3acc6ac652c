use std::collections::VecDeque;

use super::{SimTime, CELL_BITS};

/// Line rate of every link in the experiments, bits/s.
pub const DEFAULT_LINK_RATE_BPS: f64 = 149.76e6;

/// Fibre propagation delay per kilometre (5 us/km).
pub const PROPAGATION_PER_KM: SimTime = SimTime::from_micros(5);

pub fn propagation_for_km(km: f64) -> SimTime {
    SimTime::from_secs_f64(km * PROPAGATION_PER_KM.as_secs_f64())
}

/// Time to clock one cell onto a link of `rate_bps`.
pub fn serialization_time(rate_bps: f64) -> SimTime {
    SimTime::from_secs_f64(CELL_BITS as f64 / rate_bps)
}

/// Output-serialised FIFO link carrying items of type `T`.
///
/// Items in flight are kept in send order; since every item spends the same
/// propagation time on the wire, arrivals at the far end are non-decreasing.
#[derive(Debug, Clone)]
pub struct Link<T> {
    rate_bps: f64,
    propagation: SimTime,
    serialization: SimTime,
    busy_until: SimTime,
    in_flight: VecDeque<(SimTime, T)>,
    transmitted: u64,
}

impl<T> Link<T> {
    /// Panics if `rate_bps` is not positive.
    pub fn new(rate_bps: f64, propagation: SimTime) -> Self {
        assert!(rate_bps > 0.0, "link rate must be positive");
        Self {
            rate_bps,
            propagation,
            serialization: serialization_time(rate_bps),
            busy_until: SimTime::ZERO,
            in_flight: VecDeque::new(),
            transmitted: 0,
        }
    }

    pub fn rate_bps(&self) -> f64 {
        self.rate_bps
    }

    /// Cells per second at line rate.
    pub fn cell_rate(&self) -> f64 {
        self.rate_bps / CELL_BITS as f64
    }

    pub fn propagation(&self) -> SimTime {
        self.propagation
    }

    pub fn serialization(&self) -> SimTime {
        self.serialization
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    pub fn is_idle_at(&self, t: SimTime) -> bool {
        self.busy_until <= t
    }

    pub fn transmitted(&self) -> u64 {
        self.transmitted
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    /// Send `item` no earlier than `at`. Returns the far-end arrival time:
    /// `max(at, busy_until) + serialization + propagation`.
    pub fn transmit(&mut self, item: T, at: SimTime) -> SimTime {
        let start = at.max(self.busy_until);
        self.busy_until = start + self.serialization;
        let arrival = self.busy_until + self.propagation;
        self.in_flight.push_back((arrival, item));
        self.transmitted += 1;
        arrival
    }

    /// Items on the wire, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.in_flight.iter().map(|(_, item)| item)
    }

    pub fn next_arrival(&self) -> Option<SimTime> {
        self.in_flight.front().map(|(t, _)| *t)
    }

    /// Remove the head item if it has arrived by `now`.
    pub fn pop_arrived(&mut self, now: SimTime) -> Option<T> {
        match self.in_flight.front() {
            Some((t, _)) if *t <= now => self.in_flight.pop_front().map(|(_, item)| item),
            _ => None,
        }
    }
}
