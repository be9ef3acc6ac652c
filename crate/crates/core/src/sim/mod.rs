//! Discrete-event engine: integer clock, FIFO-tie-broken event queue,
//! serialising point-to-point links and the ATM cell itself.

mod cell;
mod link;
mod queue;
mod time;

pub use cell::{
    Cell, CellKind, PayloadTag, RmDirection, RmPayload, ServiceClass, VcId, CELL_BITS, CELL_BYTES,
    CELL_PAYLOAD_BYTES,
};
pub use link::{propagation_for_km, serialization_time, Link, DEFAULT_LINK_RATE_BPS, PROPAGATION_PER_KM};
pub use queue::EventQueue;
pub use time::SimTime;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("event scheduled at {at} which is before the current time {now}")]
    PastEvent { at: SimTime, now: SimTime },
}
