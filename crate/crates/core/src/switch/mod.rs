//! Output-queued ATM switch port: strict VBR-over-ABR priority and ERICA+
//! explicit-rate feedback.

mod erica;
mod port;

pub use erica::{queue_control_fraction, EricaParams, EricaPortState, IntervalSummary, Q0Mode};
pub use port::{OutputPort, PortQueues};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EricaError {
    #[error("target queue Q0 must be positive, got {0}")]
    NonPositiveQ0(f64),
    #[error("invalid ERICA+ parameter: {0}")]
    InvalidParams(&'static str),
}
