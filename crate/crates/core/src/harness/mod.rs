//! Experiment harness: scenario configs, topologies, the network model
//! that wires every component together, and table-shaped reports.

mod config;
mod metrics;
mod model;
mod report;
mod sweep;
mod topology;

pub use config::{Scenario, ScenarioConfig, TraceOptions, VbrAttach};
pub use metrics::{
    efficiency, feedback_delay_cells, max_tcp_fraction, LINK_RATE_MBPS, REPORT_CELLS_PER_MS,
};
pub use model::{
    run_experiment, simulate, AcrRow, EricaRow, InvariantReport, MetricsReport, RunOutput, TcpRow,
    VbrEventRow,
};
pub use report::{emit_report, write_acr_trace, write_erica_trace, write_tcp_trace, write_vbr_trace, ReportRow, REPORT_HEADER};
pub use sweep::{parse_matrix, run_sweep, Matrix};
pub use topology::{build_topology, LinkId, LinkSpec, Node, Topology};

use thiserror::Error;

use crate::abr::AbrError;
use crate::sim::SimError;
use crate::switch::EricaError;
use crate::tcp::TcpError;
use crate::vbr::VbrError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("VBR background mean {0} Mbps leaves no ABR capacity")]
    NoAbrCapacity(f64),
    #[error(transparent)]
    Vbr(#[from] VbrError),
    #[error(transparent)]
    Erica(#[from] EricaError),
    #[error(transparent)]
    Abr(#[from] AbrError),
    #[error(transparent)]
    Tcp(#[from] TcpError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
