use super::HarnessError;
use crate::sim::{SimTime, CELL_BYTES};
use crate::tcp::segment_to_cells;

pub const LINK_RATE_MBPS: f64 = 149.76;
/// Cells per millisecond used when expressing queues in feedback delays.
/// This is the 155.52 Mbps line-rate figure, kept for comparability even
/// though links here run at 149.76 Mbps.
pub const REPORT_CELLS_PER_MS: f64 = 367.0;

/// Best-case fraction of ABR capacity that reaches TCP as payload: payload
/// per wire byte times the data-cell share with one FRM every 32 cells.
pub fn max_tcp_fraction(mss: u32) -> f64 {
    let wire = CELL_BYTES as f64 * segment_to_cells(mss) as f64;
    mss as f64 / wire * (31.0 / 32.0)
}

/// TCP throughput as a percentage of the best achievable over the ABR
/// capacity left by the VBR background.
pub fn efficiency(tcp_mbps: f64, vbr_mean_mbps: f64, mss: u32) -> Result<f64, HarnessError> {
    if !(vbr_mean_mbps < LINK_RATE_MBPS) {
        return Err(HarnessError::NoAbrCapacity(vbr_mean_mbps));
    }
    Ok(100.0 * tcp_mbps / ((LINK_RATE_MBPS - vbr_mean_mbps) * max_tcp_fraction(mss)))
}

pub fn feedback_delay_cells(delay: SimTime) -> f64 {
    delay.as_millis_f64() * REPORT_CELLS_PER_MS
}
