use std::fs::OpenOptions;
use std::path::Path;

use super::{AcrRow, EricaRow, HarnessError, MetricsReport, TcpRow, VbrEventRow};

pub const REPORT_HEADER: [&str; 13] = [
    "scenario",
    "mss",
    "video_mean",
    "video_sigma",
    "hurst",
    "seed",
    "duration_s",
    "vbr_mean_mbps",
    "tcp_throughput_mbps",
    "max_queue_cells",
    "queue_in_fb_delays",
    "efficiency_pct",
    "retransmissions",
];

/// One report line, already formatted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow(pub Vec<String>);

impl From<&MetricsReport> for ReportRow {
    fn from(r: &MetricsReport) -> Self {
        let c = &r.config;
        ReportRow(vec![
            c.scenario.to_string(),
            c.mss.to_string(),
            c.video_mean.to_string(),
            c.video_sigma.to_string(),
            c.hurst.to_string(),
            c.seed.to_string(),
            c.duration.as_secs_f64().to_string(),
            format!("{:.4}", r.vbr_mean_mbps),
            format!("{:.4}", r.tcp_throughput_mbps),
            r.max_queue_cells.to_string(),
            format!("{:.3}", r.queue_in_fb_delays),
            format!("{:.2}", r.efficiency_pct),
            r.retransmissions.to_string(),
        ])
    }
}

/// Append the rows to `path`, writing the header first if the file is new
/// or empty.
pub fn emit_report<'a, I>(reports: I, path: &Path) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = &'a MetricsReport>,
{
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(REPORT_HEADER)?;
    }
    for r in reports {
        w.write_record(&ReportRow::from(r).0)?;
    }
    w.flush()?;
    Ok(())
}

fn write_rows<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_erica_trace(path: &Path, rows: &[EricaRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        ["time_s", "port", "q_cells", "vbr_rate_mbps", "target_capacity_mbps", "z", "fairshare_mbps"],
        rows.iter().map(|r| {
            [
                format!("{:.6}", r.time_s),
                r.port.to_string(),
                r.q_cells.to_string(),
                format!("{:.4}", r.vbr_rate_mbps),
                format!("{:.4}", r.target_capacity_mbps),
                format!("{:.5}", r.z),
                format!("{:.4}", r.fairshare_mbps),
            ]
        }),
    )
}

pub fn write_acr_trace(path: &Path, rows: &[AcrRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        ["time_s", "vc_id", "acr_mbps"],
        rows.iter()
            .map(|r| [format!("{:.6}", r.time_s), r.vc.to_string(), format!("{:.4}", r.acr_mbps)]),
    )
}

pub fn write_tcp_trace(path: &Path, rows: &[TcpRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        ["time_s", "conn_id", "cwnd_bytes", "flight_bytes", "delivered_mbps"],
        rows.iter().map(|r| {
            [
                format!("{:.6}", r.time_s),
                r.conn.to_string(),
                r.cwnd_bytes.to_string(),
                r.flight_bytes.to_string(),
                format!("{:.4}", r.delivered_mbps),
            ]
        }),
    )
}

pub fn write_vbr_trace(path: &Path, rows: &[VbrEventRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        ["time_s", "source_id", "event", "rate_mbps"],
        rows.iter().map(|r| {
            [
                format!("{:.9}", r.time_s),
                r.source.to_string(),
                r.event.to_string(),
                format!("{:.4}", r.rate_mbps),
            ]
        }),
    )
}
