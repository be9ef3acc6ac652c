use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use abrsim::fgn::{bound_sequence, generate_fgn, BoundingMode, FgnParams, RateBounds};
use abrsim::harness::{
    emit_report, parse_matrix, run_sweep, simulate, write_acr_trace, write_erica_trace, write_tcp_trace,
    write_vbr_trace, Scenario, ScenarioConfig, TraceOptions, VbrAttach,
};
use abrsim::sim::SimTime;
use abrsim::switch::Q0Mode;

#[derive(Parser)]
#[command(name = "abrsim", about = "TCP over ABR cell-level simulator with self-similar VBR background")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and append its report row
    Run(RunArgs),
    /// Run a grid of experiments from a key = value matrix file
    Sweep {
        #[arg(long)]
        matrix: PathBuf,
        /// Overrides `out` in the matrix file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Debug helpers for the FGN generator
    Fgn {
        #[command(subcommand)]
        cmd: FgnCmd,
    },
}

#[derive(Subcommand)]
enum FgnCmd {
    /// Print a bounded rate sequence, one value per line (Mbps)
    Dump {
        #[arg(long, default_value_t = 0.8)]
        hurst: f64,
        #[arg(long, default_value_t = 5.0)]
        mean: f64,
        #[arg(long, default_value_t = 5.0)]
        sigma: f64,
        #[arg(long, default_value_t = 65536)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = BoundingMode::Reject)]
        mode: BoundingMode,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 15.0)]
        hi: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Scenario,
    #[arg(long, default_value_t = 512)]
    mss: u32,
    #[arg(long, default_value_t = 5.0)]
    video_mean: f64,
    #[arg(long, default_value_t = 5.0)]
    video_sigma: f64,
    #[arg(long, default_value_t = 0.8)]
    hurst: f64,
    /// Seconds; defaults to 10 for wan and 170 for the satellite scenarios
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// ERICA+ interval trace of the bottleneck port
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    acr_trace: Option<PathBuf>,
    #[arg(long)]
    tcp_trace: Option<PathBuf>,
    /// Sampling period of --tcp-trace in milliseconds
    #[arg(long, default_value_t = 10)]
    tcp_trace_ms: u64,
    #[arg(long)]
    vbr_trace: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    n_tcp: usize,
    #[arg(long, default_value_t = 9)]
    n_video: usize,
    #[arg(long, default_value_t = 270)]
    sat_one_way_ms: u64,
    #[arg(long, default_value = "link-rate")]
    q0_mode: Q0Mode,
    #[arg(long, default_value = "like-sources")]
    vbr_attach: VbrAttach,
    /// Receiver window in bytes
    #[arg(long)]
    rwnd: Option<u64>,
}

fn run(a: RunArgs) -> Result<()> {
    let mut c = ScenarioConfig::new(a.scenario, a.mss, a.video_mean, a.video_sigma, a.seed);
    c.hurst = a.hurst;
    if let Some(d) = a.duration {
        if !(d > 0.0) {
            bail!("--duration must be positive");
        }
        c.duration = SimTime::from_secs_f64(d);
    }
    c.n_tcp = a.n_tcp;
    c.n_video = a.n_video;
    c.sat_one_way = SimTime::from_millis(a.sat_one_way_ms);
    c.erica.q0_mode = a.q0_mode;
    c.vbr_attach = a.vbr_attach;
    if let Some(w) = a.rwnd {
        c.rwnd = w;
    }
    c.traces = TraceOptions {
        erica: a.trace.is_some(),
        acr: a.acr_trace.is_some(),
        tcp: a.tcp_trace.as_ref().map(|_| SimTime::from_millis(a.tcp_trace_ms.max(1))),
        vbr: a.vbr_trace.is_some(),
    };
    let out = simulate(&c)?;
    emit_report([&out.report], &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(p) = &a.trace {
        write_erica_trace(p, &out.erica_trace)?;
    }
    if let Some(p) = &a.acr_trace {
        write_acr_trace(p, &out.acr_trace)?;
    }
    if let Some(p) = &a.tcp_trace {
        write_tcp_trace(p, &out.tcp_trace)?;
    }
    if let Some(p) = &a.vbr_trace {
        write_vbr_trace(p, &out.vbr_trace)?;
    }
    let r = &out.report;
    eprintln!(
        "{} mss={} vbr={:.2} tcp={:.2} Mbps eff={:.1}% maxq={} ({:.2} fb delays) retx={}",
        c.scenario, c.mss, r.vbr_mean_mbps, r.tcp_throughput_mbps, r.efficiency_pct,
        r.max_queue_cells, r.queue_in_fb_delays, r.retransmissions
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Sweep { matrix, out } => (|| {
            let text = std::fs::read_to_string(&matrix)
                .with_context(|| format!("reading {}", matrix.display()))?;
            let m = parse_matrix(&text)?;
            let Some(dest) = out.or(m.out.clone()) else {
                bail!("no output file: pass --out or set 'out' in the matrix");
            };
            let reports = run_sweep(&m)?;
            emit_report(&reports, &dest)?;
            eprintln!("{} runs appended to {}", reports.len(), dest.display());
            Ok(())
        })(),
        Cmd::Fgn { cmd: FgnCmd::Dump { hurst, mean, sigma, n, seed, mode, lo, hi } } => (|| {
            let raw = generate_fgn(&FgnParams::new(hurst, mean, sigma, n, seed))?;
            let seq = bound_sequence(&raw, mode, RateBounds::new(lo, hi)?)?;
            let mut w = std::io::BufWriter::new(std::io::stdout().lock());
            for v in &seq.values {
                writeln!(w, "{v}")?;
            }
            Ok(())
        })(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
