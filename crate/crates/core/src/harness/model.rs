use super::{
    build_topology, efficiency, feedback_delay_cells, HarnessError, LinkId, ScenarioConfig, Topology,
};
use crate::abr::{dest_turnaround, pacing_gap, AbrParams, AbrSource};
use crate::sim::{
    Cell, EventQueue, Link, PayloadTag, RmDirection, ServiceClass, SimTime, VcId, CELL_BITS,
};
use crate::switch::{IntervalSummary, OutputPort};
use crate::tcp::{expected_digest, Reassembly, TcpParams, TcpReceiver, TcpSender};
use crate::vbr::VbrMux;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ev {
    Slot { vc: u16, generation: u64 },
    Arrive { link: u32 },
    PortFree { port: u32 },
    EricaTimer { port: u32, generation: u64 },
    Vbr,
    Rto { conn: u16 },
    Sample,
}

impl Ev {
    fn key(&self) -> (u8, u64) {
        match *self {
            Ev::Slot { vc, .. } => (0, vc as u64),
            Ev::Arrive { link } => (1, link as u64),
            Ev::PortFree { port } => (2, port as u64),
            Ev::EricaTimer { port, .. } => (3, port as u64),
            Ev::Vbr => (4, 0),
            Ev::Rto { conn } => (5, conn as u64),
            Ev::Sample => (6, 0),
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fold(mut h: u64, v: u64) -> u64 {
    for b in v.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Structural properties checked while the model runs. All counters are
/// zero in a correct run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvariantReport {
    /// ABR cell left a port while its VBR queue held cells.
    pub priority: u64,
    /// A port held cells with nothing scheduled to serve them, or its link
    /// sat idle while backlogged.
    pub work_conservation: u64,
    /// ACR outside [MCR, PCR].
    pub acr_range: u64,
    /// An FRM not in position 32k of a source's emissions, or vice versa.
    pub frm_spacing: u64,
    /// Two emissions closer than 1/ACR.
    pub pacing: u64,
    /// A switch raised the ER of a backward RM cell.
    pub er_increase: u64,
    /// Flight exceeded min(cwnd, rwnd).
    pub flight: u64,
    /// Delivered stream not a gap-free, duplicate-free prefix.
    pub goodput_integrity: u64,
    /// AAL5 PDUs that did not reassemble cleanly.
    pub reassembly: u64,
    /// RM cells sent minus returned minus those still in the network.
    pub rm_conservation: u64,
    /// Number of backward RM cells that reached their source.
    pub brm_returned: u64,
}

impl InvariantReport {
    pub fn violations(&self) -> Vec<(&'static str, u64)> {
        [
            ("priority", self.priority),
            ("work_conservation", self.work_conservation),
            ("acr_range", self.acr_range),
            ("frm_spacing", self.frm_spacing),
            ("pacing", self.pacing),
            ("er_increase", self.er_increase),
            ("flight", self.flight),
            ("goodput_integrity", self.goodput_integrity),
            ("reassembly", self.reassembly),
            ("rm_conservation", self.rm_conservation),
        ]
        .into_iter()
        .filter(|&(_, n)| n > 0)
        .collect()
    }

    pub fn is_clean(&self) -> bool {
        self.violations().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub config: ScenarioConfig,
    pub vbr_mean_mbps: f64,
    pub tcp_throughput_mbps: f64,
    pub abr_throughput_mbps: f64,
    pub max_queue_cells: usize,
    pub queue_in_fb_delays: f64,
    pub efficiency_pct: f64,
    pub retransmissions: u64,
    pub timeouts: u64,
    pub per_vc_goodput_mbps: Vec<f64>,
    pub feedback_delay: SimTime,
    pub rtt: SimTime,
    pub vbr_cells: u64,
    pub events: u64,
    pub event_digest: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EricaRow {
    pub time_s: f64,
    pub port: usize,
    pub q_cells: usize,
    pub vbr_rate_mbps: f64,
    pub target_capacity_mbps: f64,
    pub z: f64,
    pub fairshare_mbps: f64,
    pub active_vcs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcrRow {
    pub time_s: f64,
    pub vc: usize,
    pub acr_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcpRow {
    pub time_s: f64,
    pub conn: usize,
    pub cwnd_bytes: u64,
    pub flight_bytes: u64,
    pub delivered_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VbrEventRow {
    pub time_s: f64,
    pub source: usize,
    pub event: &'static str,
    pub rate_mbps: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub invariants: InvariantReport,
    pub erica_trace: Vec<EricaRow>,
    pub acr_trace: Vec<AcrRow>,
    pub tcp_trace: Vec<TcpRow>,
    pub vbr_trace: Vec<VbrEventRow>,
}

struct Port {
    port: OutputPort,
    link: LinkId,
    free_pending: bool,
    timer_generation: u64,
}

struct Conn {
    source: AbrSource,
    sender: TcpSender,
    receiver: TcpReceiver,
    reassembly: Reassembly,
    rto_event: Option<SimTime>,
    sampled_bytes: u64,
}

struct Net {
    cfg: ScenarioConfig,
    topo: Topology,
    links: Vec<Link<Cell>>,
    port_of_link: Vec<Option<usize>>,
    ports: Vec<Port>,
    bottleneck_port: usize,
    conns: Vec<Conn>,
    mux: Option<VbrMux>,
    vbr_vc: VcId,
    vbr_ingress: u64,
    rm_outstanding: u64,
    inv: InvariantReport,
    digest: u64,
    erica_trace: Vec<EricaRow>,
    acr_trace: Vec<AcrRow>,
    tcp_trace: Vec<TcpRow>,
    vbr_trace: Vec<VbrEventRow>,
}

fn to_mbps(cells_per_s: f64) -> f64 {
    IntervalSummary::cells_to_mbps(cells_per_s)
}

impl Net {
    fn new(cfg: &ScenarioConfig) -> Result<Self, HarnessError> {
        let topo = build_topology(cfg)?;
        let links: Vec<Link<Cell>> = topo
            .links
            .iter()
            .map(|l| Link::new(l.rate_bps, l.propagation))
            .collect();
        let mut port_of_link = vec![None; links.len()];
        let mut ports = Vec::new();
        for (id, spec) in topo.links.iter().enumerate() {
            if spec.has_port {
                port_of_link[id] = Some(ports.len());
                ports.push(Port {
                    port: OutputPort::new(cfg.erica, links[id].cell_rate())?,
                    link: id,
                    free_pending: false,
                    timer_generation: 0,
                });
            }
        }
        let bottleneck_port = port_of_link[topo.bottleneck].expect("bottleneck has a port");

        let pcr = links[topo.bottleneck].cell_rate();
        let abr = AbrParams {
            icr: pcr * cfg.icr_fraction,
            ..AbrParams::for_link(pcr)
        };
        let tcp = TcpParams {
            rwnd: cfg.rwnd,
            ..TcpParams::new(cfg.mss)
        };
        let conns = (0..cfg.n_tcp)
            .map(|i| -> Result<Conn, HarnessError> {
                let mut source = AbrSource::new(VcId(i as u16), abr)?;
                if cfg.traces.acr {
                    source.enable_acr_log();
                }
                Ok(Conn {
                    source,
                    sender: TcpSender::new(tcp)?,
                    receiver: TcpReceiver::new(),
                    reassembly: Reassembly::default(),
                    rto_event: None,
                    sampled_bytes: 0,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let vbr_vc = VcId(cfg.n_tcp as u16);
        let mux = if cfg.n_video > 0 {
            let mut mux = VbrMux::homogeneous(
                cfg.n_video,
                cfg.hurst,
                cfg.video_mean,
                cfg.video_sigma,
                cfg.seed,
                vbr_vc,
            )?;
            if cfg.traces.vbr {
                mux.sources_mut().iter_mut().for_each(|s| s.enable_mpcr_log());
            }
            Some(mux)
        } else {
            None
        };

        Ok(Self {
            cfg: cfg.clone(),
            topo,
            links,
            port_of_link,
            ports,
            bottleneck_port,
            conns,
            mux,
            vbr_vc,
            vbr_ingress: 0,
            rm_outstanding: 0,
            inv: InvariantReport::default(),
            digest: FNV_OFFSET,
            erica_trace: Vec::new(),
            acr_trace: Vec::new(),
            tcp_trace: Vec::new(),
            vbr_trace: Vec::new(),
        })
    }

    fn start(&mut self, q: &mut EventQueue<Ev>) -> Result<(), HarnessError> {
        let now = SimTime::ZERO;
        let interval = self.cfg.erica.interval_time;
        for p in 0..self.ports.len() {
            q.schedule(now + interval, Ev::EricaTimer { port: p as u32, generation: 0 })?;
        }
        for vc in 0..self.conns.len() {
            if self.cfg.traces.acr {
                let acr = self.conns[vc].source.acr();
                self.acr_trace.push(AcrRow { time_s: 0.0, vc, acr_mbps: to_mbps(acr) });
            }
            self.pump(q, now, vc)?;
        }
        if let Some(mux) = &self.mux {
            q.schedule(mux.peek_time(), Ev::Vbr)?;
        }
        if let Some(period) = self.cfg.traces.tcp {
            q.schedule(period, Ev::Sample)?;
        }
        Ok(())
    }

    fn handle(&mut self, q: &mut EventQueue<Ev>, now: SimTime, ev: Ev) -> Result<(), HarnessError> {
        let (tag, id) = ev.key();
        self.digest = fold(fold(fold(self.digest, now.0), tag as u64), id);
        match ev {
            Ev::Slot { vc, generation } => self.on_slot(q, now, vc as usize, generation)?,
            Ev::Arrive { link } => {
                let link = link as usize;
                let cell = self.links[link]
                    .pop_arrived(now)
                    .expect("arrival event without a cell on the wire");
                self.on_arrival(q, now, link, cell)?;
            }
            Ev::PortFree { port } => {
                let p = port as usize;
                self.ports[p].free_pending = false;
                let link = self.ports[p].link;
                if self.links[link].busy_until() != now {
                    self.inv.work_conservation += 1;
                }
                if !self.ports[p].port.queues().is_empty() {
                    self.start_tx(q, now, p)?;
                }
            }
            Ev::EricaTimer { port, generation } => {
                let p = port as usize;
                if generation == self.ports[p].timer_generation {
                    let summary = self.ports[p].port.end_of_interval(now);
                    self.on_interval(q, now, p, summary)?;
                }
            }
            Ev::Vbr => self.on_vbr(q, now)?,
            Ev::Rto { conn } => {
                let c = conn as usize;
                if self.conns[c].rto_event == Some(now) {
                    self.conns[c].rto_event = None;
                    if self.conns[c].sender.on_timer(now) {
                        self.pump(q, now, c)?;
                    } else {
                        self.ensure_rto(q, c)?;
                    }
                }
            }
            Ev::Sample => {
                let period = self.cfg.traces.tcp.expect("sampling enabled");
                for (i, c) in self.conns.iter_mut().enumerate() {
                    let bytes = c.receiver.delivered_bytes();
                    let delta = bytes - c.sampled_bytes;
                    c.sampled_bytes = bytes;
                    self.tcp_trace.push(TcpRow {
                        time_s: now.as_secs_f64(),
                        conn: i,
                        cwnd_bytes: c.sender.cwnd(),
                        flight_bytes: c.sender.flight(),
                        delivered_mbps: delta as f64 * 8.0 / period.as_secs_f64() / 1e6,
                    });
                }
                q.schedule(now + period, Ev::Sample)?;
            }
        }
        Ok(())
    }

    fn on_slot(&mut self, q: &mut EventQueue<Ev>, now: SimTime, vc: usize, generation: u64) -> Result<(), HarnessError> {
        let src = &mut self.conns[vc].source;
        let prev = src.last_emit();
        let acr = src.acr();
        let out = src.emit_slot(now, generation);
        if let Some(cell) = out.cell {
            if let Some(p) = prev {
                if now - p < pacing_gap(acr) {
                    self.inv.pacing += 1;
                }
            }
            let nrm = src.params().nrm as u64;
            if cell.is_forward_rm() != src.emitted().is_multiple_of(nrm) {
                self.inv.frm_spacing += 1;
            }
            if cell.is_forward_rm() {
                self.rm_outstanding += 1;
            }
            let first = self.topo.forward[vc][0];
            self.send(q, now, cell, first)?;
        }
        if let Some((t, g)) = out.next {
            q.schedule(t, Ev::Slot { vc: vc as u16, generation: g })?;
        }
        Ok(())
    }

    fn on_vbr(&mut self, q: &mut EventQueue<Ev>, now: SimTime) -> Result<(), HarnessError> {
        let mux = self.mux.as_mut().expect("VBR event without a multiplex");
        if let Some(vc) = mux.step()? {
            debug_assert_eq!(vc.time, now);
            if self.cfg.traces.vbr {
                let rate = mux.sources()[vc.source].current_rate();
                self.vbr_trace.push(VbrEventRow {
                    time_s: now.as_secs_f64(),
                    source: vc.source,
                    event: "CELL",
                    rate_mbps: rate,
                });
            }
            let first = self.topo.vbr_route[0];
            let next = mux.peek_time();
            self.send(q, now, vc.cell, first)?;
            q.schedule(next, Ev::Vbr)?;
        } else {
            q.schedule(mux.peek_time(), Ev::Vbr)?;
        }
        Ok(())
    }

    /// Put `cell` onto `link`, through the link's output port if it has one.
    fn send(&mut self, q: &mut EventQueue<Ev>, now: SimTime, cell: Cell, link: LinkId) -> Result<(), HarnessError> {
        let Some(p) = self.port_of_link[link] else {
            let at = self.links[link].transmit(cell, now);
            q.schedule(at, Ev::Arrive { link: link as u32 })?;
            return Ok(());
        };
        if p == self.bottleneck_port && cell.service == ServiceClass::Vbr {
            self.vbr_ingress += 1;
        }
        let port = &mut self.ports[p];
        if !port.port.queues().is_empty() && !port.free_pending {
            self.inv.work_conservation += 1;
        }
        if let Some(summary) = port.port.enqueue_cell(cell, now) {
            self.on_interval(q, now, p, summary)?;
        }
        let port = &mut self.ports[p];
        if !port.free_pending {
            let busy = self.links[link].busy_until();
            if busy <= now {
                self.start_tx(q, now, p)?;
            } else {
                port.free_pending = true;
                q.schedule(busy, Ev::PortFree { port: p as u32 })?;
            }
        }
        Ok(())
    }

    fn start_tx(&mut self, q: &mut EventQueue<Ev>, now: SimTime, p: usize) -> Result<(), HarnessError> {
        let port = &mut self.ports[p];
        let vbr_waiting = port.port.queues().vbr_depth() > 0;
        let cell = port.port.dequeue_next().expect("start_tx on an empty port");
        if cell.service == ServiceClass::Abr && vbr_waiting {
            self.inv.priority += 1;
        }
        let link = &mut self.links[port.link];
        let at = link.transmit(cell, now);
        q.schedule(at, Ev::Arrive { link: port.link as u32 })?;
        if !port.port.queues().is_empty() {
            port.free_pending = true;
            q.schedule(link.busy_until(), Ev::PortFree { port: p as u32 })?;
        }
        Ok(())
    }

    fn on_interval(&mut self, q: &mut EventQueue<Ev>, now: SimTime, p: usize, s: IntervalSummary) -> Result<(), HarnessError> {
        let port = &mut self.ports[p];
        port.timer_generation += 1;
        let deadline = port.port.erica().interval_deadline();
        q.schedule(deadline, Ev::EricaTimer { port: p as u32, generation: port.timer_generation })?;
        if self.cfg.traces.erica && p == self.bottleneck_port {
            self.erica_trace.push(EricaRow {
                time_s: now.as_secs_f64(),
                port: p,
                q_cells: s.queue_cells,
                vbr_rate_mbps: to_mbps(s.vbr_rate),
                target_capacity_mbps: to_mbps(s.target_capacity),
                z: s.overload,
                fairshare_mbps: to_mbps(s.fair_share),
                active_vcs: s.active_vcs,
            });
        }
        Ok(())
    }

    fn on_arrival(&mut self, q: &mut EventQueue<Ev>, now: SimTime, link: LinkId, mut cell: Cell) -> Result<(), HarnessError> {
        let vc = cell.vc.index();
        let reverse = self.topo.links[link].reverse;
        let route = if reverse {
            &self.topo.reverse[vc]
        } else if cell.vc == self.vbr_vc {
            &self.topo.vbr_route
        } else {
            &self.topo.forward[vc]
        };
        let len = route.len();
        let k = route.iter().position(|&l| l == link).expect("cell off its route");
        let next = route.get(k + 1).copied();

        if reverse {
            if let Some(rm) = cell.rm {
                // the switch just reached serves this VC's forward hop len-1-k
                let fwd = self.topo.forward[vc][len - 1 - k];
                if let Some(p) = self.port_of_link[fwd] {
                    let out = self.ports[p].port.process_backward_rm(rm, cell.vc);
                    if out.er > rm.er {
                        self.inv.er_increase += 1;
                    }
                    cell.rm = Some(out);
                }
            }
        }
        if let Some(next) = next {
            return self.send(q, now, cell, next);
        }
        if reverse {
            self.at_source(q, now, vc, cell)
        } else if cell.vc == self.vbr_vc {
            Ok(())
        } else {
            self.at_destination(q, now, vc, cell)
        }
    }

    fn at_destination(&mut self, q: &mut EventQueue<Ev>, now: SimTime, vc: usize, cell: Cell) -> Result<(), HarnessError> {
        let back = self.topo.reverse[vc][0];
        if cell.is_forward_rm() {
            let brm = dest_turnaround(&cell)?;
            return self.send(q, now, brm, back);
        }
        if let PayloadTag::Segment { seq, len, index, count } = cell.tag {
            let conn = &mut self.conns[vc];
            if conn.reassembly.push(seq, index, count) {
                let ack = conn.receiver.deliver(seq, len);
                let ack_cell = Cell::data(cell.vc, ServiceClass::Abr, PayloadTag::Ack { ack });
                self.send(q, now, ack_cell, back)?;
            }
        }
        Ok(())
    }

    fn at_source(&mut self, q: &mut EventQueue<Ev>, now: SimTime, vc: usize, cell: Cell) -> Result<(), HarnessError> {
        match (cell.rm, cell.tag) {
            (Some(rm), _) if rm.direction == RmDirection::Backward => {
                self.rm_outstanding -= 1;
                self.inv.brm_returned += 1;
                let src = &mut self.conns[vc].source;
                let next = src.on_brm(rm, now);
                let p = *src.params();
                if !(src.acr() >= p.mcr && src.acr() <= p.pcr) {
                    self.inv.acr_range += 1;
                }
                if self.cfg.traces.acr {
                    for (t, acr) in src.drain_acr_log() {
                        self.acr_trace.push(AcrRow { time_s: t.as_secs_f64(), vc, acr_mbps: to_mbps(acr) });
                    }
                }
                if let Some((t, g)) = next {
                    q.schedule(t, Ev::Slot { vc: vc as u16, generation: g })?;
                }
            }
            (None, PayloadTag::Ack { ack }) => {
                self.conns[vc].sender.on_ack(ack, now)?;
                self.pump(q, now, vc)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Let connection `vc` send what its window allows.
    fn pump(&mut self, q: &mut EventQueue<Ev>, now: SimTime, vc: usize) -> Result<(), HarnessError> {
        let conn = &mut self.conns[vc];
        for seg in conn.sender.fill_window(now) {
            conn.source.enqueue_segment(seg.seq, seg.len, seg.cells);
        }
        let s = &conn.sender;
        if s.flight() > s.cwnd().min(s.params().rwnd) {
            self.inv.flight += 1;
        }
        if let Some((t, g)) = conn.source.wake(now) {
            q.schedule(t, Ev::Slot { vc: vc as u16, generation: g })?;
        }
        self.ensure_rto(q, vc)
    }

    fn ensure_rto(&mut self, q: &mut EventQueue<Ev>, vc: usize) -> Result<(), HarnessError> {
        let conn = &mut self.conns[vc];
        if let Some(d) = conn.sender.deadline() {
            if conn.rto_event.is_none_or(|e| d < e) {
                conn.rto_event = Some(d);
                q.schedule(d, Ev::Rto { conn: vc as u16 })?;
            }
        }
        Ok(())
    }

    fn finish(mut self, events: u64) -> Result<RunOutput, HarnessError> {
        let dur = self.cfg.duration.as_secs_f64();
        let mbps = |bits: f64| bits / dur / 1e6;
        let bn = &self.ports[self.bottleneck_port].port;
        let vbr_mean = mbps(self.vbr_ingress as f64 * CELL_BITS as f64);
        let abr = mbps(bn.abr_departures() as f64 * CELL_BITS as f64);
        let max_q = bn.queues().max_abr_depth_seen();
        let per_vc: Vec<f64> = self
            .conns
            .iter()
            .map(|c| mbps(c.receiver.delivered_bytes() as f64 * 8.0))
            .collect();
        let tcp: f64 = per_vc.iter().sum();
        let eff = efficiency(tcp, vbr_mean, self.cfg.mss)?;
        let fb = feedback_delay_cells(self.topo.feedback_delay);

        for c in &self.conns {
            let r = &c.receiver;
            let s = &c.sender;
            let ok = r.integrity_faults() == 0
                && r.digest() == expected_digest(r.delivered_bytes(), self.cfg.mss)
                && r.delivered_bytes() >= s.snd_una()
                && r.delivered_bytes() <= s.snd_max();
            if !ok {
                self.inv.goodput_integrity += 1;
            }
            self.inv.reassembly += c.reassembly.errors();
        }
        let rm_in_network = self
            .links
            .iter()
            .flat_map(|l| l.iter())
            .chain(self.ports.iter().flat_map(|p| p.port.queues().iter()))
            .filter(|c| c.rm.is_some())
            .count() as u64;
        self.inv.rm_conservation = self.rm_outstanding.abs_diff(rm_in_network);

        if let Some(mux) = self.mux.as_mut() {
            for (i, s) in mux.sources_mut().iter_mut().enumerate() {
                for m in s.drain_mpcr_log() {
                    self.vbr_trace.push(VbrEventRow {
                        time_s: m.time.as_secs_f64(),
                        source: i,
                        event: "MPCR",
                        rate_mbps: m.rate_mbps,
                    });
                }
            }
            self.vbr_trace
                .sort_by(|a, b| {
                    a.time_s
                        .total_cmp(&b.time_s)
                        .then(a.source.cmp(&b.source))
                        .then((a.event != "MPCR").cmp(&(b.event != "MPCR")))
                });
        }

        let report = MetricsReport {
            vbr_mean_mbps: vbr_mean,
            tcp_throughput_mbps: tcp,
            abr_throughput_mbps: abr,
            max_queue_cells: max_q,
            queue_in_fb_delays: if fb > 0.0 { max_q as f64 / fb } else { 0.0 },
            efficiency_pct: eff,
            retransmissions: self.conns.iter().map(|c| c.sender.retransmissions()).sum(),
            timeouts: self.conns.iter().map(|c| c.sender.timeouts()).sum(),
            per_vc_goodput_mbps: per_vc,
            feedback_delay: self.topo.feedback_delay,
            rtt: self.topo.rtt,
            vbr_cells: self.vbr_ingress,
            events,
            event_digest: self.digest,
            config: self.cfg,
        };
        Ok(RunOutput {
            report,
            invariants: self.inv,
            erica_trace: self.erica_trace,
            acr_trace: self.acr_trace,
            tcp_trace: self.tcp_trace,
            vbr_trace: self.vbr_trace,
        })
    }
}

/// Run one experiment with full outputs (report, invariant counters and
/// any traces requested in the config).
pub fn simulate(cfg: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    let mut net = Net::new(cfg)?;
    let mut q = EventQueue::new();
    net.start(&mut q)?;
    while let Some((now, ev)) = q.pop_until(cfg.duration) {
        net.handle(&mut q, now, ev)?;
    }
    let events = q.dispatched();
    net.finish(events)
}

pub fn run_experiment(cfg: &ScenarioConfig) -> Result<MetricsReport, HarnessError> {
    Ok(simulate(cfg)?.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scenario;

    fn short(scenario: Scenario, mss: u32, ms: u64) -> ScenarioConfig {
        ScenarioConfig::new(scenario, mss, 5.0, 5.0, 7).with_duration(SimTime::from_millis(ms))
    }

    #[test]
    fn short_wan_run_is_clean() {
        let out = simulate(&short(Scenario::Wan, 512, 300)).unwrap();
        assert!(out.invariants.is_clean(), "{:?}", out.invariants);
        let r = &out.report;
        assert!(r.tcp_throughput_mbps > 0.0);
        assert!(r.vbr_mean_mbps > 0.0);
        assert_eq!(r.retransmissions, 0);
        assert!(out.invariants.brm_returned > 0);
    }

    #[test]
    fn deterministic() {
        let a = run_experiment(&short(Scenario::Wan, 9140, 200)).unwrap();
        let b = run_experiment(&short(Scenario::Wan, 9140, 200)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_video() {
        let mut c = short(Scenario::Wan, 512, 200);
        c.n_video = 0;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.vbr_mean_mbps, 0.0);
        assert_eq!(r.vbr_cells, 0);
        assert!(r.efficiency_pct > 0.0);
    }
}
