use proptest::prelude::*;

use abrsim::abr::{pacing_gap, AbrParams, AbrSource};
use abrsim::fgn::{bound_sequence, generate_fgn, BoundingMode, FgnParams, RateBounds};
use abrsim::harness::{simulate, Scenario, ScenarioConfig};
use abrsim::sim::{Cell, EventQueue, PayloadTag, RmPayload, ServiceClass, SimTime, VcId};
use abrsim::switch::{queue_control_fraction, EricaParams, EricaPortState, OutputPort};
use abrsim::tcp::{expected_digest, TcpParams, TcpReceiver, TcpSender};

const PCR: f64 = 149.76e6 / 424.0;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn port_priority_fifo_and_peak_depth(ops in prop::collection::vec(0u8..3, 1..400)) {
        let mut port = OutputPort::new(EricaParams::default(), PCR).unwrap();
        let mut next_id = 0u64;
        let mut depth = 0usize;
        let mut peak = 0usize;
        let mut last_abr = None;
        let mut last_vbr = None;
        for op in ops {
            match op {
                0 | 1 => {
                    let class = if op == 0 { ServiceClass::Abr } else { ServiceClass::Vbr };
                    let tag = PayloadTag::Ack { ack: next_id };
                    next_id += 1;
                    port.enqueue_cell(Cell::data(VcId(0), class, tag), SimTime::ZERO);
                    if class == ServiceClass::Abr {
                        depth += 1;
                        peak = peak.max(depth);
                    }
                }
                _ => {
                    let vbr_waiting = port.queues().vbr_depth() > 0;
                    if let Some(c) = port.dequeue_next() {
                        let PayloadTag::Ack { ack } = c.tag else { unreachable!() };
                        match c.service {
                            ServiceClass::Abr => {
                                prop_assert!(!vbr_waiting);
                                prop_assert!(last_abr.is_none_or(|l| ack > l));
                                last_abr = Some(ack);
                                depth -= 1;
                            }
                            ServiceClass::Vbr => {
                                prop_assert!(last_vbr.is_none_or(|l| ack > l));
                                last_vbr = Some(ack);
                            }
                        }
                    }
                }
            }
            prop_assert_eq!(port.queues().abr_depth(), depth);
            prop_assert_eq!(port.queues().max_abr_depth_seen(), peak);
        }
    }

    #[test]
    fn queue_control_monotone_and_bounded(q1 in 0.0f64..1e5, q2 in 0.0f64..1e5, q0 in 1.0f64..5000.0) {
        let p = EricaParams::default();
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let f_lo = queue_control_fraction(lo, q0, &p).unwrap();
        let f_hi = queue_control_fraction(hi, q0, &p).unwrap();
        prop_assert!(f_hi <= f_lo + 1e-12);
        prop_assert!(f_lo <= p.b + 1e-12 && f_hi >= p.qdlf);
    }

    #[test]
    fn erica_never_raises_er(
        vbr in 0u64..2000,
        abr in prop::collection::vec((0u16..20, 0.0f64..PCR, any::<bool>()), 1..600),
        q in 0usize..50_000,
        er in 0.0f64..PCR,
        ccr in 0.0f64..PCR,
        vc in 0u16..25,
    ) {
        let mut s = EricaPortState::new(EricaParams::default(), PCR).unwrap();
        for _ in 0..vbr {
            s.record_vbr_output();
        }
        for &(v, c, rm) in &abr {
            let cell = if rm {
                Cell::rm(VcId(v), RmPayload::forward(PCR, c))
            } else {
                Cell::data(VcId(v), ServiceClass::Abr, PayloadTag::Filler)
            };
            s.record_abr_input(&cell);
        }
        let sum = s.end_of_interval(SimTime::from_millis(5), q);
        prop_assert!(sum.overload > 0.0);
        prop_assert!(sum.fair_share >= 0.0 && sum.fair_share <= sum.target_capacity + 1e-9);
        let out = s.process_backward_rm(RmPayload::backward(er, ccr), VcId(vc));
        prop_assert!(out.er <= er);
        prop_assert!(out.er <= sum.target_capacity.max(0.0) + 1e-9);
    }

    #[test]
    fn abr_source_rules(
        script in prop::collection::vec((0u8..4, 0.0f64..1.2 * PCR, 1u16..200), 1..300),
    ) {
        let params = AbrParams::for_link(PCR);
        let mut src = AbrSource::new(VcId(1), params).unwrap();
        let mut q: EventQueue<u64> = EventQueue::new();
        let mut seq = 0;
        let mut last: Option<SimTime> = None;
        let mut emitted = 0u64;
        for (op, er, cells) in script {
            match op {
                0 => {
                    src.enqueue_segment(seq, cells as u32 * 48, cells);
                    seq += cells as u64 * 48;
                    if let Some((t, g)) = src.wake(q.now()) {
                        q.schedule(t, g).unwrap();
                    }
                }
                1 => {
                    if let Some((t, g)) = src.on_brm(RmPayload::backward(er, 0.0), q.now()) {
                        q.schedule(t, g).unwrap();
                    }
                    prop_assert!(src.acr() >= params.mcr && src.acr() <= params.pcr);
                }
                _ => {
                    if let Some((t, g)) = q.pop() {
                        let acr = src.acr();
                        let out = src.emit_slot(t, g);
                        if let Some(cell) = out.cell {
                            emitted += 1;
                            prop_assert_eq!(cell.is_forward_rm(), emitted.is_multiple_of(32));
                            if let Some(l) = last {
                                prop_assert!(t - l >= pacing_gap(acr));
                            }
                            last = Some(t);
                        }
                        if let Some((t, g)) = out.next {
                            q.schedule(t, g).unwrap();
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tcp_window_and_growth(acks in prop::collection::vec(0u64..40, 1..200), mss in 1u32..10_000) {
        let params = TcpParams { rwnd: 64 * mss as u64, ..TcpParams::new(mss) };
        let mut s = TcpSender::new(params).unwrap();
        let mut now = SimTime::ZERO;
        s.fill_window(now);
        for a in acks {
            now += SimTime::from_millis(1);
            let before = s.cwnd();
            // acknowledge `a` segments beyond snd_una, capped at what was sent
            let ack = (s.snd_una() + a * mss as u64).min(s.snd_nxt());
            s.on_ack(ack, now).unwrap();
            prop_assert!(s.cwnd() >= before);
            prop_assert!(s.cwnd() >= mss as u64);
            s.fill_window(now);
            prop_assert!(s.flight() <= s.cwnd().min(params.rwnd));
            prop_assert!(s.snd_una() <= s.snd_nxt());
        }
        prop_assert_eq!(s.retransmissions(), 0);
    }

    #[test]
    fn receiver_prefix_integrity(order in Just((0u64..40).collect::<Vec<_>>()).prop_shuffle(), dup in 0usize..40) {
        let mss = 512u32;
        let mut r = TcpReceiver::new();
        let mut ack = 0;
        for (i, &k) in order.iter().enumerate() {
            ack = r.deliver(k * mss as u64, mss);
            if i == dup {
                r.deliver(k * mss as u64, mss);
            }
            prop_assert_eq!(r.delivered_bytes(), r.rcv_nxt());
            prop_assert!(ack % mss as u64 == 0);
        }
        prop_assert_eq!(ack, 40 * mss as u64);
        prop_assert_eq!(r.integrity_faults(), 0);
        prop_assert_eq!(r.digest(), expected_digest(40 * mss as u64, mss));
    }

    #[test]
    fn bounded_sequences_stay_in_bounds(
        raw in prop::collection::vec(-20.0f64..40.0, 1..300),
        lo in -1.0f64..2.0,
        width in 1.0f64..20.0,
    ) {
        let b = RateBounds::new(lo, lo + width).unwrap();
        for mode in [BoundingMode::ClipZero, BoundingMode::ClipCompensate, BoundingMode::Exponentiate] {
            let out = bound_sequence(&raw, mode, b).unwrap();
            prop_assert_eq!(out.values.len(), raw.len());
            prop_assert!(out.values.iter().all(|&v| b.contains(v)));
        }
        if let Ok(out) = bound_sequence(&raw, BoundingMode::Reject, b) {
            let kept: Vec<f64> = raw.iter().copied().filter(|&v| b.contains(v)).collect();
            prop_assert_eq!(out.values, kept);
        }
    }

    #[test]
    fn fgn_deterministic(seed in any::<u64>(), hurst in 0.5f64..0.95, n in 1usize..3000) {
        let p = FgnParams::new(hurst, 1.0, 2.0, n, seed);
        prop_assert_eq!(generate_fgn(&p).unwrap(), generate_fgn(&p).unwrap());
    }
}

fn scenario_strategy() -> impl Strategy<Value = ScenarioConfig> {
    (
        prop_oneof![Just(Scenario::Wan), Just(Scenario::SatShortFb), Just(Scenario::SatLongFb)],
        prop_oneof![Just(512u32), Just(9140u32), 100u32..2000],
        1usize..8,
        0usize..10,
        1.0f64..12.0,
        0.0f64..7.0,
        any::<u64>(),
        50u64..400,
    )
        .prop_map(|(s, mss, n_tcp, n_video, mean, sigma, seed, ms)| {
            let mut c = ScenarioConfig::new(s, mss, mean, sigma, seed).with_duration(SimTime::from_millis(ms));
            c.n_tcp = n_tcp;
            c.n_video = n_video;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn short_runs_hold_invariants(cfg in scenario_strategy()) {
        let a = simulate(&cfg).unwrap();
        prop_assert!(a.invariants.is_clean(), "{:?}", a.invariants.violations());
        prop_assert_eq!(a.report.retransmissions, 0);
        prop_assert!(a.report.abr_throughput_mbps + a.report.vbr_mean_mbps <= 149.76 * 1.005);
        let b = simulate(&cfg).unwrap();
        prop_assert_eq!(&a.report, &b.report);
    }
}

#[test]
fn report_changes_with_seed() {
    let d = SimTime::from_millis(300);
    let a = simulate(&ScenarioConfig::new(Scenario::Wan, 512, 5.0, 5.0, 1).with_duration(d)).unwrap();
    let b = simulate(&ScenarioConfig::new(Scenario::Wan, 512, 5.0, 5.0, 2).with_duration(d)).unwrap();
    assert_ne!(a.report.event_digest, b.report.event_digest);
}

#[test]
fn acr_trace_tracks_brm_feedback() {
    let mut c = ScenarioConfig::new(Scenario::Wan, 9140, 5.0, 5.0, 3).with_duration(SimTime::from_millis(500));
    c.traces.acr = true;
    c.traces.erica = true;
    let out = simulate(&c).unwrap();
    assert!(out.acr_trace.len() > c.n_tcp);
    assert!(out.acr_trace.iter().all(|r| r.acr_mbps >= 0.0 && r.acr_mbps <= 149.76 + 1e-9));
    assert!(!out.erica_trace.is_empty());
    assert!(out.erica_trace.iter().all(|r| r.z > 0.0));
}
