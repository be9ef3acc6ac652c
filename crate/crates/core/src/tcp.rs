//! Simplified TCP: slow start and congestion avoidance, timeout-only loss
//! recovery (no fast retransmit), per-segment cumulative ACKs, AAL5
//! framing onto cells.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::sim::{SimTime, CELL_PAYLOAD_BYTES};

pub const TCPIP_HEADER_BYTES: u32 = 40;
pub const AAL5_TRAILER_BYTES: u32 = 8;
pub const DEFAULT_RWND: u64 = 16 * 1024 * 1024;
pub const RTO_GRANULARITY: SimTime = SimTime::from_millis(100);
pub const INITIAL_RTO: SimTime = SimTime::from_secs(3);
pub const MAX_RTO: SimTime = SimTime::from_secs(64);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TcpError {
    #[error("MSS must be at least 1 byte")]
    ZeroMss,
    #[error("receiver window {rwnd} is smaller than one MSS ({mss})")]
    WindowTooSmall { rwnd: u64, mss: u32 },
    #[error("ACK {ack} acknowledges data beyond snd_nxt {snd_nxt}")]
    AckBeyondSent { ack: u64, snd_nxt: u64 },
    #[error("segment of {0} bytes does not fit in one AAL5 PDU here")]
    SegmentTooLarge(u32),
}

/// Cells needed for one segment of `mss` payload bytes.
pub fn segment_to_cells(mss: u32) -> u32 {
    (mss + TCPIP_HEADER_BYTES + AAL5_TRAILER_BYTES).div_ceil(CELL_PAYLOAD_BYTES as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TcpParams {
    pub mss: u32,
    pub rwnd: u64,
    pub granularity: SimTime,
    pub initial_rto: SimTime,
}

impl TcpParams {
    pub fn new(mss: u32) -> Self {
        Self {
            mss,
            rwnd: DEFAULT_RWND,
            granularity: RTO_GRANULARITY,
            initial_rto: INITIAL_RTO,
        }
    }

    pub fn validate(&self) -> Result<(), TcpError> {
        if self.mss == 0 {
            return Err(TcpError::ZeroMss);
        }
        if self.rwnd < self.mss as u64 {
            return Err(TcpError::WindowTooSmall {
                rwnd: self.rwnd,
                mss: self.mss,
            });
        }
        if segment_to_cells(self.mss) > u16::MAX as u32 {
            return Err(TcpError::SegmentTooLarge(self.mss));
        }
        Ok(())
    }
}

/// A segment handed down to the ABR layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    pub len: u32,
    pub cells: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Unacked {
    end: u64,
    sent_at: SimTime,
    retransmitted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckOutcome {
    NewData { acked: u64 },
    Duplicate,
}

/// Sender side of an infinite bulk transfer.
#[derive(Debug, Clone)]
pub struct TcpSender {
    params: TcpParams,
    cwnd: u64,
    ssthresh: u64,
    snd_una: u64,
    snd_nxt: u64,
    snd_max: u64,
    srtt: Option<SimTime>,
    rttvar: SimTime,
    rto: SimTime,
    deadline: Option<SimTime>,
    unacked: VecDeque<Unacked>,
    retransmissions: u64,
    timeouts: u64,
    dup_acks: u64,
    rtt_samples: u64,
}

impl TcpSender {
    pub fn new(params: TcpParams) -> Result<Self, TcpError> {
        params.validate()?;
        Ok(Self {
            params,
            cwnd: params.mss as u64,
            ssthresh: params.rwnd,
            snd_una: 0,
            snd_nxt: 0,
            snd_max: 0,
            srtt: None,
            rttvar: SimTime::ZERO,
            rto: params.initial_rto,
            deadline: None,
            unacked: VecDeque::new(),
            retransmissions: 0,
            timeouts: 0,
            dup_acks: 0,
            rtt_samples: 0,
        })
    }

    pub fn params(&self) -> &TcpParams {
        &self.params
    }

    pub fn mss(&self) -> u32 {
        self.params.mss
    }

    pub fn cwnd(&self) -> u64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> u64 {
        self.ssthresh
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    pub fn snd_nxt(&self) -> u64 {
        self.snd_nxt
    }

    /// Highest sequence number ever sent.
    pub fn snd_max(&self) -> u64 {
        self.snd_max
    }

    pub fn flight(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    pub fn srtt(&self) -> Option<SimTime> {
        self.srtt
    }

    pub fn rttvar(&self) -> SimTime {
        self.rttvar
    }

    pub fn rto(&self) -> SimTime {
        self.rto
    }

    pub fn deadline(&self) -> Option<SimTime> {
        self.deadline
    }

    pub fn retransmissions(&self) -> u64 {
        self.retransmissions
    }

    pub fn timeouts(&self) -> u64 {
        self.timeouts
    }

    pub fn dup_acks(&self) -> u64 {
        self.dup_acks
    }

    pub fn rtt_samples(&self) -> u64 {
        self.rtt_samples
    }

    fn window(&self) -> u64 {
        self.cwnd.min(self.params.rwnd)
    }

    /// Release every full segment the window allows at `now`.
    pub fn fill_window(&mut self, now: SimTime) -> Vec<Segment> {
        let mss = self.params.mss as u64;
        let cells = segment_to_cells(self.params.mss) as u16;
        let mut out = Vec::new();
        while self.flight() + mss <= self.window() {
            let seq = self.snd_nxt;
            let retransmitted = seq < self.snd_max;
            if retransmitted {
                self.retransmissions += 1;
            }
            self.snd_nxt += mss;
            self.snd_max = self.snd_max.max(self.snd_nxt);
            self.unacked.push_back(Unacked {
                end: self.snd_nxt,
                sent_at: now,
                retransmitted,
            });
            out.push(Segment {
                seq,
                len: self.params.mss,
                cells,
            });
        }
        if !out.is_empty() && self.deadline.is_none() {
            self.deadline = Some(now + self.rto);
        }
        out
    }

    /// Process cumulative ACK `ack` arriving at `now`.
    pub fn on_ack(&mut self, ack: u64, now: SimTime) -> Result<AckOutcome, TcpError> {
        if ack > self.snd_max {
            return Err(TcpError::AckBeyondSent {
                ack,
                snd_nxt: self.snd_max,
            });
        }
        if ack <= self.snd_una {
            self.dup_acks += 1;
            return Ok(AckOutcome::Duplicate);
        }
        let acked = ack - self.snd_una;
        self.snd_una = ack;
        // after a go-back-N rewind an ACK for older data can overtake snd_nxt
        self.snd_nxt = self.snd_nxt.max(ack);

        let mut sample = None;
        while let Some(u) = self.unacked.front() {
            if u.end > ack {
                break;
            }
            if !u.retransmitted {
                sample = Some(now.saturating_sub(u.sent_at));
            }
            self.unacked.pop_front();
        }
        if let Some(rtt) = sample {
            self.rto_update(rtt);
        }

        let mss = self.params.mss as u64;
        if self.cwnd < self.ssthresh {
            self.cwnd += mss;
        } else {
            self.cwnd += (mss * mss / self.cwnd).max(1);
        }

        self.deadline = if self.flight() > 0 {
            Some(now + self.rto)
        } else {
            None
        };
        Ok(AckOutcome::NewData { acked })
    }

    /// Fold one RTT sample into the estimator (Karn's rule is applied by
    /// the caller: samples from retransmitted segments never get here).
    pub fn rto_update(&mut self, rtt: SimTime) {
        self.rtt_samples += 1;
        match self.srtt {
            None => {
                self.srtt = Some(rtt);
                self.rttvar = SimTime(rtt.0 / 2);
            }
            Some(srtt) => {
                let err = srtt.0.abs_diff(rtt.0);
                self.rttvar = SimTime((3 * self.rttvar.0 + err) / 4);
                self.srtt = Some(SimTime((7 * srtt.0 + rtt.0) / 8));
            }
        }
        let raw = self.srtt.unwrap() + SimTime(4 * self.rttvar.0);
        self.rto = raw.max(self.params.granularity).min(MAX_RTO);
    }

    /// Timer check at `now`. Returns true if a timeout fired, after which
    /// the caller should call `fill_window` to retransmit.
    pub fn on_timer(&mut self, now: SimTime) -> bool {
        match self.deadline {
            Some(d) if now >= d => {}
            _ => return false,
        }
        if self.flight() == 0 {
            self.deadline = None;
            return false;
        }
        let mss = self.params.mss as u64;
        self.ssthresh = (self.flight() / 2).max(2 * mss);
        self.cwnd = mss;
        self.snd_nxt = self.snd_una;
        self.unacked.clear();
        self.timeouts += 1;
        self.rto = SimTime(self.rto.0.saturating_mul(2)).min(MAX_RTO);
        self.deadline = None;
        true
    }
}

/// Receiver side: in-order delivery with out-of-order hold, one cumulative
/// ACK per segment.
#[derive(Debug, Clone, Default)]
pub struct TcpReceiver {
    rcv_nxt: u64,
    delivered_bytes: u64,
    held: BTreeMap<u64, u32>,
    segments: u64,
    duplicates: u64,
    integrity_faults: u64,
    digest: u64,
}

impl TcpReceiver {
    pub fn new() -> Self {
        Self {
            digest: FNV_OFFSET,
            ..Default::default()
        }
    }

    pub fn rcv_nxt(&self) -> u64 {
        self.rcv_nxt
    }

    pub fn delivered_bytes(&self) -> u64 {
        self.delivered_bytes
    }

    pub fn segments(&self) -> u64 {
        self.segments
    }

    pub fn duplicates(&self) -> u64 {
        self.duplicates
    }

    pub fn held(&self) -> usize {
        self.held.len()
    }

    /// Count of delivered ranges that did not start at the previous edge.
    pub fn integrity_faults(&self) -> u64 {
        self.integrity_faults
    }

    /// Running digest over the delivered (seq, len) ranges.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Accept a reassembled segment; returns the cumulative ACK to send.
    pub fn deliver(&mut self, seq: u64, len: u32) -> u64 {
        self.segments += 1;
        let end = seq + len as u64;
        if end <= self.rcv_nxt {
            self.duplicates += 1;
            return self.rcv_nxt;
        }
        if seq > self.rcv_nxt {
            self.held.entry(seq).or_insert(len);
            return self.rcv_nxt;
        }
        self.advance(seq, len);
        while let Some((&s, &l)) = self.held.first_key_value() {
            if s > self.rcv_nxt {
                break;
            }
            self.held.pop_first();
            if s + l as u64 > self.rcv_nxt {
                self.advance(s, l);
            }
        }
        self.rcv_nxt
    }

    fn advance(&mut self, seq: u64, len: u32) {
        if seq != self.rcv_nxt {
            // partial overlap: only the new tail is delivered
            self.integrity_faults += 1;
        }
        let end = seq + len as u64;
        let fresh = end - self.rcv_nxt;
        self.digest = range_digest(self.digest, self.rcv_nxt, fresh);
        self.delivered_bytes += fresh;
        self.rcv_nxt = end;
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a fold of a byte range's (start, length), used to compare the
/// delivered stream against what was sent.
pub fn range_digest(state: u64, start: u64, len: u64) -> u64 {
    let mut h = state;
    for b in start.to_le_bytes().into_iter().chain(len.to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Digest a receiver would hold after getting `total` bytes in `mss`
/// segments, starting from offset 0.
pub fn expected_digest(total: u64, mss: u32) -> u64 {
    let mut h = FNV_OFFSET;
    let mut at = 0;
    while at < total {
        let len = (mss as u64).min(total - at);
        h = range_digest(h, at, len);
        at += len;
    }
    h
}

/// AAL5 reassembly for one VC: cells arrive in order on a loss-free path,
/// so a PDU is complete when its last cell shows up.
#[derive(Debug, Clone, Default)]
pub struct Reassembly {
    current: Option<(u64, u16)>,
    received: u16,
    errors: u64,
}

impl Reassembly {
    pub fn errors(&self) -> u64 {
        self.errors
    }

    /// Feed cell `index` of `count` of the PDU carrying `seq`. Returns
    /// true when the PDU is complete.
    pub fn push(&mut self, seq: u64, index: u16, count: u16) -> bool {
        if index == 0 {
            if self.current.is_some() {
                self.errors += 1;
            }
            self.current = Some((seq, count));
            self.received = 0;
        }
        match self.current {
            Some((s, c)) if s == seq && c == count && self.received == index => {
                self.received += 1;
                if self.received == count {
                    self.current = None;
                    return true;
                }
                false
            }
            _ => {
                self.errors += 1;
                self.current = None;
                false
            }
        }
    }
}
