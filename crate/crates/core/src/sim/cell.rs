/// ATM cell size on the wire.
pub const CELL_BYTES: usize = 53;
pub const CELL_BITS: u64 = 424;
/// Payload carried by one cell.
pub const CELL_PAYLOAD_BYTES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VcId(pub u16);

impl VcId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for VcId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "vc{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ServiceClass {
    Abr,
    Vbr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Data,
    Rm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RmDirection {
    Forward,
    Backward,
}

/// Resource-management fields read and written by switches. Rates in cells/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmPayload {
    pub direction: RmDirection,
    pub er: f64,
    pub ccr: f64,
}

impl RmPayload {
    pub fn forward(er: f64, ccr: f64) -> Self {
        Self {
            direction: RmDirection::Forward,
            er,
            ccr,
        }
    }

    pub fn backward(er: f64, ccr: f64) -> Self {
        Self {
            direction: RmDirection::Backward,
            er,
            ccr,
        }
    }
}

/// Higher-layer content carried in a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayloadTag {
    Filler,
    /// Cell `index` of `count` cells carrying TCP bytes `[seq, seq + len)`.
    Segment { seq: u64, len: u32, index: u16, count: u16 },
    /// Cumulative TCP acknowledgement.
    Ack { ack: u64 },
}

/// One 53-byte ATM cell. It is an RM cell exactly when it carries an
/// [`RmPayload`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub vc: VcId,
    pub service: ServiceClass,
    pub rm: Option<RmPayload>,
    pub tag: PayloadTag,
}

impl Cell {
    pub fn data(vc: VcId, service: ServiceClass, tag: PayloadTag) -> Self {
        Self {
            vc,
            service,
            rm: None,
            tag,
        }
    }

    pub fn rm(vc: VcId, payload: RmPayload) -> Self {
        Self {
            vc,
            service: ServiceClass::Abr,
            rm: Some(payload),
            tag: PayloadTag::Filler,
        }
    }

    pub fn kind(&self) -> CellKind {
        if self.rm.is_some() {
            CellKind::Rm
        } else {
            CellKind::Data
        }
    }

    pub fn is_abr(&self) -> bool {
        self.service == ServiceClass::Abr
    }

    pub fn is_forward_rm(&self) -> bool {
        matches!(self.rm, Some(RmPayload { direction: RmDirection::Forward, .. }))
    }

    pub fn is_backward_rm(&self) -> bool {
        matches!(self.rm, Some(RmPayload { direction: RmDirection::Backward, .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_follows_rm_presence() {
        let d = Cell::data(VcId(1), ServiceClass::Vbr, PayloadTag::Filler);
        assert_eq!(d.kind(), CellKind::Data);
        let r = Cell::rm(VcId(1), RmPayload::forward(10.0, 5.0));
        assert_eq!(r.kind(), CellKind::Rm);
        assert!(r.is_forward_rm() && !r.is_backward_rm());
        assert_eq!(CELL_BITS as usize, CELL_BYTES * 8);
    }
}
