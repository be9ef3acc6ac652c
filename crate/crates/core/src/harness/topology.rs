use super::{HarnessError, Scenario, ScenarioConfig, VbrAttach};
use crate::sim::{propagation_for_km, SimTime};

pub type LinkId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Source(usize),
    VbrMux,
    Switch(usize),
    Dest(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub from: Node,
    pub to: Node,
    pub rate_bps: f64,
    pub propagation: SimTime,
    /// Forward links leaving a switch are fed by an output port.
    pub has_port: bool,
    /// Reverse-direction link (ACKs and backward RM cells).
    pub reverse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub links: Vec<LinkSpec>,
    /// Per TCP VC, source to destination.
    pub forward: Vec<Vec<LinkId>>,
    /// Per TCP VC, destination back to source.
    pub reverse: Vec<Vec<LinkId>>,
    /// VBR multiplex to SW2.
    pub vbr_route: Vec<LinkId>,
    pub bottleneck: LinkId,
    /// Round trip SW1 -> sources -> SW1.
    pub feedback_delay: SimTime,
    pub rtt: SimTime,
}

impl Topology {
    pub fn one_way_delay(&self, vc: usize) -> SimTime {
        self.forward[vc]
            .iter()
            .fold(SimTime::ZERO, |acc, &l| acc + self.links[l].propagation)
    }
}

/// Sources -(access)- SW1 -(bottleneck)- SW2 -(egress)- destinations, with
/// a mirrored reverse path for each VC.
pub fn build_topology(config: &ScenarioConfig) -> Result<Topology, HarnessError> {
    config.validate()?;
    let hop = propagation_for_km(config.hop_km);
    let local = propagation_for_km(1.0);
    let sat = config.sat_one_way;
    let (access, core, egress) = match config.scenario {
        Scenario::Wan => (hop, hop, hop),
        Scenario::SatShortFb => (hop, sat, local),
        Scenario::SatLongFb => (sat, local, local),
    };
    let vbr_access = match config.vbr_attach {
        VbrAttach::LikeSources => access,
        VbrAttach::Local => local,
    };
    let rate = config.link_rate_bps;
    let mut links = Vec::new();
    let mut add = |from, to, propagation, has_port, reverse| {
        links.push(LinkSpec {
            from,
            to,
            rate_bps: rate,
            propagation,
            has_port,
            reverse,
        });
        links.len() - 1
    };

    let sw1 = Node::Switch(0);
    let sw2 = Node::Switch(1);
    let bottleneck = add(sw1, sw2, core, true, false);
    let core_back = add(sw2, sw1, core, false, true);
    let mut forward = Vec::with_capacity(config.n_tcp);
    let mut reverse = Vec::with_capacity(config.n_tcp);
    for i in 0..config.n_tcp {
        let a = add(Node::Source(i), sw1, access, false, false);
        let e = add(sw2, Node::Dest(i), egress, true, false);
        let e_back = add(Node::Dest(i), sw2, egress, false, true);
        let a_back = add(sw1, Node::Source(i), access, false, true);
        forward.push(vec![a, bottleneck, e]);
        reverse.push(vec![e_back, core_back, a_back]);
    }
    let vbr_route = if config.n_video > 0 {
        let v = add(Node::VbrMux, sw1, vbr_access, false, false);
        vec![v, bottleneck]
    } else {
        Vec::new()
    };
    let feedback_delay = SimTime(2 * access.0);
    let rtt = SimTime(2 * (access.0 + core.0 + egress.0));
    Ok(Topology {
        links,
        forward,
        reverse,
        vbr_route,
        bottleneck,
        feedback_delay,
        rtt,
    })
}
