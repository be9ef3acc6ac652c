use std::fmt;
use std::str::FromStr;

use super::HarnessError;
use crate::sim::{SimTime, DEFAULT_LINK_RATE_BPS};
use crate::switch::EricaParams;
use crate::tcp::DEFAULT_RWND;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Wan,
    SatShortFb,
    SatLongFb,
}

impl Scenario {
    pub fn default_duration(self) -> SimTime {
        match self {
            Scenario::Wan => SimTime::from_secs(10),
            Scenario::SatShortFb | Scenario::SatLongFb => SimTime::from_secs(170),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Wan => "wan",
            Scenario::SatShortFb => "sat-short",
            Scenario::SatLongFb => "sat-long",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "wan" => Ok(Scenario::Wan),
            "sat-short" | "sat-short-fb" => Ok(Scenario::SatShortFb),
            "sat-long" | "sat-long-fb" => Ok(Scenario::SatLongFb),
            _ => Err(format!("unknown scenario '{s}' (expected wan, sat-short or sat-long)")),
        }
    }
}

/// Where the VBR multiplex enters SW1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VbrAttach {
    /// Same access link kind as the TCP sources.
    #[default]
    LikeSources,
    /// A 1 km local link regardless of scenario.
    Local,
}

impl FromStr for VbrAttach {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "like-sources" | "sources" => Ok(VbrAttach::LikeSources),
            "local" => Ok(VbrAttach::Local),
            _ => Err(format!("unknown VBR attachment '{s}' (expected like-sources or local)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceOptions {
    /// ERICA+ interval rows for the bottleneck port.
    pub erica: bool,
    /// One row per ACR change.
    pub acr: bool,
    /// Per-connection samples at this period.
    pub tcp: Option<SimTime>,
    /// MPCR boundaries and VBR cell emissions.
    pub vbr: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_tcp: usize,
    pub n_video: usize,
    pub video_mean: f64,
    pub video_sigma: f64,
    pub hurst: f64,
    pub mss: u32,
    pub duration: SimTime,
    pub seed: u64,
    pub erica: EricaParams,
    pub sat_one_way: SimTime,
    pub hop_km: f64,
    pub link_rate_bps: f64,
    pub rwnd: u64,
    /// ICR as a fraction of PCR.
    pub icr_fraction: f64,
    pub vbr_attach: VbrAttach,
    pub traces: TraceOptions,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, mss: u32, video_mean: f64, video_sigma: f64, seed: u64) -> Self {
        Self {
            scenario,
            n_tcp: 15,
            n_video: 9,
            video_mean,
            video_sigma,
            hurst: 0.8,
            mss,
            duration: scenario.default_duration(),
            seed,
            erica: EricaParams::default(),
            sat_one_way: SimTime::from_millis(270),
            hop_km: 1000.0,
            link_rate_bps: DEFAULT_LINK_RATE_BPS,
            rwnd: DEFAULT_RWND,
            icr_fraction: 1.0 / 32.0,
            vbr_attach: VbrAttach::LikeSources,
            traces: TraceOptions::default(),
        }
    }

    pub fn with_duration(mut self, duration: SimTime) -> Self {
        self.duration = duration;
        self
    }

    /// No VBR sources means no background at all; otherwise the VBR
    /// parameters must be valid source parameters.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n_tcp == 0 {
            return bad("n_tcp must be at least 1".into());
        }
        if self.n_tcp + 1 > u16::MAX as usize {
            return bad(format!("n_tcp {} is too large", self.n_tcp));
        }
        if self.duration == SimTime::ZERO {
            return bad("duration must be positive".into());
        }
        if self.mss == 0 {
            return bad("mss must be at least 1".into());
        }
        if !(self.link_rate_bps > 0.0) {
            return bad("link rate must be positive".into());
        }
        if !(self.hop_km >= 0.0) {
            return bad("hop length must be non-negative".into());
        }
        if !(self.icr_fraction > 0.0 && self.icr_fraction <= 1.0) {
            return bad("ICR fraction must lie in (0, 1]".into());
        }
        if self.n_video > 0 && !(self.video_mean.is_finite() && self.video_sigma >= 0.0) {
            return bad("video mean/sigma must be finite, sigma non-negative".into());
        }
        self.erica.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in [Scenario::Wan, Scenario::SatShortFb, Scenario::SatLongFb] {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!("SAT_LONG_FB".parse::<Scenario>().unwrap(), Scenario::SatLongFb);
        assert!("lan".parse::<Scenario>().is_err());
    }

    #[test]
    fn defaults() {
        let c = ScenarioConfig::new(Scenario::Wan, 512, 5.0, 5.0, 1);
        assert_eq!(c.duration, SimTime::from_secs(10));
        assert_eq!((c.n_tcp, c.n_video), (15, 9));
        assert!(c.validate().is_ok());
        let c = ScenarioConfig::new(Scenario::SatShortFb, 512, 5.0, 5.0, 1);
        assert_eq!(c.duration, SimTime::from_secs(170));
    }

    #[test]
    fn validation() {
        let c = ScenarioConfig::new(Scenario::Wan, 512, 5.0, 5.0, 1);
        assert!(ScenarioConfig { n_tcp: 0, ..c.clone() }.validate().is_err());
        assert!(ScenarioConfig { duration: SimTime::ZERO, ..c.clone() }.validate().is_err());
        assert!(ScenarioConfig { video_sigma: -1.0, ..c.clone() }.validate().is_err());
        assert!(ScenarioConfig { n_video: 0, video_sigma: -1.0, ..c }.validate().is_ok());
    }
}
