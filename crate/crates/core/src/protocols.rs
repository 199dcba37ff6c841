//! The six medium-access schemes and their sensing link budgets.
//!
//! A contender is counted when the time-averaged power it delivers to the
//! sensing node, `P_X C A d^(-alpha)`, reaches the sensing threshold. For a
//! fixed sensing gain `A` this is a disk of radius
//! `(P_X C A / P_th)^(1/alpha)`, so every law below is a list of radii
//! indexed by gain atoms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::radio::{db_to_linear, interferer_gain_distribution, AntennaParams, GainDistribution, LinkType, PathLossParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    NonCs,
    OCst,
    DCst,
    OCsr,
    DCsr,
    DCsra,
}

/// Where carrier sensing happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// No sensing at all.
    None,
    /// At the serving BS.
    Transmitter,
    /// At the scheduled UE.
    Receiver,
}

impl Protocol {
    pub const ALL: [Protocol; 6] =
        [Protocol::NonCs, Protocol::OCst, Protocol::DCst, Protocol::OCsr, Protocol::DCsr, Protocol::DCsra];

    pub fn family(self) -> Family {
        match self {
            Protocol::NonCs => Family::None,
            Protocol::OCst | Protocol::DCst => Family::Transmitter,
            Protocol::OCsr | Protocol::DCsr | Protocol::DCsra => Family::Receiver,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::NonCs => "non-cs",
            Protocol::OCst => "ocst",
            Protocol::DCst => "dcst",
            Protocol::OCsr => "ocsr",
            Protocol::DCsr => "dcsr",
            Protocol::DCsra => "dcsra",
        }
    }

    /// Whether the sensing node listens with its directional beam.
    pub fn is_directional(self) -> bool {
        matches!(self, Protocol::DCst | Protocol::DCsr | Protocol::DCsra)
    }

    pub fn has_announcements(self) -> bool {
        self == Protocol::DCsra
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid("protocol", format!("unknown protocol `{s}`; expected one of non-cs|ocst|dcst|ocsr|dcsr|dcsra")))
    }
}

/// Thresholds and transmit powers, all linear mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingParams {
    pub p_th: f64,
    pub p_th_a: f64,
    pub p_x: f64,
    pub p_u: f64,
}

impl SensingParams {
    /// Thresholds given as dB offsets above the noise floor `nf_dbm`.
    pub fn from_offsets(nf_dbm: f64, p_th_offset_db: f64, p_th_a_offset_db: f64, p_x_dbm: f64, p_u_dbm: f64) -> Self {
        Self {
            p_th: db_to_linear(nf_dbm + p_th_offset_db),
            p_th_a: db_to_linear(nf_dbm + p_th_a_offset_db),
            p_x: db_to_linear(p_x_dbm),
            p_u: db_to_linear(p_u_dbm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_th", self.p_th), ("p_th_a", self.p_th_a), ("p_x", self.p_x), ("p_u", self.p_u)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// Farthest distance at which a BS with sensing gain `gain` is heard.
    pub fn sensing_radius(&self, gain: f64, link: LinkType, pl: &PathLossParams) -> f64 {
        (self.p_x * pl.intercept(link) * gain / self.p_th).powf(1.0 / pl.exponent(link))
    }

    /// Farthest distance at which an announcement with listening gain `gain` is heard.
    pub fn announcement_radius(&self, gain: f64, link: LinkType, pl: &PathLossParams) -> f64 {
        (self.p_u * pl.intercept(link) * gain / self.p_th_a).powf(1.0 / pl.exponent(link))
    }
}

fn no_sensing(p: Protocol) -> Error {
    Error::UnsupportedProtocol { protocol: p.name().into(), reason: "it performs no carrier sensing" }
}

/// Distribution of the sensing gain `A` between a contender and the sensing node.
pub fn sensing_gain_distribution(p: Protocol, a: &AntennaParams) -> Result<GainDistribution> {
    let (bs, ue, pen, pb) = (a.bs(), a.ue(), a.omni_penalty(), a.p_bs_main());
    match p {
        Protocol::NonCs => Err(no_sensing(p)),
        Protocol::OCst => GainDistribution::new([(bs.mainlobe * bs.mainlobe * pen, pb), (bs.sidelobe * bs.mainlobe * pen, 1.0 - pb)]),
        Protocol::DCst => GainDistribution::product((bs.mainlobe, bs.sidelobe, pb), (bs.mainlobe, bs.sidelobe, pb)),
        Protocol::OCsr => GainDistribution::new([(bs.mainlobe * ue.mainlobe * pen, pb), (bs.sidelobe * ue.mainlobe * pen, 1.0 - pb)]),
        Protocol::DCsr | Protocol::DCsra => Ok(interferer_gain_distribution(a)),
    }
}

/// Listening gain of a BS towards an omnidirectional UE announcement.
pub fn announcement_gain_distribution(a: &AntennaParams) -> GainDistribution {
    let (bs, ue, pen) = (a.bs(), a.ue(), a.omni_penalty());
    GainDistribution::new([(bs.mainlobe * ue.mainlobe * pen, a.p_bs_main()), (bs.sidelobe * ue.mainlobe * pen, 1.0 - a.p_bs_main())])
        .expect("positive gains and a valid lobe probability")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusAtom {
    pub gain: f64,
    pub prob: f64,
    pub radius: f64,
}

/// Sensing radii for one lobe of the sensing node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeLaw {
    pub los: Vec<RadiusAtom>,
    pub nlos: Vec<RadiusAtom>,
}

impl LobeLaw {
    fn build(gains: &GainDistribution, s: &SensingParams, pl: &PathLossParams) -> Self {
        let radii = |link| {
            gains
                .atoms()
                .iter()
                .map(|g| RadiusAtom { gain: g.gain, prob: g.prob, radius: s.sensing_radius(g.gain, link, pl) })
                .collect()
        };
        Self { los: radii(LinkType::Los), nlos: radii(LinkType::Nlos) }
    }

    pub fn for_link(&self, link: LinkType) -> &[RadiusAtom] {
        match link {
            LinkType::Los => &self.los,
            LinkType::Nlos => &self.nlos,
        }
    }
}

/// Sensing-distance law: the sensing node's lobe width and per-lobe radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingDistanceLaw {
    /// Width of the sensing node's listening lobe, `2 pi` when quasi-omni.
    pub cs_beamwidth: f64,
    pub mainlobe: LobeLaw,
    pub sidelobe: LobeLaw,
}

impl SensingDistanceLaw {
    pub fn lobe(&self, main: bool) -> &LobeLaw {
        if main {
            &self.mainlobe
        } else {
            &self.sidelobe
        }
    }
}

pub fn sensing_distance_law(p: Protocol, s: &SensingParams, a: &AntennaParams, pl: &PathLossParams) -> Result<SensingDistanceLaw> {
    let (bs, ue, pen, pb) = (a.bs(), a.ue(), a.omni_penalty(), a.p_bs_main());
    // contender's own lobe towards the sensing node, scaled by the sensing node's gain
    let toward = |k: f64| {
        GainDistribution::new([(k * bs.mainlobe, pb), (k * bs.sidelobe, 1.0 - pb)]).expect("positive gains and valid probability")
    };
    let (width, main, side) = match p {
        Protocol::NonCs => return Err(no_sensing(p)),
        Protocol::OCst => (2.0 * PI, toward(bs.mainlobe * pen), toward(bs.mainlobe * pen)),
        Protocol::DCst => (a.theta_bs, toward(bs.mainlobe), toward(bs.sidelobe)),
        Protocol::OCsr => (2.0 * PI, toward(ue.mainlobe * pen), toward(ue.mainlobe * pen)),
        Protocol::DCsr | Protocol::DCsra => (a.theta_ue, toward(ue.mainlobe), toward(ue.sidelobe)),
    };
    Ok(SensingDistanceLaw { cs_beamwidth: width, mainlobe: LobeLaw::build(&main, s, pl), sidelobe: LobeLaw::build(&side, s, pl) })
}

/// Announcement radii for a listening BS in its main lobe (`R`) and side lobe (`r`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnouncementRadii {
    pub big_los: f64,
    pub small_los: f64,
    pub big_nlos: f64,
    pub small_nlos: f64,
}

impl AnnouncementRadii {
    pub fn radius(&self, link: LinkType, main: bool) -> f64 {
        match (link, main) {
            (LinkType::Los, true) => self.big_los,
            (LinkType::Los, false) => self.small_los,
            (LinkType::Nlos, true) => self.big_nlos,
            (LinkType::Nlos, false) => self.small_nlos,
        }
    }
}

pub fn announcement_radii(s: &SensingParams, a: &AntennaParams, pl: &PathLossParams) -> AnnouncementRadii {
    let (bs, ue, pen) = (a.bs(), a.ue(), a.omni_penalty());
    let main = bs.mainlobe * ue.mainlobe * pen;
    let side = bs.sidelobe * ue.mainlobe * pen;
    AnnouncementRadii {
        big_los: s.announcement_radius(main, LinkType::Los, pl),
        small_los: s.announcement_radius(side, LinkType::Los, pl),
        big_nlos: s.announcement_radius(main, LinkType::Nlos, pl),
        small_nlos: s.announcement_radius(side, LinkType::Nlos, pl),
    }
}

/// A transmission the sensing node failed to detect that still reaches the
/// typical UE above the noise floor.
///
/// `sense_path_gain` is `C A d^(-alpha)` on the sensing path;
/// `interf_power_at_ue` and `nf` are in mW.
pub fn is_hidden_interferer(family: Family, sense_path_gain: f64, interf_power_at_ue: f64, s: &SensingParams, nf: f64) -> bool {
    family != Family::None && s.p_x * sense_path_gain < s.p_th && interf_power_at_ue > nf
}

/// A later transmission whose own sensing missed our link and that reaches
/// the typical UE above the noise floor.
pub fn is_deaf_interferer(
    family: Family,
    sense_path_gain_to_other_sensor: f64,
    interf_power_at_ue: f64,
    s: &SensingParams,
    nf: f64,
) -> bool {
    family != Family::None && s.p_x * sense_path_gain_to_other_sensor < s.p_th && interf_power_at_ue > nf
}
