//! Analytical coverage evaluation.
//!
//! Evaluation order is fixed: the mean contender count depends on geometry
//! only, the transmission probability is its fixed point, and the Laplace
//! transforms and the coverage integral consume that probability.

mod contenders;
mod coverage;
mod laplace;

pub use contenders::{avg_contenders, solve_transmission_probability};
pub use coverage::{coverage_curve, coverage_probability, AnalysisResult, CoverageModel};
pub use laplace::{laplace_interference, laplace_interference_general, u_function};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::NetworkParams;
use crate::protocols::{announcement_gain_distribution, sensing_gain_distribution, Family, Protocol};
use crate::radio::LinkType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Relative tolerance of the outer radial integral.
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper limit of the interference integrals; `None` integrates to infinity.
    pub r_max_m: Option<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 1e-10, r_max_m: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisContext {
    pub params: NetworkParams,
    pub protocol: Protocol,
    pub quadrature: QuadratureSettings,
}

impl AnalysisContext {
    pub fn new(params: NetworkParams, protocol: Protocol) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, protocol, quadrature: QuadratureSettings::default() })
    }

    pub fn with_quadrature(mut self, q: QuadratureSettings) -> Result<Self> {
        if !(q.rel_tol > 0.0 && q.abs_tol > 0.0) {
            return Err(invalid("quadrature", "tolerances must be positive"));
        }
        if let Some(r) = q.r_max_m {
            if !(r > 0.0) {
                return Err(invalid("r_max_m", "must be positive"));
            }
        }
        self.quadrature = q;
        Ok(self)
    }

    pub(crate) fn upper(&self) -> f64 {
        self.quadrature.r_max_m.unwrap_or(f64::INFINITY)
    }
}

/// Mean radii of the balls around the typical UE that are free of hidden
/// (`h`) and deaf (`d`) interferers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExclusionRadii {
    pub h_los: f64,
    pub h_nlos: f64,
    pub d_los: f64,
    pub d_nlos: f64,
}

impl ExclusionRadii {
    pub fn hidden(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Los => self.h_los,
            LinkType::Nlos => self.h_nlos,
        }
    }

    pub fn deaf(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Los => self.d_los,
            LinkType::Nlos => self.d_nlos,
        }
    }
}

pub(crate) fn transmitter_sensing_unsupported(p: Protocol) -> Error {
    Error::UnsupportedProtocol { protocol: p.name().into(), reason: "transmitter-side sensing has no analytical model; use the simulator" }
}

/// Average sensing distances used as exclusion radii.
pub fn avg_exclusion_radii(ctx: &AnalysisContext) -> Result<ExclusionRadii> {
    let p = &ctx.params;
    let (s, pl) = (p.sensing(), &p.path_loss);
    match ctx.protocol.family() {
        Family::None => Ok(ExclusionRadii::default()),
        Family::Transmitter => Err(transmitter_sensing_unsupported(ctx.protocol)),
        Family::Receiver => {
            let a = sensing_gain_distribution(ctx.protocol, &p.antenna)?;
            let mut r = ExclusionRadii {
                h_los: a.expect(|g| s.sensing_radius(g, LinkType::Los, pl)),
                h_nlos: a.expect(|g| s.sensing_radius(g, LinkType::Nlos, pl)),
                ..Default::default()
            };
            if ctx.protocol.has_announcements() {
                let ann = announcement_gain_distribution(&p.antenna);
                r.d_los = ann.expect(|g| s.announcement_radius(g, LinkType::Los, pl));
                r.d_nlos = ann.expect(|g| s.announcement_radius(g, LinkType::Nlos, pl));
            }
            Ok(r)
        }
    }
}

/// Transmission probability of the protocol: 1 without sensing, otherwise
/// the fixed point for the mean contender count.
pub fn transmission_probability(ctx: &AnalysisContext) -> Result<f64> {
    match ctx.protocol.family() {
        Family::None => Ok(1.0),
        _ => Ok(solve_transmission_probability(avg_contenders(ctx)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radii_by_protocol() {
        let params = NetworkParams::default();
        let zero = avg_exclusion_radii(&AnalysisContext::new(params, Protocol::NonCs).unwrap()).unwrap();
        assert_eq!(zero, ExclusionRadii::default());

        let ctx = AnalysisContext::new(params, Protocol::DCsr).unwrap();
        let r = avg_exclusion_radii(&ctx).unwrap();
        assert_eq!((r.d_los, r.d_nlos), (0.0, 0.0));

        // explicit four-term expectation, independent of GainDistribution
        let (mb, sb) = (403.812_700_467_323_74f64, 3.239_828_808_843_550_5f64);
        let (mu, su) = (100.953_175_116_830_93f64, 1.171_572_875_253_81f64);
        let s = params.sensing();
        let radius = |g: f64| (s.p_x * 1e-6 * g / s.p_th).sqrt();
        let h = (radius(mb * mu) + 11.0 * radius(mb * su) + 35.0 * radius(sb * mu) + 385.0 * radius(sb * su)) / 432.0;
        assert_relative_eq!(r.h_los, h, max_relative = 1e-9);

        let ra = avg_exclusion_radii(&AnalysisContext::new(params, Protocol::DCsra).unwrap()).unwrap();
        assert_eq!(ra.h_los, r.h_los);
        assert!(ra.d_los > 0.0 && ra.d_nlos > 0.0);

        assert!(avg_exclusion_radii(&AnalysisContext::new(params, Protocol::OCst).unwrap()).is_err());
    }
}
