//! Mean number of contenders and the transmission-probability fixed point.

use std::f64::consts::PI;

use super::AnalysisContext;
use crate::association::link_moment_between;
use crate::error::{Error, Result};
use crate::protocols::{announcement_radii, sensing_distance_law, Family};
use crate::radio::LinkType;

/// Mean number of contenders seen by the sensing node.
///
/// Each BS is a potential contender, so a shared site contributes one
/// contender per hosted operator. Operator-1 sites closer than `r_bar` are
/// excluded for receiver-side sensing.
pub fn avg_contenders(ctx: &AnalysisContext) -> Result<f64> {
    let p = &ctx.params;
    let beta = p.path_loss.beta;
    let dens = p.densities()?;
    let law = match ctx.protocol.family() {
        Family::None => {
            return Err(Error::UnsupportedProtocol { protocol: ctx.protocol.name().into(), reason: "it has no contenders" })
        }
        _ => sensing_distance_law(ctx.protocol, &p.sensing(), &p.antenna, &p.path_loss)?,
    };
    let excl = match ctx.protocol.family() {
        Family::Receiver => p.r_bar,
        _ => 0.0,
    };
    let theta = law.cs_beamwidth;

    let mut total = 0.0;
    for (set, lambda_km2) in dens.by_set() {
        let weight = set.len() as f64 * lambda_km2 * 1e-6;
        if weight == 0.0 {
            continue;
        }
        let lower = if set.contains(1) { excl } else { 0.0 };
        for link in LinkType::ALL {
            let lobe_sum = |atoms: &[crate::protocols::RadiusAtom]| -> f64 {
                atoms.iter().map(|a| a.prob * link_moment_between(lower, a.radius, link, beta)).sum()
            };
            total += weight * (theta * lobe_sum(law.mainlobe.for_link(link)) + (2.0 * PI - theta) * lobe_sum(law.sidelobe.for_link(link)));
        }
    }

    if ctx.protocol.has_announcements() {
        let ann = announcement_radii(&p.sensing(), &p.antenna, &p.path_loss);
        let tb = p.antenna.theta_bs;
        let per_area: f64 = LinkType::ALL
            .iter()
            .map(|&l| tb * link_moment_between(0.0, ann.radius(l, true), l, beta) + (2.0 * PI - tb) * link_moment_between(0.0, ann.radius(l, false), l, beta))
            .sum();
        let bs_density: f64 = dens.by_set().iter().map(|(s, l)| s.len() as f64 * l * 1e-6).sum();
        total += bs_density * per_area;
    }
    Ok(total)
}

/// Unique root in `[0, 1]` of `p = (1 - p)^n`.
pub fn solve_transmission_probability(n_c: f64) -> f64 {
    if !(n_c > 0.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // f(p) = p - (1-p)^n increases from -1 to 1
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - (1.0 - mid).powf(n_c) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}
