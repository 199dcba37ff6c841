//! Max-average-power association and the association-distance density.
//!
//! The typical UE subscribes to operator 1 and attaches to the operator-1
//! site with the strongest fading-averaged path gain. The void of closer
//! sites of the same link type, together with the exclusion radius for the
//! other link type, shapes both the density of the serving distance and
//! the lower limits of the interference integrals.

use serde::{Deserialize, Serialize};

use crate::deployment::{Deployment, OperatorSet, SharingModel};
use crate::error::{check_range, Error, Result};
use crate::radio::{LinkType, PathLossParams};

/// Serving site chosen for the typical UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationOutcome {
    /// Index into `Deployment::sites`.
    pub bs_index: usize,
    pub link: LinkType,
    pub distance: f64,
    pub operator_set: OperatorSet,
}

impl AssociationOutcome {
    /// Radius inside which no operator-1 site of type `link` can exist.
    pub fn exclusion(&self, link: LinkType, p: &PathLossParams) -> f64 {
        if link == self.link {
            self.distance
        } else {
            exclusion_radius(self.distance, self.link, p)
        }
    }
}

/// Radius of the zone free of operator-1 sites of the *other* link type.
///
/// Serving LoS at `r` gives `D_N(r)`; serving NLoS gives `D_L(r)`.
pub fn exclusion_radius(r: f64, serving_link: LinkType, p: &PathLossParams) -> f64 {
    let other = serving_link.other();
    let (c_s, a_s) = (p.intercept(serving_link), p.exponent(serving_link));
    let (c_o, a_o) = (p.intercept(other), p.exponent(other));
    (c_o / c_s).powf(1.0 / a_o) * r.powf(a_s / a_o)
}

/// `int_0^r t e^(-beta t) dt`, stable for small `beta r`.
pub(crate) fn los_moment(r: f64, beta: f64) -> f64 {
    let x = beta * r;
    if x < 1e-3 {
        // series of (1 - e^-x (1 + x)) / beta^2
        r * r * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0)
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (beta * beta)
    }
}

/// `int_0^r t p_tau(t) dt` in closed form.
pub(crate) fn link_moment(r: f64, link: LinkType, beta: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return match link {
            LinkType::Los if beta > 0.0 => 1.0 / (beta * beta),
            _ => f64::INFINITY,
        };
    }
    match link {
        LinkType::Los => los_moment(r, beta),
        LinkType::Nlos => 0.5 * r * r - los_moment(r, beta),
    }
}

/// `int_a^b t p_tau(t) dt`, zero when `b <= a`.
pub(crate) fn link_moment_between(a: f64, b: f64, link: LinkType, beta: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let v = link_moment(b, link, beta) - link_moment(a, link, beta);
    v.max(0.0)
}

/// Void exponent `2 pi lambda int_0^r p_tau(t) t dt`, `lambda` in 1/m^2.
pub fn void_exponent(r: f64, link: LinkType, lambda_s: f64, p: &PathLossParams) -> Result<f64> {
    check_range("r", r, 0.0, f64::INFINITY)?;
    Ok(2.0 * std::f64::consts::PI * lambda_s * link_moment(r, link, p.beta))
}

/// Density of the serving distance with link `tau` and serving set `s`.
///
/// Densities in the sharing model are per km^2; `r` is in meters.
pub fn association_pdf(r: f64, tau: LinkType, s: OperatorSet, model: &SharingModel, p: &PathLossParams) -> Result<f64> {
    check_range("r", r, 0.0, f64::INFINITY)?;
    let dens = crate::deployment::decompose_densities(model)?;
    if !s.contains(1) {
        return Ok(0.0);
    }
    Ok(association_pdf_with(r, tau, dens.of(s) * 1e-6, (dens.excl_1 + dens.shared) * 1e-6, p))
}

/// Same as [`association_pdf`] with densities already in 1/m^2:
/// `lambda_s` for the serving process and `lambda_1` for all operator-1 sites.
pub(crate) fn association_pdf_with(r: f64, tau: LinkType, lambda_s: f64, lambda_1: f64, p: &PathLossParams) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let d = exclusion_radius(r, tau, p);
    let void = link_moment(r, tau, p.beta) + link_moment(d, tau.other(), p.beta);
    2.0 * std::f64::consts::PI * lambda_s * r * p.p_link(tau, r) * (-2.0 * std::f64::consts::PI * lambda_1 * void).exp()
}

/// Picks the operator-1 site with the largest `C_tau r^(-alpha_tau)`.
///
/// `link_map[i]` is the link state of site `i`. Ties go to the lowest index.
pub fn associate(d: &Deployment, link_map: &[LinkType], p: &PathLossParams) -> Result<AssociationOutcome> {
    assert_eq!(link_map.len(), d.sites.len(), "one link state per site");
    let mut best: Option<(f64, usize)> = None;
    for (i, site) in d.sites.iter().enumerate() {
        if !site.operators.contains(1) {
            continue;
        }
        let g = p.gain(link_map[i], site.distance());
        if best.map_or(true, |(bg, _)| g > bg) {
            best = Some((g, i));
        }
    }
    let (_, i) = best.ok_or(Error::NoCandidate { operator: 1 })?;
    let site = &d.sites[i];
    Ok(AssociationOutcome { bs_index: i, link: link_map[i], distance: site.distance(), operator_set: site.operators })
}
