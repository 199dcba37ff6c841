//! Laplace transform of the normalized interference at the typical UE.
//!
//! Each BS is hidden or deaf with probability one half and transmits with
//! probability `p_T`, so a single BS at distance `t` contributes the factor
//! `u(s, t) = 1 - p_T/2 + (p_T/2) E_G[1 / (1 + s C G t^(-alpha))]` per class.
//! Hidden interferers are absent inside the ball of radius `h`, deaf ones
//! inside `d`, and operator-1 sites respect the association exclusion.

use std::f64::consts::PI;

use super::{AnalysisContext, ExclusionRadii};
use crate::association::exclusion_radius;
use crate::deployment::{OperatorSet, SiteDensities};
use crate::error::Result;
use crate::quadrature::{integrate_to, Tolerance};
use crate::radio::{interferer_gain_distribution, GainDistribution, LinkType, PathLossParams};

/// `E_K E_G E_F[exp(-s C K F G t^(-alpha))]` for one interferer class.
pub fn u_function(s: f64, t: f64, link: LinkType, p_t: f64, ctx: &AnalysisContext) -> f64 {
    let gains = interferer_gain_distribution(&ctx.params.antenna);
    u_with(s, t, link, p_t, &gains, &ctx.params.path_loss)
}

#[inline]
pub(crate) fn u_with(s: f64, t: f64, link: LinkType, p_t: f64, gains: &GainDistribution, pl: &PathLossParams) -> f64 {
    let x = s * pl.gain(link, t);
    let faded: f64 = gains.atoms().iter().map(|a| a.prob / (1.0 + x * a.gain)).sum();
    1.0 - 0.5 * p_t + 0.5 * p_t * faded
}

/// `1 - u`, computed without cancellation when the interference term is tiny.
#[inline]
fn one_minus_u(s: f64, t: f64, link: LinkType, p_t: f64, gains: &GainDistribution, pl: &PathLossParams) -> f64 {
    let x = s * pl.gain(link, t);
    let hit: f64 = gains.atoms().iter().map(|a| a.prob * (x * a.gain) / (1.0 + x * a.gain)).sum();
    0.5 * p_t * hit
}

/// Everything the transform needs besides `(s, r)`.
pub(crate) struct LaplaceKernel<'a> {
    pub pl: &'a PathLossParams,
    pub gains: &'a GainDistribution,
    /// Total site density in 1/m^2.
    pub lambda: f64,
    pub a: f64,
    pub rho: f64,
    pub upper: f64,
    pub tol: Tolerance,
}

impl LaplaceKernel<'_> {
    fn u(&self, s: f64, t: f64, link: LinkType, p_t: f64) -> f64 {
        u_with(s, t, link, p_t, self.gains, self.pl)
    }

    /// `u` for a BS at distance `t`, set to one inside the exclusion ball.
    fn u_outside(&self, s: f64, t: f64, link: LinkType, p_t: f64, radius: f64) -> f64 {
        if t < radius {
            1.0
        } else {
            self.u(s, t, link, p_t)
        }
    }

    /// Factor contributed by BSs co-located with the serving BS.
    pub fn colocated(&self, s: f64, r: f64, serving: LinkType, p_t: f64, radii: &ExclusionRadii) -> f64 {
        self.u_outside(s, r, serving, p_t, radii.hidden(serving)) * self.u_outside(s, r, serving, p_t, radii.deaf(serving))
    }

    /// Returns `int_x^upper g(t) dt` for every `x` in `points`.
    fn upper_tails(&self, g: impl Fn(f64) -> f64, points: &[f64]) -> Result<Vec<f64>> {
        let mut sorted: Vec<f64> = points.iter().map(|&x| x.min(self.upper)).collect();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let mut tail_from = vec![0.0; sorted.len()];
        let last = sorted.len() - 1;
        tail_from[last] = integrate_to(&g, sorted[last], self.upper, &[], 2000.0, self.tol)?.value;
        for i in (0..last).rev() {
            tail_from[i] = tail_from[i + 1] + crate::quadrature::integrate(&g, sorted[i], sorted[i + 1], &[], self.tol)?.value;
        }
        Ok(points
            .iter()
            .map(|&x| {
                let i = sorted.iter().position(|&y| y == x.min(self.upper)).expect("point was inserted");
                tail_from[i]
            })
            .collect())
    }

    /// Exponent of the operator-1 Laplace transform with serving set `{1}`.
    pub fn exponent(&self, s: f64, r: f64, serving: LinkType, p_t: f64, radii: &ExclusionRadii) -> Result<f64> {
        if s == 0.0 || p_t == 0.0 || self.lambda == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for link in LinkType::ALL {
            let assoc = if link == serving { r } else { exclusion_radius(r, serving, self.pl) };
            let (h, d) = (radii.hidden(link), radii.deaf(link));
            let pts = [h, d, assoc.max(h), assoc.max(d)];
            let g1 = |t: f64| one_minus_u(s, t, link, p_t, self.gains, self.pl) * t * self.pl.p_link(link, t);
            let g2 = |t: f64| {
                let omu = one_minus_u(s, t, link, p_t, self.gains, self.pl);
                omu * (self.a + self.rho * (1.0 - omu)) * t * self.pl.p_link(link, t)
            };
            let t1 = self.upper_tails(g1, &pts[..2])?;
            let t2 = self.upper_tails(g2, &pts[2..])?;
            total += (1.0 - self.a) * (t1[0] + t1[1]) + t2[0] + t2[1];
        }
        Ok(2.0 * PI * self.lambda * total)
    }
}

pub(crate) fn kernel<'a>(ctx: &'a AnalysisContext, gains: &'a GainDistribution, dens: &SiteDensities) -> LaplaceKernel<'a> {
    let lambda = dens.total() * 1e-6;
    let a = if lambda > 0.0 { (dens.excl_1 + dens.shared) * 1e-6 / lambda } else { 0.0 };
    LaplaceKernel {
        pl: &ctx.params.path_loss,
        gains,
        lambda,
        a,
        rho: ctx.params.sharing.rho,
        upper: ctx.upper(),
        tol: inner_tolerance(ctx, lambda),
    }
}

/// Tolerance of the radial integrals, with the absolute part set so the
/// exponent `2 pi lambda I` is accurate to about 1e-13.
fn inner_tolerance(ctx: &AnalysisContext, lambda: f64) -> Tolerance {
    let abs = if lambda > 0.0 { 1e-13 / (2.0 * PI * lambda) } else { 1e-14 };
    Tolerance { rel: (ctx.quadrature.rel_tol * 1e-3).max(1e-12), abs, max_panels: 4000 }
}

/// Laplace transform of the interference for serving distance `r`, serving
/// link `serving_link` and serving set `serving_set`, two operators.
pub fn laplace_interference(
    s: f64,
    r: f64,
    serving_link: LinkType,
    serving_set: OperatorSet,
    p_t: f64,
    radii: &ExclusionRadii,
    ctx: &AnalysisContext,
) -> Result<f64> {
    let gains = interferer_gain_distribution(&ctx.params.antenna);
    let dens = ctx.params.densities()?;
    let k = kernel(ctx, &gains, &dens);
    let mut l = (-k.exponent(s, r, serving_link, p_t, radii)?).exp();
    if serving_set.len() > 1 {
        l *= k.colocated(s, r, serving_link, p_t, radii).powi(serving_set.len() as i32 - 1);
    }
    Ok(l)
}

/// Set-by-set form of the transform: every tagged process `S` contributes
/// `lambda_S int (1 - u^|S|) t p(t) dt` per interferer class.
///
/// `sets` lists `(S, density per km^2)`; the subscriber is operator 1.
#[allow(clippy::too_many_arguments)]
pub fn laplace_interference_general(
    s: f64,
    r: f64,
    serving_link: LinkType,
    serving_set: OperatorSet,
    p_t: f64,
    radii: &ExclusionRadii,
    sets: &[(OperatorSet, f64)],
    ctx: &AnalysisContext,
) -> Result<f64> {
    let gains = interferer_gain_distribution(&ctx.params.antenna);
    let pl = &ctx.params.path_loss;
    let tol = inner_tolerance(ctx, sets.iter().map(|(set, l)| set.len() as f64 * l * 1e-6).sum());
    let upper = ctx.upper();
    let mut exponent = 0.0;
    for &(set, lambda_km2) in sets {
        let lambda = lambda_km2 * 1e-6;
        if lambda == 0.0 {
            continue;
        }
        let k = set.len() as i32;
        for link in LinkType::ALL {
            let assoc = if link == serving_link { r } else { exclusion_radius(r, serving_link, pl) };
            for c in [radii.hidden(link), radii.deaf(link)] {
                let lower = if set.contains(1) { assoc.max(c) } else { c };
                if lower >= upper {
                    continue;
                }
                // 1 - u^k = (1 - u)(1 + u + ... + u^(k-1))
                let g = |t: f64| {
                    let q = one_minus_u(s, t, link, p_t, &gains, pl);
                    let u = 1.0 - q;
                    let geo: f64 = (0..k).map(|j| u.powi(j)).sum();
                    q * geo * t * pl.p_link(link, t)
                };
                exponent += lambda * integrate_to(g, lower, upper, &[], 2000.0, tol)?.value;
            }
        }
    }
    let mut l = (-2.0 * PI * exponent).exp();
    let co = serving_set.len() as i32 - 1;
    if co > 0 {
        let u = |c: f64| if r < c { 1.0 } else { u_with(s, r, serving_link, p_t, &gains, pl) };
        l *= (u(radii.hidden(serving_link)) * u(radii.deaf(serving_link))).powi(co);
    }
    Ok(l)
}
