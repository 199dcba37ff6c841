//! Coverage probability: the transmission probability times the integral
//! over the serving distance of noise, interference and association terms.

use serde::{Deserialize, Serialize};

use super::laplace::{kernel, LaplaceKernel};
use super::{avg_exclusion_radii, transmission_probability, AnalysisContext, ExclusionRadii};
use crate::association::{association_pdf_with, exclusion_radius};
use crate::deployment::SiteDensities;
use crate::error::Result;
use crate::protocols::Protocol;
use crate::quadrature::{integrate, Tolerance};
use crate::radio::{db_to_linear, interferer_gain_distribution, GainDistribution, LinkType};

/// Analytic coverage curve of one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub protocol: Protocol,
    pub p_t: f64,
    pub mean_contenders: Option<f64>,
    pub radii: ExclusionRadii,
    pub z_db: Vec<f64>,
    pub p_c: Vec<f64>,
}

/// Precomputed state for evaluating the coverage of one protocol at many thresholds.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    ctx: AnalysisContext,
    gains: GainDistribution,
    dens: SiteDensities,
    p_t: f64,
    radii: ExclusionRadii,
}

impl CoverageModel {
    pub fn new(ctx: &AnalysisContext) -> Result<Self> {
        let radii = avg_exclusion_radii(ctx)?;
        let p_t = transmission_probability(ctx)?;
        Self::with_transmission_probability(ctx, p_t, radii)
    }

    /// Uses a given transmission probability and exclusion radii instead of the derived ones.
    pub fn with_transmission_probability(ctx: &AnalysisContext, p_t: f64, radii: ExclusionRadii) -> Result<Self> {
        Ok(Self {
            ctx: *ctx,
            gains: interferer_gain_distribution(&ctx.params.antenna),
            dens: ctx.params.densities()?,
            p_t,
            radii,
        })
    }

    pub fn p_t(&self) -> f64 {
        self.p_t
    }

    pub fn radii(&self) -> ExclusionRadii {
        self.radii
    }

    fn kernel(&self) -> LaplaceKernel<'_> {
        kernel(&self.ctx, &self.gains, &self.dens)
    }

    /// Radii where some lower limit or co-located factor switches branch.
    fn breakpoints(&self) -> Vec<f64> {
        let pl = &self.ctx.params.path_loss;
        let mut b = Vec::new();
        for c in [self.radii.h_los, self.radii.d_los, self.radii.h_nlos, self.radii.d_nlos] {
            if c > 0.0 {
                b.push(c);
            }
        }
        for c in [self.radii.h_nlos, self.radii.d_nlos] {
            if c > 0.0 {
                // serving LoS: D_N(r) = c
                b.push(exclusion_radius(c, LinkType::Nlos, pl));
            }
        }
        for c in [self.radii.h_los, self.radii.d_los] {
            if c > 0.0 {
                b.push(exclusion_radius(c, LinkType::Los, pl));
            }
        }
        b
    }

    /// Integrand over the serving distance, summed over link types and serving sets.
    fn integrand(&self, k: &LaplaceKernel<'_>, z: f64, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        let p = &self.ctx.params;
        let pl = &p.path_loss;
        let sigma2 = p.sigma2();
        let serving_gain = p.antenna.serving_gain();
        let (l_one, l_both, l_1) = (self.dens.excl_1 * 1e-6, self.dens.shared * 1e-6, (self.dens.excl_1 + self.dens.shared) * 1e-6);
        let mut total = 0.0;
        for tau in LinkType::ALL {
            let f_one = association_pdf_with(r, tau, l_one, l_1, pl);
            let f_both = association_pdf_with(r, tau, l_both, l_1, pl);
            if f_one + f_both == 0.0 {
                continue;
            }
            let s = z / (pl.gain(tau, r) * serving_gain);
            let noise = (-sigma2 * s).exp();
            if noise == 0.0 {
                continue;
            }
            let lap = (-k.exponent(s, r, tau, self.p_t, &self.radii)?).exp();
            let co = if f_both > 0.0 { k.colocated(s, r, tau, self.p_t, &self.radii) } else { 0.0 };
            total += noise * lap * (f_one + co * f_both);
        }
        Ok(total)
    }

    /// Serving distance beyond which the association density is negligible.
    fn support_radius(&self) -> f64 {
        let pl = &self.ctx.params.path_loss;
        let (l_serv, l_1) = ((self.dens.excl_1 + self.dens.shared) * 1e-6, (self.dens.excl_1 + self.dens.shared) * 1e-6);
        let mut r = 1000.0;
        while r < 1e8 {
            let f: f64 = LinkType::ALL.iter().map(|&t| association_pdf_with(r, t, l_serv, l_1, pl)).sum();
            if f * r < 1e-15 {
                break;
            }
            r *= 1.5;
        }
        r
    }

    /// Coverage probability at linear SINR threshold `z`.
    pub fn coverage(&self, z: f64) -> Result<f64> {
        if self.p_t == 0.0 || self.dens.excl_1 + self.dens.shared == 0.0 {
            return Ok(0.0);
        }
        let k = self.kernel();
        let tol = Tolerance { rel: self.ctx.quadrature.rel_tol, abs: self.ctx.quadrature.abs_tol, max_panels: 2000 };
        let mut err = None;
        let r_cut = self.support_radius();
        let mut breaks: Vec<f64> = self.breakpoints().into_iter().filter(|&b| b < r_cut).collect();
        breaks.extend((0..12).map(|i| 12.5 * 2f64.powi(i)).filter(|&b| b < r_cut));
        let value = integrate(
            |r| match self.integrand(&k, z, r) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            r_cut,
            &breaks,
            tol,
        )?
        .value;
        if let Some(e) = err {
            return Err(e);
        }
        Ok((self.p_t * value).clamp(0.0, self.p_t))
    }
}

/// Coverage probability at linear threshold `z` for the protocol in `ctx`.
pub fn coverage_probability(z: f64, ctx: &AnalysisContext) -> Result<f64> {
    CoverageModel::new(ctx)?.coverage(z)
}

/// Coverage over a grid of thresholds in dB.
pub fn coverage_curve(z_db: &[f64], ctx: &AnalysisContext) -> Result<AnalysisResult> {
    let model = CoverageModel::new(ctx)?;
    let p_c = z_db.iter().map(|&z| model.coverage(db_to_linear(z))).collect::<Result<Vec<_>>>()?;
    let mean_contenders = match ctx.protocol {
        Protocol::NonCs => None,
        _ => Some(super::avg_contenders(ctx)?),
    };
    Ok(AnalysisResult { protocol: ctx.protocol, p_t: model.p_t, mean_contenders, radii: model.radii, z_db: z_db.to_vec(), p_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::QuadratureSettings;
    use crate::params::NetworkParams;

    fn grid() -> Vec<f64> {
        (0..17).map(|i| -10.0 + 5.0 * i as f64).collect()
    }

    #[test]
    fn curves_monotone_and_bounded() {
        for proto in [Protocol::NonCs, Protocol::OCsr, Protocol::DCsr, Protocol::DCsra] {
            let ctx = AnalysisContext::new(NetworkParams::default(), proto).unwrap();
            let res = coverage_curve(&grid(), &ctx).unwrap();
            for w in res.p_c.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{proto}: {:?}", res.p_c);
            }
            assert!(res.p_c.iter().all(|&p| (0.0..=res.p_t).contains(&p)));
        }
    }

    #[test]
    fn low_threshold_recovers_transmission_probability() {
        for proto in [Protocol::NonCs, Protocol::DCsr] {
            let ctx = AnalysisContext::new(NetworkParams::default(), proto).unwrap();
            let m = CoverageModel::new(&ctx).unwrap();
            let pc = m.coverage(1e-6).unwrap();
            assert!((pc - m.p_t()).abs() < 1e-3, "{proto}: {pc} vs {}", m.p_t());
        }
        let ctx = AnalysisContext::new(NetworkParams::default(), Protocol::NonCs).unwrap();
        assert_eq!(CoverageModel::new(&ctx).unwrap().p_t(), 1.0);
    }

    #[test]
    fn refinement_changes_little() {
        for proto in [Protocol::NonCs, Protocol::DCsra] {
            let ctx = AnalysisContext::new(NetworkParams::default(), proto).unwrap();
            let fine = ctx.with_quadrature(QuadratureSettings { rel_tol: 1e-9, abs_tol: 1e-13, r_max_m: None }).unwrap();
            let (a, b) = (CoverageModel::new(&ctx).unwrap(), CoverageModel::new(&fine).unwrap());
            for z_db in [-10.0, 30.0, 70.0] {
                let (x, y) = (a.coverage(db_to_linear(z_db)).unwrap(), b.coverage(db_to_linear(z_db)).unwrap());
                assert!((x - y).abs() < ctx.quadrature.abs_tol + 1e-6 * y, "{proto} {z_db}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn cst_is_refused() {
        for proto in [Protocol::OCst, Protocol::DCst] {
            let ctx = AnalysisContext::new(NetworkParams::default(), proto).unwrap();
            assert!(coverage_probability(1.0, &ctx).is_err());
        }
    }

    #[test]
    fn zero_transmission_gives_noise_limited_coverage_times_zero() {
        let ctx = AnalysisContext::new(NetworkParams::default(), Protocol::DCsr).unwrap();
        let m = CoverageModel::with_transmission_probability(&ctx, 0.0, ExclusionRadii::default()).unwrap();
        assert_eq!(m.coverage(10.0).unwrap(), 0.0);
    }

    #[test]
    fn interference_free_coverage_matches_direct_integral() {
        // p_T = 1 but no interferers: only operator-1 sites, rho irrelevant.
        // The direct oracle integrates e^(-sigma2 s) f_R with an independent
        // composite rule.
        let params = NetworkParams {
            sharing: crate::deployment::SharingModel { lambda_1: 30.0, lambda_2: 0.0, rho: 0.0 },
            ..Default::default()
        };
        let ctx = AnalysisContext::new(params, Protocol::NonCs).unwrap();
        let m = CoverageModel::new(&ctx).unwrap();
        let z = db_to_linear(60.0);
        let pl = params.path_loss;
        let g = params.antenna.serving_gain();
        let l1 = 30e-6;
        let noise_only = |r: f64| -> f64 {
            LinkType::ALL
                .iter()
                .map(|&tau| (-params.sigma2() * z / (pl.gain(tau, r) * g)).exp() * association_pdf_with(r, tau, l1, l1, &pl))
                .sum()
        };
        let tol = Tolerance { rel: 1e-10, abs: 1e-14, max_panels: 4000 };
        let direct = integrate(noise_only, 0.0, 3000.0, &[], tol).unwrap().value;
        let with_interference = m.coverage(z).unwrap();
        assert!(with_interference < direct);
        // switching off transmissions of other BSs gives back the direct value
        let quiet = CoverageModel::with_transmission_probability(&ctx, 1.0, ExclusionRadii { h_los: 1e9, h_nlos: 1e9, d_los: 1e9, d_nlos: 1e9 })
            .unwrap();
        let pc = quiet.coverage(z).unwrap();
        assert!((pc - direct).abs() < 1e-6, "{pc} vs {direct}");
    }
}
