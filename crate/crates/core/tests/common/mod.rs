//! Independent oracles shared by the oracle tests and the acceptance runner.

#![allow(dead_code)]

use mmshare::analysis::{
    avg_contenders, avg_exclusion_radii, laplace_interference_general, solve_transmission_probability, transmission_probability, u_function,
    AnalysisContext, QuadratureSettings,
};
use mmshare::association::{association_pdf, exclusion_radius};
use mmshare::deployment::OperatorSet;
use mmshare::quadrature::{integrate, Tolerance};
use mmshare::radio::{db_to_linear, LinkType};
use mmshare::simulator::{association_distances, model_interference, oracle_rng, origin_contender_counts, Scenario, SimConfig};
use mmshare::{NetworkParams, Protocol};
use rand::Rng;

/// Worst residual `|p - (1-p)^n|` over the three reference examples, and
/// whether the examples hit their closed forms.
pub fn fixed_point() -> (f64, bool) {
    let cases = [(0.0, 1.0), (1.0, 0.5), (2.0, (3.0 - 5f64.sqrt()) / 2.0)];
    let mut worst = 0.0f64;
    let mut exact = true;
    for (n, expected) in cases {
        let p = solve_transmission_probability(n);
        worst = worst.max((p - (1.0f64 - p).powf(n)).abs());
        exact &= (p - expected).abs() < 1e-9;
    }
    (worst, exact)
}

pub struct UCase {
    pub s: f64,
    pub t: f64,
    pub p_t: f64,
    pub link: LinkType,
    pub mc: f64,
    pub exact: f64,
    pub se: f64,
}

/// Direct sampling of `E[e^(-s C F G t^-alpha)]` for an interferer that is
/// active with probability `p_t / 2`, on a 12-point grid.
pub fn u_function_oracle(samples: usize) -> Vec<UCase> {
    let params = NetworkParams::default();
    let ctx = AnalysisContext::new(params, Protocol::DCsr).unwrap();
    let (a, pl) = (params.antenna, params.path_loss);
    let (bs, ue) = (a.bs(), a.ue());
    let grid = [(1e-2, 30.0, 1.0), (1e1, 100.0, 0.5), (1e4, 300.0, 0.3), (1e-1, 50.0, 0.9), (1e5, 1000.0, 0.2), (1e-3, 20.0, 0.6)];
    let mut rng = oracle_rng(77, 0);
    let mut out = Vec::new();
    for (s_norm, t, p_t) in grid {
        for link in LinkType::ALL {
            // s scaled so that s C M_BS M_UE t^-alpha equals s_norm
            let s = s_norm / (pl.gain(link, t) * bs.mainlobe * ue.mainlobe);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..samples {
                let v = if rng.gen::<f64>() < 0.5 * p_t {
                    let gb = if rng.gen::<f64>() < a.p_bs_main() { bs.mainlobe } else { bs.sidelobe };
                    let gu = if rng.gen::<f64>() < a.p_ue_main() { ue.mainlobe } else { ue.sidelobe };
                    let f: f64 = rng.sample(rand_distr::Exp1);
                    (-s * pl.gain(link, t) * f * gb * gu).exp()
                } else {
                    1.0
                };
                sum += v;
                sq += v * v;
            }
            let n = samples as f64;
            let mc = sum / n;
            out.push(UCase { s, t, p_t, link, mc, exact: u_function(s, t, link, p_t, &ctx), se: ((sq / n - mc * mc) / n).sqrt() });
        }
    }
    out
}

pub struct LaplaceCase {
    pub label: String,
    pub mc: f64,
    pub analytic: f64,
}

impl LaplaceCase {
    pub fn rel(&self) -> f64 {
        (self.mc - self.analytic).abs() / self.analytic
    }
}

/// Small scenes inside a 500 m disk: the analytic transform truncated at the
/// disk edge against the empirical mean of `e^(-sI)`.
pub fn laplace_oracle(samples: usize) -> Vec<LaplaceCase> {
    let region = 500.0;
    let mut cases = Vec::new();
    for proto in [Protocol::NonCs, Protocol::DCsr, Protocol::DCsra] {
        for z_db in [20.0, 40.0] {
            cases.push((proto, LinkType::Los, 100.0, OperatorSet::ONE, z_db));
        }
    }
    // co-located BS inside and outside the hidden ball, and an NLoS serving link
    cases.push((Protocol::NonCs, LinkType::Nlos, 40.0, OperatorSet::BOTH, 0.0));
    cases.push((Protocol::DCsr, LinkType::Los, 30.0, OperatorSet::BOTH, 40.0));
    let mut out = Vec::new();
    for (k, (proto, link, r, set, z_db)) in cases.into_iter().enumerate() {
        let params = NetworkParams::default();
        let ctx = AnalysisContext::new(params, proto)
            .unwrap()
            .with_quadrature(QuadratureSettings { r_max_m: Some(region), ..Default::default() })
            .unwrap();
        let radii = avg_exclusion_radii(&ctx).unwrap();
        let p_t = transmission_probability(&ctx).unwrap();
        let s = db_to_linear(z_db) / (params.path_loss.gain(link, r) * params.antenna.serving_gain());
        let dens = params.densities().unwrap();
        let analytic = laplace_interference_general(s, r, link, set, p_t, &radii, &dens.by_set(), &ctx).unwrap();
        let sc = Scenario::new(params, proto).unwrap();
        let mut rng = oracle_rng(5, k as u64);
        let mc = (0..samples).map(|_| (-s * model_interference(&sc, r, link, set, p_t, &radii, region, &mut rng)).exp()).sum::<f64>()
            / samples as f64;
        out.push(LaplaceCase { label: format!("{proto} {link:?} r={r} {set:?} z={z_db}dB"), mc, analytic });
    }
    out
}

/// Mean contender count in raw deployments against the analytic mean, per sensing protocol.
pub fn contender_oracle(samples: usize) -> Vec<(Protocol, f64, f64)> {
    let cfg = SimConfig { master_seed: 31, ..Default::default() };
    Protocol::ALL[1..]
        .iter()
        .map(|&p| {
            let params = NetworkParams::default();
            let sc = Scenario::new(params, p).unwrap();
            let counts = origin_contender_counts(&cfg, &sc, samples);
            let mc = counts.iter().map(|c| c.total() as f64).sum::<f64>() / samples as f64;
            (p, mc, avg_contenders(&AnalysisContext::new(params, p).unwrap()).unwrap())
        })
        .collect()
}

fn serving_density(r: f64, params: &NetworkParams) -> f64 {
    let mut f = 0.0;
    for tau in LinkType::ALL {
        for set in [OperatorSet::ONE, OperatorSet::BOTH] {
            f += association_pdf(r, tau, set, &params.sharing, &params.path_loss).unwrap();
        }
    }
    f
}

/// Total mass of the serving-distance density.
pub fn association_mass() -> f64 {
    let params = NetworkParams::default();
    let tol = Tolerance { rel: 1e-10, abs: 1e-14, max_panels: 4000 };
    let breaks = [10.0, 50.0, 100.0, 200.0, 400.0];
    integrate(|r| serving_density(r, &params), 0.0, 5000.0, &breaks, tol).unwrap().value
}

/// Kolmogorov-Smirnov statistic and asymptotic p-value of simulated serving
/// distances against the analytic distribution.
pub fn association_ks(samples: usize) -> (f64, f64) {
    let params = NetworkParams::default();
    let sc = Scenario::new(params, Protocol::NonCs).unwrap();
    let cfg = SimConfig { master_seed: 404, ..Default::default() };
    let mut d = association_distances(&cfg, &sc, samples);
    d.sort_by(f64::total_cmp);
    let tol = Tolerance { rel: 1e-10, abs: 1e-14, max_panels: 4000 };
    let n = d.len() as f64;
    let (mut cdf, mut prev) = (0.0, 0.0);
    let mut stat = 0.0f64;
    for (i, &x) in d.iter().enumerate() {
        cdf += integrate(|r| serving_density(r, &params), prev, x, &[], tol).unwrap().value;
        prev = x;
        stat = stat.max((cdf - i as f64 / n).abs()).max(((i + 1) as f64 / n - cdf).abs());
    }
    (stat, kolmogorov_p(stat, n))
}

fn kolmogorov_p(d: f64, n: f64) -> f64 {
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100).map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lambda * lambda).exp()).sum();
    p.clamp(0.0, 1.0)
}

/// Worst relative error of `D_L(D_N(r)) = r` and `D_N(D_L(r)) = r` over a log grid of `r`.
pub fn exclusion_identity() -> f64 {
    let pl = NetworkParams::default().path_loss;
    (0..=500)
        .map(|i| 0.1 * 1e5f64.powf(i as f64 / 500.0))
        .map(|r| {
            let a = exclusion_radius(exclusion_radius(r, LinkType::Los, &pl), LinkType::Nlos, &pl);
            let b = exclusion_radius(exclusion_radius(r, LinkType::Nlos, &pl), LinkType::Los, &pl);
            ((a - r) / r).abs().max(((b - r) / r).abs())
        })
        .fold(0.0, f64::max)
}
