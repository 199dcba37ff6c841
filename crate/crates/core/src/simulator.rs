//! Two-step Monte Carlo estimation of the transmission and coverage
//! probabilities.
//!
//! Step one counts contenders in independent deployments and averages the
//! per-iteration fixed points. Step two draws fresh deployments, silences
//! the typical link whenever one of its contenders transmits, and otherwise
//! measures the SINR against the hidden and deaf interferers.
//!
//! Every iteration owns a ChaCha stream selected by `(master_seed, step,
//! iteration)`, so results do not depend on how rayon schedules the work.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{solve_transmission_probability, ExclusionRadii};
use crate::association::{associate, exclusion_radius, AssociationOutcome};
use crate::deployment::{sample_deployment, Deployment, OperatorSet, SiteDensities};
use crate::error::{invalid, Result};
use crate::params::NetworkParams;
use crate::protocols::{announcement_radii, sensing_distance_law, AnnouncementRadii, Family, Protocol, SensingDistanceLaw, SensingParams};
use crate::radio::{db_to_linear, sample_fading, ArrayGains, LinkType};

const STEP_PT: u64 = 1 << 40;
const STEP_COV: u64 = 2 << 40;
const STEP_ORACLE: u64 = 3 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub iterations_pt: usize,
    pub iterations_cov: usize,
    /// Radius of the simulated disk in meters.
    pub region_radius: f64,
    pub master_seed: u64,
    pub z_grid_db: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            iterations_pt: 10_000,
            iterations_cov: 10_000,
            region_radius: 2000.0,
            master_seed: 1,
            z_grid_db: (0..17).map(|i| -10.0 + 5.0 * i as f64).collect(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations_pt == 0 || self.iterations_cov == 0 {
            return Err(invalid("iterations", "need at least one iteration per step"));
        }
        if !(self.region_radius > 0.0) {
            return Err(invalid("region_radius", "must be positive"));
        }
        if self.z_grid_db.is_empty() {
            return Err(invalid("z_grid_db", "grid is empty"));
        }
        if self.z_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("z_grid_db", "grid must be strictly increasing"));
        }
        Ok(())
    }
}

/// Per-experiment constants shared by every iteration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: NetworkParams,
    pub protocol: Protocol,
    dens: SiteDensities,
    sensing: SensingParams,
    law: Option<SensingDistanceLaw>,
    ann: AnnouncementRadii,
    bs: ArrayGains,
    ue: ArrayGains,
    pen: f64,
    p_bs: f64,
    p_ue: f64,
    sigma2: f64,
}

impl Scenario {
    pub fn new(params: NetworkParams, protocol: Protocol) -> Result<Self> {
        params.validate()?;
        let sensing = params.sensing();
        let law = match protocol.family() {
            Family::None => None,
            _ => Some(sensing_distance_law(protocol, &sensing, &params.antenna, &params.path_loss)?),
        };
        Ok(Self {
            dens: params.densities()?,
            ann: announcement_radii(&sensing, &params.antenna, &params.path_loss),
            bs: params.antenna.bs(),
            ue: params.antenna.ue(),
            pen: params.antenna.omni_penalty(),
            p_bs: params.antenna.p_bs_main(),
            p_ue: params.antenna.p_ue_main(),
            sigma2: params.sigma2(),
            sensing,
            law,
            params,
            protocol,
        })
    }

    pub fn densities(&self) -> &SiteDensities {
        &self.dens
    }

    pub fn law(&self) -> Option<&SensingDistanceLaw> {
        self.law.as_ref()
    }

    fn bs_gain(&self, main: bool) -> f64 {
        if main {
            self.bs.mainlobe
        } else {
            self.bs.sidelobe
        }
    }

    fn ue_gain(&self, main: bool) -> f64 {
        if main {
            self.ue.mainlobe
        } else {
            self.ue.sidelobe
        }
    }

    fn draw_link<R: Rng + ?Sized>(&self, d: f64, rng: &mut R) -> LinkType {
        if rng.gen::<f64>() < self.params.path_loss.p_los(d) {
            LinkType::Los
        } else {
            LinkType::Nlos
        }
    }

    fn draw_links<R: Rng + ?Sized>(&self, d: &Deployment, rng: &mut R) -> Vec<LinkType> {
        d.sites.iter().map(|s| self.draw_link(s.distance(), rng)).collect()
    }
}

/// One base station of a realization, with its lobe draws towards the typical UE.
#[derive(Debug, Clone, Copy)]
struct Bs {
    site: usize,
    pos: [f64; 2],
    dist: f64,
    link: LinkType,
    set: OperatorSet,
    /// The BS beam covers the typical UE.
    bs_main: bool,
    /// The typical UE's beam covers the BS.
    ue_main: bool,
}

/// Where contention is measured and which operator-1 sites are ruled out.
struct Geometry {
    /// Sensing node for transmitter-side sensing and listening BS for announcements.
    center: [f64; 2],
    /// Site at `center` whose BSs cannot be heard as separate contenders.
    center_site: Option<usize>,
    exclusion: Exclusion,
}

enum Exclusion {
    None,
    /// Operator-1 sites inside this radius are skipped.
    Radius(f64),
    /// Operator-1 sites inside the association exclusion of their link type are skipped.
    Association(AssociationOutcome),
}

fn enumerate_bs<R: Rng + ?Sized>(sc: &Scenario, d: &Deployment, links: &[LinkType], skip: Option<usize>, rng: &mut R) -> Vec<Bs> {
    let mut out = Vec::with_capacity(d.bs_count());
    for (i, site) in d.sites.iter().enumerate() {
        let dist = site.distance();
        for m in site.operators.members() {
            if skip == Some(i) && m == 1 {
                continue;
            }
            out.push(Bs {
                site: i,
                pos: site.pos,
                dist,
                link: links[i],
                set: site.operators,
                bs_main: rng.gen::<f64>() < sc.p_bs,
                ue_main: rng.gen::<f64>() < sc.p_ue,
            });
        }
    }
    out
}

fn is_sensing_contender<R: Rng + ?Sized>(sc: &Scenario, b: &Bs, g: &Geometry, rng: &mut R) -> bool {
    if sc.law.is_none() {
        return false;
    }
    let pl = &sc.params.path_loss;
    match sc.protocol.family() {
        Family::None => false,
        Family::Receiver => {
            if b.set.contains(1) {
                let excluded = match &g.exclusion {
                    Exclusion::None => false,
                    Exclusion::Radius(r) => b.dist < *r,
                    Exclusion::Association(o) => b.dist < o.exclusion(b.link, pl),
                };
                if excluded {
                    return false;
                }
            }
            // the UE listens with its beam or quasi-omni with a penalty
            let ue_gain = if sc.protocol.is_directional() { sc.ue_gain(b.ue_main) } else { sc.ue.mainlobe * sc.pen };
            let a = ue_gain * sc.bs_gain(b.bs_main);
            b.dist <= sc.sensing.sensing_radius(a, b.link, pl)
        }
        Family::Transmitter => {
            if g.center_site == Some(b.site) {
                return false;
            }
            let d = (b.pos[0] - g.center[0]).hypot(b.pos[1] - g.center[1]);
            let link = sc.draw_link(d, rng);
            let toward = sc.bs_gain(rng.gen::<f64>() < sc.p_bs);
            let sensor = if sc.protocol.is_directional() { sc.bs_gain(rng.gen::<f64>() < sc.p_bs) } else { sc.bs.mainlobe * sc.pen };
            d <= sc.sensing.sensing_radius(sensor * toward, link, pl)
        }
    }
}

/// Announcing UEs heard by the listening BS, one per BS within the
/// announcement radius of its lobe and link type.
fn count_announcements<R: Rng + ?Sized>(sc: &Scenario, bss: &[Bs], g: &Geometry, rng: &mut R) -> usize {
    if !sc.protocol.has_announcements() {
        return 0;
    }
    bss.iter()
        .filter(|b| {
            if g.center_site == Some(b.site) {
                return false;
            }
            let d = (b.pos[0] - g.center[0]).hypot(b.pos[1] - g.center[1]);
            let link = sc.draw_link(d, rng);
            d <= sc.ann.radius(link, rng.gen::<f64>() < sc.p_bs)
        })
        .count()
}

fn serving_geometry(d: &Deployment, out: &AssociationOutcome) -> Geometry {
    Geometry {
        center: d.sites[out.bs_index].pos,
        center_site: Some(out.bs_index),
        exclusion: Exclusion::Association(*out),
    }
}

/// Contender tally of one sensing event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContenderCount {
    pub sensing: usize,
    pub announcements: usize,
}

impl ContenderCount {
    pub fn total(&self) -> usize {
        self.sensing + self.announcements
    }
}

/// Counts contenders in deployment `d` with per-site link states `links`.
///
/// With an association outcome the sensing node is the typical UE (receiver
/// sensing) or its serving BS (transmitter sensing), and announcements are
/// heard at the serving BS. Without one, every sensing node sits at the
/// origin and receiver sensing ignores operator-1 sites closer than the
/// average association distance.
pub fn count_contenders<R: Rng + ?Sized>(
    d: &Deployment,
    links: &[LinkType],
    outcome: Option<&AssociationOutcome>,
    sc: &Scenario,
    rng: &mut R,
) -> ContenderCount {
    if sc.protocol.family() == Family::None {
        return ContenderCount::default();
    }
    let bss = enumerate_bs(sc, d, links, outcome.map(|o| o.bs_index), rng);
    let g = match outcome {
        Some(o) => serving_geometry(d, o),
        None => Geometry {
            center: [0.0, 0.0],
            center_site: None,
            exclusion: match sc.protocol.family() {
                Family::Receiver => Exclusion::Radius(sc.params.r_bar),
                _ => Exclusion::None,
            },
        },
    };
    let sensing = bss.iter().filter(|b| is_sensing_contender(sc, b, &g, rng)).count();
    ContenderCount { sensing, announcements: count_announcements(sc, &bss, &g, rng) }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Deployment, link states and association of one iteration; deployments
/// without an operator-1 site are redrawn.
fn sample_world<R: Rng + ?Sized>(sc: &Scenario, region: f64, rng: &mut R) -> (Deployment, Vec<LinkType>, AssociationOutcome, usize) {
    let mut redraws = 0;
    loop {
        let d = sample_deployment(&sc.dens, region, rng);
        let links = sc.draw_links(&d, rng);
        if let Ok(out) = associate(&d, &links, &sc.params.path_loss) {
            return (d, links, out, redraws);
        }
        redraws += 1;
    }
}

/// Mean of the per-iteration fixed points; also returns the mean count.
pub fn estimate_transmission_probability(cfg: &SimConfig, sc: &Scenario) -> Result<TransmissionEstimate> {
    cfg.validate()?;
    if sc.protocol.family() == Family::None {
        return Ok(TransmissionEstimate { p_t: 1.0, mean_contenders: 0.0, iterations: 0 });
    }
    let counts: Vec<usize> = (0..cfg.iterations_pt as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.master_seed, STEP_PT + i);
            let (d, links, out, _) = sample_world(sc, cfg.region_radius, &mut rng);
            count_contenders(&d, &links, Some(&out), sc, &mut rng).total()
        })
        .collect();
    let n = counts.len() as f64;
    let p_t = counts.iter().map(|&c| solve_transmission_probability(c as f64)).sum::<f64>() / n;
    let mean_contenders = counts.iter().sum::<usize>() as f64 / n;
    Ok(TransmissionEstimate { p_t, mean_contenders, iterations: counts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionEstimate {
    pub p_t: f64,
    pub mean_contenders: f64,
    pub iterations: usize,
}

/// Result of a single coverage iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationOutcome {
    /// Zero when a contender transmitted.
    pub sinr_linear: f64,
    pub association_distance: f64,
    pub contender_count: usize,
    pub suppressed_by_announcement: usize,
    pub redraws: usize,
}

fn coverage_iteration(sc: &Scenario, p_t: f64, region: f64, rng: &mut ChaCha8Rng) -> IterationOutcome {
    let pl = &sc.params.path_loss;
    let (d, links, out, redraws) = sample_world(sc, region, rng);
    let bss = enumerate_bs(sc, &d, &links, Some(out.bs_index), rng);
    let g = serving_geometry(&d, &out);

    let contender: Vec<bool> = bss.iter().map(|b| is_sensing_contender(sc, b, &g, rng)).collect();
    let announcements = count_announcements(sc, &bss, &g, rng);
    let contender_count = contender.iter().filter(|&&c| c).count() + announcements;
    let blocked = (0..contender_count).fold(false, |any, _| rng.gen::<f64>() < p_t || any);
    if blocked {
        return IterationOutcome {
            sinr_linear: 0.0,
            association_distance: out.distance,
            contender_count,
            suppressed_by_announcement: 0,
            redraws,
        };
    }

    let mut interference = 0.0;
    let mut suppressed = 0;
    for (b, &is_contender) in bss.iter().zip(&contender) {
        if is_contender {
            continue;
        }
        let deaf = rng.gen::<f64>() >= 0.5;
        if rng.gen::<f64>() >= p_t {
            continue;
        }
        if deaf && sc.protocol.has_announcements() {
            let main = rng.gen::<f64>() < sc.p_bs;
            if b.dist <= sc.ann.radius(b.link, main) {
                suppressed += 1;
                continue;
            }
        }
        let gain = sc.bs_gain(b.bs_main) * sc.ue_gain(b.ue_main);
        interference += pl.gain(b.link, b.dist) * sample_fading(rng) * gain;
    }
    let signal = pl.gain(out.link, out.distance) * sample_fading(rng) * sc.bs.mainlobe * sc.ue.mainlobe;
    IterationOutcome {
        sinr_linear: signal / (sc.sigma2 + interference),
        association_distance: out.distance,
        contender_count,
        suppressed_by_announcement: suppressed,
        redraws,
    }
}

/// Per-iteration outcomes of the coverage step, in iteration order.
pub fn coverage_outcomes(cfg: &SimConfig, sc: &Scenario, p_t: f64) -> Result<Vec<IterationOutcome>> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&p_t) {
        return Err(invalid("p_t", format!("{p_t} is not a probability")));
    }
    Ok((0..cfg.iterations_cov as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.master_seed, STEP_COV + i);
            coverage_iteration(sc, p_t, cfg.region_radius, &mut rng)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub protocol: Protocol,
    pub p_t: f64,
    pub z_db: Vec<f64>,
    pub p_c: Vec<f64>,
    /// Binomial standard error of each `p_c` entry.
    pub stderr: Vec<f64>,
    pub iterations: usize,
    pub mean_contenders: f64,
    pub mean_association_distance: f64,
    pub suppressed_by_announcement: usize,
    pub redraws: usize,
}

/// Fraction of iterations whose SINR exceeds each grid threshold.
pub fn summarize(cfg: &SimConfig, protocol: Protocol, p_t: f64, outcomes: &[IterationOutcome]) -> SimResult {
    let n = outcomes.len() as f64;
    let mut p_c = Vec::with_capacity(cfg.z_grid_db.len());
    let mut stderr = Vec::with_capacity(cfg.z_grid_db.len());
    for &z_db in &cfg.z_grid_db {
        let z = db_to_linear(z_db);
        let hits = outcomes.iter().filter(|o| o.sinr_linear > z).count() as f64;
        let p = hits / n;
        p_c.push(p);
        stderr.push((p * (1.0 - p) / n).sqrt());
    }
    SimResult {
        protocol,
        p_t,
        z_db: cfg.z_grid_db.clone(),
        p_c,
        stderr,
        iterations: outcomes.len(),
        mean_contenders: outcomes.iter().map(|o| o.contender_count as f64).sum::<f64>() / n,
        mean_association_distance: outcomes.iter().map(|o| o.association_distance).sum::<f64>() / n,
        suppressed_by_announcement: outcomes.iter().map(|o| o.suppressed_by_announcement).sum(),
        redraws: outcomes.iter().map(|o| o.redraws).sum(),
    }
}

/// Coverage step for a given transmission probability.
pub fn simulate_coverage(cfg: &SimConfig, sc: &Scenario, p_t: f64) -> Result<SimResult> {
    let outcomes = coverage_outcomes(cfg, sc, p_t)?;
    Ok(summarize(cfg, sc.protocol, p_t, &outcomes))
}

/// Both steps: estimate `p_T`, then the coverage curve.
pub fn simulate(cfg: &SimConfig, sc: &Scenario) -> Result<SimResult> {
    let est = estimate_transmission_probability(cfg, sc)?;
    simulate_coverage(cfg, sc, est.p_t)
}

/// Association distances of `n` independent realizations.
pub fn association_distances(cfg: &SimConfig, sc: &Scenario, n: usize) -> Vec<f64> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.master_seed, STEP_ORACLE + i);
            sample_world(sc, cfg.region_radius, &mut rng).2.distance
        })
        .collect()
}

/// Contender counts of `n` raw deployments with the sensing node at the origin.
pub fn origin_contender_counts(cfg: &SimConfig, sc: &Scenario, n: usize) -> Vec<ContenderCount> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.master_seed, STEP_ORACLE + (1 << 32) + i);
            let d = sample_deployment(&sc.dens, cfg.region_radius, &mut rng);
            let links = sc.draw_links(&d, &mut rng);
            count_contenders(&d, &links, None, sc, &mut rng)
        })
        .collect()
}

/// One draw of the normalized interference under the averaged-radius model.
///
/// Hidden and deaf interferers come from two independent deployments. In
/// each, every BS transmits with probability `p_t / 2`, BSs inside the
/// hidden (`h`) or deaf (`d`) ball are silent, and operator-1 sites inside
/// the association exclusion are absent. The other BSs at a shared serving
/// site appear once in each layer at distance `r`. For single-BS sites this
/// matches the one coin per BS of [`coverage_outcomes`]; at shared sites the
/// layered model carries slightly more interference.
#[allow(clippy::too_many_arguments)]
pub fn model_interference<R: Rng + ?Sized>(
    sc: &Scenario,
    r: f64,
    serving_link: LinkType,
    serving_set: OperatorSet,
    p_t: f64,
    radii: &ExclusionRadii,
    region_radius: f64,
    rng: &mut R,
) -> f64 {
    let pl = &sc.params.path_loss;
    let assoc = |link: LinkType| if link == serving_link { r } else { exclusion_radius(r, serving_link, pl) };
    let mut total = 0.0;
    for layer in 0..2 {
        let ball = |link| if layer == 0 { radii.hidden(link) } else { radii.deaf(link) };
        let mut one = |dist: f64, link: LinkType, rng: &mut R| {
            if dist >= ball(link) && rng.gen::<f64>() < 0.5 * p_t {
                let g = sc.bs_gain(rng.gen::<f64>() < sc.p_bs) * sc.ue_gain(rng.gen::<f64>() < sc.p_ue);
                total += pl.gain(link, dist) * sample_fading(rng) * g;
            }
        };
        let d = sample_deployment(&sc.dens, region_radius, rng);
        for site in &d.sites {
            let dist = site.distance();
            let link = sc.draw_link(dist, rng);
            if site.operators.contains(1) && dist < assoc(link) {
                continue;
            }
            for _ in 0..site.operators.len() {
                one(dist, link, rng);
            }
        }
        for _ in 1..serving_set.len() {
            one(r, serving_link, rng);
        }
    }
    total
}

/// Independent stream for oracle experiments outside the two simulation steps.
pub fn oracle_rng(seed: u64, id: u64) -> ChaCha8Rng {
    stream(seed, STEP_ORACLE + (2 << 32) + id)
}
