//! Shared-site Poisson deployments of two operators.
//!
//! Sites belong to one of three independent processes tagged by the set
//! of operators hosting a BS there: `{1}`, `{2}` or `{1,2}`. Operator `m`
//! sees the union of the processes whose tag contains `m`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, invalid, Error, Result};

/// Non-empty set of operator ids, stored as a bit mask (bit `m-1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorSet(u8);

impl OperatorSet {
    pub const ONE: OperatorSet = OperatorSet(0b01);
    pub const TWO: OperatorSet = OperatorSet(0b10);
    pub const BOTH: OperatorSet = OperatorSet(0b11);

    /// Builds a set from operator ids in `1..=8`.
    pub fn from_members(ids: &[u8]) -> Result<Self> {
        let mut bits = 0u8;
        for &id in ids {
            if !(1..=8).contains(&id) {
                return Err(invalid("operators", format!("operator id {id} out of range")));
            }
            bits |= 1 << (id - 1);
        }
        if bits == 0 {
            return Err(invalid("operators", "operator set is empty"));
        }
        Ok(OperatorSet(bits))
    }

    pub fn contains(self, id: u8) -> bool {
        (1..=8).contains(&id) && self.0 & (1 << (id - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = u8> {
        (1..=8u8).filter(move |&m| self.contains(m))
    }
}

impl fmt::Debug for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl Serialize for OperatorSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members())
    }
}

impl<'de> Deserialize<'de> for OperatorSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<u8>::deserialize(d)?;
        OperatorSet::from_members(&ids).map_err(serde::de::Error::custom)
    }
}

/// Per-operator BS densities (per km^2) and the overlap coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharingModel {
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub rho: f64,
}

impl Default for SharingModel {
    fn default() -> Self {
        Self { lambda_1: 30.0, lambda_2: 30.0, rho: 0.5 }
    }
}

/// Site densities of the three tagged processes, per km^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteDensities {
    pub excl_1: f64,
    pub excl_2: f64,
    pub shared: f64,
}

impl SiteDensities {
    /// Total site density `lambda`.
    pub fn total(&self) -> f64 {
        self.excl_1 + self.excl_2 + self.shared
    }

    /// `(set, density per km^2)` for every tagged process.
    pub fn by_set(&self) -> [(OperatorSet, f64); 3] {
        [(OperatorSet::ONE, self.excl_1), (OperatorSet::TWO, self.excl_2), (OperatorSet::BOTH, self.shared)]
    }

    pub fn of(&self, set: OperatorSet) -> f64 {
        match set {
            OperatorSet::ONE => self.excl_1,
            OperatorSet::TWO => self.excl_2,
            OperatorSet::BOTH => self.shared,
            _ => 0.0,
        }
    }
}

impl SharingModel {
    pub fn validate(&self) -> Result<()> {
        check_range("lambda_1", self.lambda_1, 0.0, f64::INFINITY)?;
        check_range("lambda_2", self.lambda_2, 0.0, f64::INFINITY)?;
        check_range("rho", self.rho, 0.0, 1.0)?;
        Ok(())
    }

    /// Total site density `(lambda_1 + lambda_2) / (1 + rho)`.
    pub fn total_density(&self) -> f64 {
        (self.lambda_1 + self.lambda_2) / (1.0 + self.rho)
    }

    /// Fraction `a = lambda_1 / lambda`.
    pub fn a(&self) -> f64 {
        self.lambda_1 / self.total_density()
    }

    /// `b = 1 - lambda_2 / lambda`. Kept for completeness; no formula here uses it.
    pub fn b(&self) -> f64 {
        1.0 - self.lambda_2 / self.total_density()
    }
}

/// Splits the per-operator densities into exclusive and shared site densities.
pub fn decompose_densities(s: &SharingModel) -> Result<SiteDensities> {
    s.validate()?;
    let lambda = s.total_density();
    if lambda == 0.0 {
        return Ok(SiteDensities { excl_1: 0.0, excl_2: 0.0, shared: 0.0 });
    }
    let shared = s.rho * lambda;
    let (e1, e2) = (s.lambda_1 - shared, s.lambda_2 - shared);
    // rounding can leave -1e-15 at the full-overlap limit
    let tol = 1e-12 * lambda;
    if e1 < -tol || e2 < -tol {
        return Err(invalid("rho", format!("overlap {} implies a negative exclusive density", s.rho)));
    }
    Ok(SiteDensities { excl_1: e1.max(0.0), excl_2: e2.max(0.0), shared })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    /// Position in meters relative to the typical UE.
    pub pos: [f64; 2],
    pub operators: OperatorSet,
}

impl Site {
    pub fn distance(&self) -> f64 {
        self.pos[0].hypot(self.pos[1])
    }

    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        (self.pos[0] - p[0]).hypot(self.pos[1] - p[1])
    }
}

/// One realization of the site processes on a disk centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub sites: Vec<Site>,
    pub region_radius: f64,
    /// Seed the realization was drawn from, when it was drawn from its own stream.
    pub seed: Option<u64>,
}

/// Draws the three independent site processes on a disk of `region_radius` meters.
pub fn sample_deployment<R: Rng + ?Sized>(densities: &SiteDensities, region_radius: f64, rng: &mut R) -> Deployment {
    let area_km2 = PI * region_radius * region_radius * 1e-6;
    let mut sites = Vec::new();
    for (set, lambda) in densities.by_set() {
        let mean = lambda * area_km2;
        if !(mean > 0.0) {
            continue;
        }
        let n = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
        sites.reserve(n);
        for _ in 0..n {
            let r = region_radius * rng.gen::<f64>().sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            sites.push(Site { pos: [r * phi.cos(), r * phi.sin()], operators: set });
        }
    }
    Deployment { sites, region_radius, seed: None }
}

impl Deployment {
    /// Draws a realization from a dedicated stream seeded by `seed`.
    pub fn from_seed(densities: &SiteDensities, region_radius: f64, seed: u64) -> Deployment {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut d = sample_deployment(densities, region_radius, &mut rng);
        d.seed = Some(seed);
        d
    }

    /// Number of BSs, counting every operator at a shared site.
    pub fn bs_count(&self) -> usize {
        self.sites.iter().map(|s| s.operators.len()).sum()
    }

    /// Writes one JSON object per site: `{"x_m", "y_m", "operators"}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.sites {
            let rec = SiteRecord { x_m: s.pos[0], y_m: s.pos[1], operators: s.operators };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads records written by [`Deployment::write_jsonl`]. Blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(r: R, region_radius: f64) -> Result<Deployment> {
        let mut sites = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Record { line: i + 1, reason: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SiteRecord =
                serde_json::from_str(&line).map_err(|e| Error::Record { line: i + 1, reason: e.to_string() })?;
            let site = Site { pos: [rec.x_m, rec.y_m], operators: rec.operators };
            if site.distance() > region_radius {
                return Err(Error::Record { line: i + 1, reason: "site outside the region".into() });
            }
            sites.push(site);
        }
        Ok(Deployment { sites, region_radius, seed: None })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteRecord {
    x_m: f64,
    y_m: f64,
    operators: OperatorSet,
}

/// Sites hosting a BS of operator `m`.
pub fn operator_view(d: &Deployment, m: u8) -> Result<Vec<&Site>> {
    if !(1..=2).contains(&m) {
        return Err(invalid("operator", format!("operator id {m} is not 1 or 2")));
    }
    Ok(d.sites.iter().filter(|s| s.operators.contains(m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson as PoissonPmf};

    #[test]
    fn decomposition_values() {
        let d = decompose_densities(&SharingModel::default()).unwrap();
        assert_relative_eq!(d.total(), 40.0, max_relative = 1e-12);
        assert_relative_eq!(d.shared, 20.0, max_relative = 1e-12);
        assert_relative_eq!(d.excl_1, 10.0, max_relative = 1e-12);
        assert_relative_eq!(d.excl_2, 10.0, max_relative = 1e-12);

        let d = decompose_densities(&SharingModel { rho: 0.0, ..Default::default() }).unwrap();
        assert_eq!((d.excl_1, d.excl_2, d.shared), (30.0, 30.0, 0.0));

        let d = decompose_densities(&SharingModel { rho: 1.0, ..Default::default() }).unwrap();
        assert_relative_eq!(d.shared, 30.0, max_relative = 1e-12);
        assert_eq!((d.excl_1, d.excl_2), (0.0, 0.0));
    }

    #[test]
    fn decomposition_rejects_negative_exclusive() {
        let s = SharingModel { lambda_1: 10.0, lambda_2: 50.0, rho: 0.5 };
        assert!(decompose_densities(&s).is_err());
        assert!(decompose_densities(&SharingModel { rho: 1.2, ..Default::default() }).is_err());
    }

    proptest! {
        #[test]
        fn decomposition_recomposes(l1 in 0.0..100.0f64, l2 in 0.0..100.0f64, rho in 0.0..1.0f64) {
            let s = SharingModel { lambda_1: l1, lambda_2: l2, rho };
            if let Ok(d) = decompose_densities(&s) {
                prop_assert!((d.excl_1 + d.shared - l1).abs() <= 1e-9 * (1.0 + l1));
                prop_assert!((d.excl_2 + d.shared - l2).abs() <= 1e-9 * (1.0 + l2));
                prop_assert!((d.total() * (1.0 + rho) - l1 - l2).abs() <= 1e-9 * (1.0 + l1 + l2));
            }
        }
    }

    #[test]
    fn empty_deployment() {
        let z = SiteDensities { excl_1: 0.0, excl_2: 0.0, shared: 0.0 };
        let d = Deployment::from_seed(&z, 1000.0, 1);
        assert!(d.sites.is_empty());
        assert!(operator_view(&d, 1).unwrap().is_empty());
    }

    #[test]
    fn shared_count_is_poisson() {
        let dens = SiteDensities { excl_1: 0.0, excl_2: 0.0, shared: 20.0 };
        let mean = 20.0 * PI;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let counts: Vec<usize> = (0..n).map(|_| sample_deployment(&dens, 1000.0, &mut rng).sites.len()).collect();
        let avg = counts.iter().sum::<usize>() as f64 / n as f64;
        assert!((avg - mean).abs() < 4.0 * (mean / n as f64).sqrt());

        // chi-square goodness of fit with pooled tails
        let pmf = PoissonPmf::new(mean).unwrap();
        let (lo, hi) = (45u64, 81u64);
        let mut obs = vec![0f64; (hi - lo + 2) as usize];
        for &c in &counts {
            let k = (c as u64).clamp(lo - 1, hi) - (lo - 1);
            obs[k as usize] += 1.0;
        }
        let mut exp = vec![0f64; obs.len()];
        exp[0] = (0..lo).map(|k| pmf.pmf(k)).sum::<f64>();
        for k in lo..hi {
            exp[(k - lo + 1) as usize] = pmf.pmf(k);
        }
        let last = exp.len() - 1;
        exp[last] = 1.0 - exp[..last].iter().sum::<f64>();
        let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e * n as f64).powi(2) / (e * n as f64)).sum();
        let p = 1.0 - ChiSquared::new((obs.len() - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-square p = {p}");
    }

    #[test]
    fn sub_process_densities() {
        let dens = decompose_densities(&SharingModel::default()).unwrap();
        let radius = 2000.0;
        let area = PI * 4.0;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 10_000;
        let mut tally = [0usize; 3];
        for _ in 0..n {
            for s in sample_deployment(&dens, radius, &mut rng).sites {
                let k = match s.operators {
                    OperatorSet::ONE => 0,
                    OperatorSet::TWO => 1,
                    _ => 2,
                };
                tally[k] += 1;
            }
        }
        for (k, (_, lambda)) in dens.by_set().iter().enumerate() {
            let est = tally[k] as f64 / (n as f64 * area);
            assert!((est / lambda - 1.0).abs() < 0.01, "set {k}: {est} vs {lambda}");
        }
    }

    #[test]
    fn positions_inside_disk_and_views() {
        let dens = decompose_densities(&SharingModel::default()).unwrap();
        let d = Deployment::from_seed(&dens, 500.0, 42);
        assert!(d.sites.iter().all(|s| s.distance() <= 500.0));
        let v1 = operator_view(&d, 1).unwrap().len();
        let v2 = operator_view(&d, 2).unwrap().len();
        let count = |set| d.sites.iter().filter(|s| s.operators == set).count();
        let shared = count(OperatorSet::BOTH);
        assert_eq!(v1 + v2 - shared, count(OperatorSet::ONE) + count(OperatorSet::TWO) + shared);
        assert!(operator_view(&d, 3).is_err());
    }

    #[test]
    fn only_shared_sites_give_equal_views() {
        let dens = SiteDensities { excl_1: 0.0, excl_2: 0.0, shared: 30.0 };
        let d = Deployment::from_seed(&dens, 800.0, 9);
        assert_eq!(operator_view(&d, 1).unwrap(), operator_view(&d, 2).unwrap());
    }

    #[test]
    fn same_seed_same_sites() {
        let dens = decompose_densities(&SharingModel::default()).unwrap();
        let a = Deployment::from_seed(&dens, 2000.0, 77);
        let b = Deployment::from_seed(&dens, 2000.0, 77);
        assert_eq!(a, b);
        assert_ne!(a.sites, Deployment::from_seed(&dens, 2000.0, 78).sites);
    }

    #[test]
    fn jsonl_round_trip() {
        let dens = decompose_densities(&SharingModel::default()).unwrap();
        let d = Deployment::from_seed(&dens, 300.0, 4);
        let mut buf = Vec::new();
        d.write_jsonl(&mut buf).unwrap();
        let back = Deployment::read_jsonl(buf.as_slice(), 300.0).unwrap();
        assert_eq!(back.sites, d.sites);
        let first = String::from_utf8(buf).unwrap().lines().next().map(str::to_owned);
        if let Some(line) = first {
            assert!(line.contains("\"x_m\"") && line.contains("\"operators\""));
        }
        assert!(Deployment::read_jsonl("{\"x_m\":1,\"y_m\":2,\"operators\":[]}".as_bytes(), 10.0).is_err());
    }

    #[test]
    fn operator_set_basics() {
        assert_eq!(OperatorSet::BOTH.len(), 2);
        assert!(OperatorSet::BOTH.contains(1) && OperatorSet::BOTH.contains(2));
        assert!(!OperatorSet::TWO.contains(1));
        assert_eq!(OperatorSet::from_members(&[2, 1]).unwrap(), OperatorSet::BOTH);
        assert!(OperatorSet::from_members(&[]).is_err());
        assert_eq!(format!("{:?}", OperatorSet::BOTH), "{1, 2}");
    }
}
