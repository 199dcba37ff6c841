//! Link-level physics: blocking, path loss, Rayleigh fading, sectored
//! antenna gains and the receiver noise floor.
//!
//! Powers are linear (mW, or dimensionless gains) everywhere inside the
//! crate. Decibels only appear in constructors such as
//! [`PathLossParams::from_db`] and in the reporting layer.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, invalid, Result};

/// Converts a decibel value to a linear ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear ratio to decibels.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Propagation state of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkType {
    Los,
    Nlos,
}

impl LinkType {
    pub const ALL: [LinkType; 2] = [LinkType::Los, LinkType::Nlos];

    /// The other propagation state.
    pub fn other(self) -> LinkType {
        match self {
            LinkType::Los => LinkType::Nlos,
            LinkType::Nlos => LinkType::Los,
        }
    }
}

/// Path loss intercepts, exponents and the blocking coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    /// Linear gain at 1 m on a LoS link.
    pub c_los: f64,
    /// Linear gain at 1 m on an NLoS link.
    pub c_nlos: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Blocking coefficient in 1/m.
    pub beta: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self { c_los: 1e-6, c_nlos: 1e-7, alpha_los: 2.0, alpha_nlos: 4.0, beta: 0.007 }
    }
}

impl PathLossParams {
    pub fn from_db(c_los_db: f64, c_nlos_db: f64, alpha_los: f64, alpha_nlos: f64, beta: f64) -> Result<Self> {
        let p = Self {
            c_los: db_to_linear(c_los_db),
            c_nlos: db_to_linear(c_nlos_db),
            alpha_los,
            alpha_nlos,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_nlos > 0.0 && self.c_los > self.c_nlos) {
            return Err(invalid("c_los/c_nlos", "need c_los > c_nlos > 0"));
        }
        if !(self.alpha_los > 0.0 && self.alpha_nlos >= self.alpha_los) {
            return Err(invalid("alpha_los/alpha_nlos", "need alpha_nlos >= alpha_los > 0"));
        }
        check_range("beta", self.beta, 0.0, f64::INFINITY)?;
        Ok(())
    }

    #[inline]
    pub fn intercept(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Los => self.c_los,
            LinkType::Nlos => self.c_nlos,
        }
    }

    #[inline]
    pub fn exponent(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Los => self.alpha_los,
            LinkType::Nlos => self.alpha_nlos,
        }
    }

    /// `e^(-beta r)` without argument checks.
    #[inline]
    pub fn p_los(&self, r: f64) -> f64 {
        (-self.beta * r).exp()
    }

    /// Probability that a link of length `r` is in state `link`.
    #[inline]
    pub fn p_link(&self, link: LinkType, r: f64) -> f64 {
        match link {
            LinkType::Los => self.p_los(r),
            LinkType::Nlos => 1.0 - self.p_los(r),
        }
    }

    /// `C r^(-alpha)` without argument checks.
    #[inline]
    pub fn gain(&self, link: LinkType, r: f64) -> f64 {
        self.intercept(link) * r.powf(-self.exponent(link))
    }

    /// Distance at which `C r^(-alpha)` equals `g`.
    #[inline]
    pub fn distance_for_gain(&self, link: LinkType, g: f64) -> f64 {
        (self.intercept(link) / g).powf(1.0 / self.exponent(link))
    }
}

/// LoS probability `e^(-beta r)` of a link of length `r`.
pub fn los_probability(r: f64, p: &PathLossParams) -> Result<f64> {
    check_range("r", r, 0.0, f64::INFINITY)?;
    Ok(p.p_los(r))
}

/// Mean path gain `C r^(-alpha)`; `r = 0` is rejected.
pub fn path_loss(r: f64, link: LinkType, p: &PathLossParams) -> Result<f64> {
    if r.is_nan() || r <= 0.0 || r.is_infinite() {
        return Err(invalid("r", format!("path loss needs a finite positive distance, got {r}")));
    }
    Ok(p.gain(link, r))
}

/// Rayleigh fading power, exponentially distributed with unit mean.
#[inline]
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Main-lobe and side-lobe gains of a sectored uniform array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGains {
    pub mainlobe: f64,
    pub sidelobe: f64,
}

/// `(10^0.8 n, 1 / sin^2(3 pi / (2 sqrt n)))`.
pub fn array_gains(n: u32) -> ArrayGains {
    let n = f64::from(n.max(1));
    let s = (3.0 * PI / (2.0 * n.sqrt())).sin();
    ArrayGains { mainlobe: 10f64.powf(0.8) * n, sidelobe: 1.0 / (s * s) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaParams {
    pub n_bs: u32,
    pub n_ue: u32,
    /// BS main-lobe width in radians.
    pub theta_bs: f64,
    /// UE main-lobe width in radians.
    pub theta_ue: f64,
    pub omni_penalty_db: f64,
}

impl Default for AntennaParams {
    fn default() -> Self {
        Self { n_bs: 64, n_ue: 16, theta_bs: PI / 18.0, theta_ue: PI / 6.0, omni_penalty_db: 7.0 }
    }
}

impl AntennaParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_bs == 0 || self.n_ue == 0 {
            return Err(invalid("n_bs/n_ue", "element counts must be at least 1"));
        }
        for (name, th) in [("theta_bs", self.theta_bs), ("theta_ue", self.theta_ue)] {
            if !(th > 0.0 && th <= 2.0 * PI) {
                return Err(invalid(name, format!("{th} is outside (0, 2pi]")));
            }
        }
        check_range("omni_penalty_db", self.omni_penalty_db, 0.0, f64::INFINITY)?;
        Ok(())
    }

    pub fn bs(&self) -> ArrayGains {
        array_gains(self.n_bs)
    }

    pub fn ue(&self) -> ArrayGains {
        array_gains(self.n_ue)
    }

    /// Probability that a random direction falls in the BS main lobe.
    pub fn p_bs_main(&self) -> f64 {
        self.theta_bs / (2.0 * PI)
    }

    pub fn p_ue_main(&self) -> f64 {
        self.theta_ue / (2.0 * PI)
    }

    /// Linear multiplier applied to quasi-omni sensing gains.
    pub fn omni_penalty(&self) -> f64 {
        db_to_linear(-self.omni_penalty_db)
    }

    /// Gain of the intended data link, both arrays aligned.
    pub fn serving_gain(&self) -> f64 {
        self.bs().mainlobe * self.ue().mainlobe
    }
}

/// One value of a discrete gain distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainAtom {
    pub gain: f64,
    pub prob: f64,
}

/// Finite distribution over positive gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainDistribution {
    atoms: Vec<GainAtom>,
}

impl GainDistribution {
    /// Builds a distribution; zero-probability atoms are dropped.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let atoms: Vec<GainAtom> = atoms
            .into_iter()
            .filter(|&(_, p)| p != 0.0)
            .map(|(gain, prob)| GainAtom { gain, prob })
            .collect();
        if atoms.is_empty() {
            return Err(invalid("atoms", "distribution has no mass"));
        }
        for a in &atoms {
            if !(a.gain > 0.0 && a.gain.is_finite()) {
                return Err(invalid("atoms", format!("gain {} is not positive", a.gain)));
            }
            check_range("atoms", a.prob, 0.0, 1.0)?;
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("atoms", format!("probabilities sum to {total}")));
        }
        Ok(Self { atoms })
    }

    /// Product distribution of two independent lobe choices.
    pub(crate) fn product(a: (f64, f64, f64), b: (f64, f64, f64)) -> Result<Self> {
        // each tuple is (main gain, side gain, P(main))
        let (am, as_, pa) = a;
        let (bm, bs, pb) = b;
        Self::new([
            (am * bm, pa * pb),
            (am * bs, pa * (1.0 - pb)),
            (as_ * bm, (1.0 - pa) * pb),
            (as_ * bs, (1.0 - pa) * (1.0 - pb)),
        ])
    }

    pub fn atoms(&self) -> &[GainAtom] {
        &self.atoms
    }

    /// `E[f(G)]`.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.prob * f(a.gain)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|g| g)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|a| GainAtom { gain: a.gain * k, prob: a.prob }).collect() }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u: f64 = rng.gen();
        for a in &self.atoms {
            if u < a.prob {
                return a.gain;
            }
            u -= a.prob;
        }
        self.atoms[self.atoms.len() - 1].gain
    }
}

/// Distribution of the combined antenna gain from an interfering BS
/// towards the typical UE.
pub fn interferer_gain_distribution(a: &AntennaParams) -> GainDistribution {
    let (bs, ue) = (a.bs(), a.ue());
    GainDistribution::product((bs.mainlobe, bs.sidelobe, a.p_bs_main()), (ue.mainlobe, ue.sidelobe, a.p_ue_main()))
        .expect("array gains are positive and lobe probabilities lie in [0, 1]")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub n0_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { n0_dbm_per_hz: -174.0, bandwidth_hz: 600e6, noise_figure_db: 10.0 }
    }
}

impl NoiseParams {
    pub fn floor_dbm(&self) -> f64 {
        self.n0_dbm_per_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

/// Noise floor in mW: PSD plus bandwidth plus noise figure, summed in dB.
pub fn noise_floor(n: &NoiseParams) -> f64 {
    db_to_linear(n.floor_dbm())
}
