//! Experiment configuration: a flat TOML document where every key is optional.

use std::path::{Path, PathBuf};

use mmshare::deployment::SharingModel;
use mmshare::radio::{AntennaParams, NoiseParams, PathLossParams};
use mmshare::simulator::SimConfig;
use mmshare::{NetworkParams, Protocol};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analysis,
    #[serde(alias = "simulation")]
    #[value(alias = "simulation")]
    Sim,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Raw document as written by the user. Absent keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub bandwidth_mhz: f64,
    pub n0_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub c_los_db: f64,
    pub c_nlos_db: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta: f64,
    pub p_x_dbm: f64,
    pub p_u_dbm: f64,
    pub n_bs: u32,
    pub n_ue: u32,
    pub theta_bs_rad: f64,
    pub theta_ue_rad: f64,
    pub omni_penalty_db: f64,
    pub lambda_1_per_km2: f64,
    pub lambda_2_per_km2: f64,
    pub rho: f64,
    pub r_bar_m: f64,
    pub p_th_offset_db: f64,
    pub p_th_a_offset_db: f64,
    /// Absolute thresholds; replace the offsets when present.
    pub p_th_dbm: Option<f64>,
    pub p_th_a_dbm: Option<f64>,

    pub protocols: Vec<String>,
    pub mode: Mode,
    pub z_grid_db: Vec<f64>,
    pub sweep_rho: Option<Vec<f64>>,
    pub sweep_p_th_offset_db: Option<Vec<f64>>,
    pub sweep_p_th_a_offset_db: Option<Vec<f64>>,

    pub iterations: usize,
    /// Iterations of the transmission-probability step; defaults to `iterations`.
    pub iterations_pt: Option<usize>,
    pub region_radius_m: f64,
    pub seed: u64,
    /// Write per-iteration simulation outcomes as JSON lines.
    pub trace: bool,

    pub out_dir: PathBuf,
    pub format: Format,
}

impl Default for RawConfig {
    fn default() -> Self {
        let p = NetworkParams::default();
        let sim = SimConfig::default();
        Self {
            bandwidth_mhz: p.noise.bandwidth_hz / 1e6,
            n0_dbm_per_hz: p.noise.n0_dbm_per_hz,
            noise_figure_db: p.noise.noise_figure_db,
            c_los_db: 10.0 * p.path_loss.c_los.log10(),
            c_nlos_db: 10.0 * p.path_loss.c_nlos.log10(),
            alpha_los: p.path_loss.alpha_los,
            alpha_nlos: p.path_loss.alpha_nlos,
            beta: p.path_loss.beta,
            p_x_dbm: p.p_x_dbm,
            p_u_dbm: p.p_u_dbm,
            n_bs: p.antenna.n_bs,
            n_ue: p.antenna.n_ue,
            theta_bs_rad: p.antenna.theta_bs,
            theta_ue_rad: p.antenna.theta_ue,
            omni_penalty_db: p.antenna.omni_penalty_db,
            lambda_1_per_km2: p.sharing.lambda_1,
            lambda_2_per_km2: p.sharing.lambda_2,
            rho: p.sharing.rho,
            r_bar_m: p.r_bar,
            p_th_offset_db: p.p_th_offset_db,
            p_th_a_offset_db: p.p_th_a_offset_db,
            p_th_dbm: None,
            p_th_a_dbm: None,
            protocols: vec!["non-cs".into(), "ocsr".into(), "dcsr".into(), "dcsra".into()],
            mode: Mode::Both,
            z_grid_db: sim.z_grid_db,
            sweep_rho: None,
            sweep_p_th_offset_db: None,
            sweep_p_th_a_offset_db: None,
            iterations: sim.iterations_cov,
            iterations_pt: None,
            region_radius_m: sim.region_radius,
            seed: sim.master_seed,
            trace: false,
            out_dir: PathBuf::from("results"),
            format: Format::Csv,
        }
    }
}

/// Validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: NetworkParams,
    pub protocols: Vec<Protocol>,
    pub mode: Mode,
    pub rho: Vec<f64>,
    pub p_th_offset_db: Vec<f64>,
    pub p_th_a_offset_db: Vec<f64>,
    pub sim: SimConfig,
    pub trace: bool,
    pub out_dir: PathBuf,
    pub format: Format,
}

fn sweep(field: &str, list: Option<Vec<f64>>, single: f64) -> Result<Vec<f64>, CliError> {
    match list {
        None => Ok(vec![single]),
        Some(v) if v.is_empty() => Err(CliError::Config(format!("{field}: sweep list is empty"))),
        Some(v) => Ok(v),
    }
}

impl RawConfig {
    pub fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut params = NetworkParams {
            path_loss: PathLossParams::from_db(self.c_los_db, self.c_nlos_db, self.alpha_los, self.alpha_nlos, self.beta)?,
            antenna: AntennaParams {
                n_bs: self.n_bs,
                n_ue: self.n_ue,
                theta_bs: self.theta_bs_rad,
                theta_ue: self.theta_ue_rad,
                omni_penalty_db: self.omni_penalty_db,
            },
            noise: NoiseParams { n0_dbm_per_hz: self.n0_dbm_per_hz, bandwidth_hz: self.bandwidth_mhz * 1e6, noise_figure_db: self.noise_figure_db },
            sharing: SharingModel { lambda_1: self.lambda_1_per_km2, lambda_2: self.lambda_2_per_km2, rho: self.rho },
            p_x_dbm: self.p_x_dbm,
            p_u_dbm: self.p_u_dbm,
            p_th_offset_db: self.p_th_offset_db,
            p_th_a_offset_db: self.p_th_a_offset_db,
            r_bar: self.r_bar_m,
        };
        let nf = params.noise_floor_dbm();
        if let Some(abs) = self.p_th_dbm {
            if self.sweep_p_th_offset_db.is_some() {
                return Err(CliError::Config("p_th_dbm: cannot be combined with sweep_p_th_offset_db".into()));
            }
            params.p_th_offset_db = abs - nf;
        }
        if let Some(abs) = self.p_th_a_dbm {
            if self.sweep_p_th_a_offset_db.is_some() {
                return Err(CliError::Config("p_th_a_dbm: cannot be combined with sweep_p_th_a_offset_db".into()));
            }
            params.p_th_a_offset_db = abs - nf;
        }
        params.validate()?;

        if self.protocols.is_empty() {
            return Err(CliError::Config("protocols: at least one protocol is required".into()));
        }
        let protocols = self.protocols.iter().map(|s| s.parse()).collect::<Result<Vec<Protocol>, _>>()?;
        let rho = sweep("sweep_rho", self.sweep_rho, params.sharing.rho)?;
        for &r in &rho {
            SharingModel { rho: r, ..params.sharing }.validate()?;
        }
        let p_th_offset_db = sweep("sweep_p_th_offset_db", self.sweep_p_th_offset_db, params.p_th_offset_db)?;
        let p_th_a_offset_db = sweep("sweep_p_th_a_offset_db", self.sweep_p_th_a_offset_db, params.p_th_a_offset_db)?;
        let sim = SimConfig {
            iterations_pt: self.iterations_pt.unwrap_or(self.iterations),
            iterations_cov: self.iterations,
            region_radius: self.region_radius_m,
            master_seed: self.seed,
            z_grid_db: self.z_grid_db,
        };
        sim.validate()?;
        Ok(ExperimentConfig {
            params,
            protocols,
            mode: self.mode,
            rho,
            p_th_offset_db,
            p_th_a_offset_db,
            sim,
            trace: self.trace,
            out_dir: self.out_dir,
            format: self.format,
        })
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().trim().to_string() + &span_hint(&e)))?;
    raw.into_config()
}

fn span_hint(e: &toml::de::Error) -> String {
    e.span().map(|s| format!(" (at byte {})", s.start)).unwrap_or_default()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    parse_config(&text)
}
