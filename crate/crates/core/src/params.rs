//! The full parameter set of a network scenario.

use serde::{Deserialize, Serialize};

use crate::deployment::{decompose_densities, SharingModel, SiteDensities};
use crate::error::{check_range, Result};
use crate::protocols::SensingParams;
use crate::radio::{db_to_linear, noise_floor, AntennaParams, NoiseParams, PathLossParams};

/// Physical and protocol constants. Thresholds are dB offsets above the
/// noise floor; transmit powers are in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub path_loss: PathLossParams,
    pub antenna: AntennaParams,
    pub noise: NoiseParams,
    pub sharing: SharingModel,
    pub p_x_dbm: f64,
    pub p_u_dbm: f64,
    pub p_th_offset_db: f64,
    pub p_th_a_offset_db: f64,
    /// Average association distance in meters.
    pub r_bar: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            path_loss: PathLossParams::default(),
            antenna: AntennaParams::default(),
            noise: NoiseParams::default(),
            sharing: SharingModel::default(),
            p_x_dbm: 36.0,
            p_u_dbm: 15.0,
            p_th_offset_db: 15.0,
            p_th_a_offset_db: 0.0,
            r_bar: 100.0,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        self.path_loss.validate()?;
        self.antenna.validate()?;
        check_range("bandwidth_hz", self.noise.bandwidth_hz, f64::MIN_POSITIVE, f64::INFINITY)?;
        self.sharing.validate()?;
        decompose_densities(&self.sharing)?;
        check_range("r_bar", self.r_bar, f64::MIN_POSITIVE, f64::INFINITY)?;
        self.sensing().validate()
    }

    pub fn noise_floor_dbm(&self) -> f64 {
        self.noise.floor_dbm()
    }

    /// Noise floor in mW.
    pub fn noise_floor(&self) -> f64 {
        noise_floor(&self.noise)
    }

    /// Noise power normalized by the BS transmit power.
    pub fn sigma2(&self) -> f64 {
        self.noise_floor() / db_to_linear(self.p_x_dbm)
    }

    pub fn sensing(&self) -> SensingParams {
        SensingParams::from_offsets(self.noise_floor_dbm(), self.p_th_offset_db, self.p_th_a_offset_db, self.p_x_dbm, self.p_u_dbm)
    }

    /// Site densities per km^2.
    pub fn densities(&self) -> Result<SiteDensities> {
        decompose_densities(&self.sharing)
    }
}
