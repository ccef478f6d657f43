//! Free-space link budgets.
//!
//! Power transfer over an open-air path follows the Friis relation
//!
//! ```text
//! L = L_A · G_t · G_r · (λ / 4πd)²
//! ```
//!
//! reported here as a loss in dB: `L_P + L_A - G_t - G_r`. Aperture gains
//! come from the beam divergence `θ = λ / D` with solid angle `Ω = θ²`, so
//! `G = 4π D² / λ²` for an ideal aperture (the alternative `Ω = π θ² / 4`
//! would add 1.05 dB per antenna). A net gain, i.e. a negative total, is
//! reported as is: the far-field formula is outside its validity there.

use std::sync::Arc;

use crate::atmosphere::AtmosphereTable;
use crate::error::{invalid, Result};
use crate::thermal::CONSTANTS;

/// Height above which absorption is neglected on a ground-to-space path.
pub const ABSORPTION_CEILING_KM: f64 = 10.0;

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub fn wavelength_to_frequency_hz(wavelength_m: f64) -> f64 {
    CONSTANTS.c / wavelength_m
}

/// Isotropic free-space path loss `-20 log10(λ / 4πd)`.
pub fn free_space_path_loss_db(wavelength_m: f64, distance_km: f64) -> Result<f64> {
    positive("wavelength", wavelength_m)?;
    positive("distance", distance_km)?;
    let ratio = wavelength_m / (4.0 * std::f64::consts::PI * distance_km * 1e3);
    Ok(-20.0 * ratio.log10())
}

/// Attenuation interpolated from `table` at `frequency_hz`, times `path_km`.
pub fn absorption_db(frequency_hz: f64, path_km: f64, table: &AtmosphereTable) -> Result<f64> {
    positive("frequency", frequency_hz)?;
    if !(path_km >= 0.0) || !path_km.is_finite() {
        return Err(invalid(format!("absorption path must be >= 0 km, got {path_km}")));
    }
    Ok(table.attenuation_db_per_km(frequency_hz / 1e9)? * path_km)
}

/// Ideal aperture gain `10 log10(4π D² / λ²)`.
pub fn antenna_gain_db(wavelength_m: f64, aperture_m: f64) -> Result<f64> {
    antenna_gain_db_with_efficiency(wavelength_m, aperture_m, 1.0)
}

/// Aperture gain scaled by a power efficiency in `(0, 1]`.
pub fn antenna_gain_db_with_efficiency(wavelength_m: f64, aperture_m: f64, efficiency: f64) -> Result<f64> {
    positive("wavelength", wavelength_m)?;
    positive("aperture diameter", aperture_m)?;
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(invalid(format!("antenna efficiency must lie in (0, 1], got {efficiency}")));
    }
    let theta = wavelength_m / aperture_m;
    Ok(10.0 * (efficiency * 4.0 * std::f64::consts::PI / (theta * theta)).log10())
}

/// Geometry of an open-air link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    pub wavelength_m: f64,
    pub distance_km: f64,
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    pub atmosphere: Option<Arc<AtmosphereTable>>,
    /// Portion of the path inside the absorbing atmosphere.
    pub absorption_path_km: f64,
    pub antenna_efficiency: f64,
}

impl LinkGeometry {
    /// Geometry with the absorbing path defaulted to
    /// `min(distance, ABSORPTION_CEILING_KM)` and unit antenna efficiency.
    pub fn new(
        wavelength_m: f64,
        distance_km: f64,
        tx_aperture_m: f64,
        rx_aperture_m: f64,
        atmosphere: Option<Arc<AtmosphereTable>>,
    ) -> Result<Self> {
        let g = Self {
            wavelength_m,
            distance_km,
            tx_aperture_m,
            rx_aperture_m,
            atmosphere,
            absorption_path_km: distance_km.min(ABSORPTION_CEILING_KM),
            antenna_efficiency: 1.0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_absorption_path(mut self, path_km: f64) -> Result<Self> {
        self.absorption_path_km = path_km;
        self.validate()?;
        Ok(self)
    }

    pub fn with_antenna_efficiency(mut self, efficiency: f64) -> Result<Self> {
        self.antenna_efficiency = efficiency;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("wavelength", self.wavelength_m)?;
        positive("distance", self.distance_km)?;
        positive("transmit aperture", self.tx_aperture_m)?;
        positive("receive aperture", self.rx_aperture_m)?;
        if !(self.absorption_path_km >= 0.0 && self.absorption_path_km <= self.distance_km) {
            return Err(invalid(format!(
                "absorption path {} km must lie in [0, distance = {} km]",
                self.absorption_path_km, self.distance_km
            )));
        }
        if !(self.antenna_efficiency > 0.0 && self.antenna_efficiency <= 1.0) {
            return Err(invalid("antenna efficiency must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn frequency_hz(&self) -> f64 {
        wavelength_to_frequency_hz(self.wavelength_m)
    }
}

/// Per-term breakdown of a link budget, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub path_loss_db: f64,
    pub absorption_db: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub total_db: f64,
}

pub fn link_budget(geometry: &LinkGeometry) -> Result<LinkBudget> {
    geometry.validate()?;
    let path_loss_db = free_space_path_loss_db(geometry.wavelength_m, geometry.distance_km)?;
    let absorption_db = match &geometry.atmosphere {
        Some(table) => absorption_db(geometry.frequency_hz(), geometry.absorption_path_km, table)?,
        None => 0.0,
    };
    let tx_gain_db =
        antenna_gain_db_with_efficiency(geometry.wavelength_m, geometry.tx_aperture_m, geometry.antenna_efficiency)?;
    let rx_gain_db =
        antenna_gain_db_with_efficiency(geometry.wavelength_m, geometry.rx_aperture_m, geometry.antenna_efficiency)?;
    Ok(LinkBudget {
        path_loss_db,
        absorption_db,
        tx_gain_db,
        rx_gain_db,
        total_db: path_loss_db + absorption_db - tx_gain_db - rx_gain_db,
    })
}

/// `L_P + L_A - G_t - G_r` in dB; may be negative.
pub fn total_link_loss_db(geometry: &LinkGeometry) -> Result<f64> {
    Ok(link_budget(geometry)?.total_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceMismatch {
    /// `(z_load - z_source) / (z_load + z_source)`
    pub gamma: f64,
    /// `-10 log10(1 - Γ²)`
    pub mismatch_loss_db: f64,
}

pub fn impedance_reflection(z_source_ohm: f64, z_load_ohm: f64) -> Result<ImpedanceMismatch> {
    positive("source impedance", z_source_ohm)?;
    positive("load impedance", z_load_ohm)?;
    let gamma = (z_load_ohm - z_source_ohm) / (z_load_ohm + z_source_ohm);
    Ok(ImpedanceMismatch {
        gamma,
        mismatch_loss_db: -10.0 * (1.0 - gamma * gamma).log10(),
    })
}

/// `η = 10^(-loss / 10)` for a non-negative loss in dB.
pub fn loss_to_transmissivity(loss_db: f64) -> Result<f64> {
    if !(loss_db >= 0.0) || loss_db.is_nan() {
        return Err(invalid(format!("loss must be >= 0 dB, got {loss_db}")));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

pub fn transmissivity_to_loss_db(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("transmissivity must lie in (0, 1], got {eta}")));
    }
    Ok(-10.0 * eta.log10())
}
