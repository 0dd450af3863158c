//! Michelson-Sagnac interferometer design helper: hardware parameters in SI
//! units to the dimensionless beam-splitter coupling `g_a`.
//!
//! This is the only place SI units appear. The membrane reflectivity enters
//! through its magnitude only, and the interferometer is assumed to sit on
//! the dark fringe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsiGeometry {
    /// Membrane amplitude reflectivity magnitude, `0 <= r_m < 1`.
    pub r_m: f64,
    /// Cavity resonance, rad/s.
    pub omega_0: f64,
    /// Lengths in metres; the effective cavity length is `d + L + l`.
    pub d: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub l: f64,
}

impl MsiGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.r_m) {
            return Err(invalid("r_m", "must lie in [0, 1)"));
        }
        if !(self.omega_0 > 0.0 && self.omega_0.is_finite()) {
            return Err(invalid("omega_0", "must be finite and > 0"));
        }
        for (name, v) in [("d", self.d), ("L", self.big_l), ("l", self.l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "length must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn effective_length(&self) -> f64 {
        self.d + self.big_l + self.l
    }
}

fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidParam {
        field,
        reason: reason.into(),
    }
}

/// Bare beam-splitter coupling `G_a0 = r_m omega_0 / (d + L + l)`, in rad/s per metre.
pub fn msi_coupling(geo: &MsiGeometry) -> Result<f64> {
    geo.validate()?;
    Ok(geo.r_m * geo.omega_0 / geo.effective_length())
}

/// `sqrt(hbar / (2 M omega_m))` in metres.
pub fn zero_point_length(mass: f64, omega_m: f64) -> Result<f64> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(invalid("mass", "must be finite and > 0"));
    }
    if !(omega_m > 0.0 && omega_m.is_finite()) {
        return Err(invalid("omega_m", "must be finite and > 0"));
    }
    Ok((HBAR_SI / (2.0 * mass * omega_m)).sqrt())
}

/// `g_a = G_a0 |b_s| q_zpf / omega_m`, dimensionless.
pub fn enhanced_coupling_from_hardware(geo: &MsiGeometry, b_s: f64, mass: f64, omega_m: f64) -> Result<f64> {
    Ok(msi_coupling(geo)? * b_s.abs() * zero_point_length(mass, omega_m)? / omega_m)
}

/// Inverse of [`enhanced_coupling_from_hardware`]: the intracavity amplitude
/// `|b_s|` that yields a given dimensionless `g_a`.
pub fn drive_amplitude_for_coupling(g_a: f64, geo: &MsiGeometry, mass: f64, omega_m: f64) -> Result<f64> {
    let per_photon = msi_coupling(geo)? * zero_point_length(mass, omega_m)? / omega_m;
    if per_photon == 0.0 {
        return Err(invalid("r_m", "a transparent membrane cannot realize g_a > 0"));
    }
    Ok(g_a / per_photon)
}

/// SI hardware block of a configuration document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareBlock {
    pub r_m: f64,
    pub omega_0: f64,
    pub d: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub l: f64,
    /// Steady-state amplitude of the beam-splitter cavity.
    pub b_s: f64,
    /// Effective membrane mass, kg.
    pub mass: f64,
    /// Mechanical frequency, rad/s.
    pub omega_m: f64,
}

impl HardwareBlock {
    pub fn geometry(&self) -> MsiGeometry {
        MsiGeometry {
            r_m: self.r_m,
            omega_0: self.omega_0,
            d: self.d,
            big_l: self.big_l,
            l: self.l,
        }
    }

    pub fn g_a(&self) -> Result<f64> {
        enhanced_coupling_from_hardware(&self.geometry(), self.b_s, self.mass, self.omega_m)
    }
}
