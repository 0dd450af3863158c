//! Parameter set and steady-state helpers.
//!
//! Everything is dimensionless: hbar = k_B = M = 1 and frequencies are
//! measured in units of the mechanical frequency. Users normally supply the
//! pump-enhanced couplings `g_a`, `g_c` directly; [`DriveSpec`] derives them
//! from raw drive amplitudes when needed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the cooled optomechanical bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Mechanical frequency; the frequency unit.
    pub omega_m: f64,
    /// Mechanical damping rate.
    pub gamma_m: f64,
    /// Linewidth of the beam-splitter cavity `b`.
    pub kappa_b: f64,
    /// Linewidth of the cooling cavity `c`.
    pub kappa_c: f64,
    /// Loss rate of the system cavity `a` (0 for a perfect cavity).
    pub kappa_a: f64,
    /// Drive-frame detuning of the system mode, `nu_b - omega_a`.
    pub delta_a: f64,
    pub delta_b: f64,
    /// Cooling drive detuning, `nu_c - omega_c`. Negative is red.
    pub delta_c: f64,
    /// Pump-enhanced system-bath coupling.
    pub g_a: f64,
    /// Pump-enhanced mechanics/cooling-cavity coupling.
    pub g_c: f64,
    /// Inverse temperature of the mechanical environment (hbar*beta).
    pub beta: f64,
    /// Exponential cutoff of the Ohmic spectral density.
    pub cutoff: f64,
}

impl Default for SystemParams {
    /// The laser-cooled parameter set of the reference figure:
    /// `-delta_c = omega_m = sqrt(3/4) kappa_c`, `g_a = g_c = 0.45`,
    /// `gamma_m = 1e-6`, `hbar beta omega_m = 1e-4`.
    fn default() -> Self {
        let kappa_c = 2.0 / 3f64.sqrt();
        Self {
            omega_m: 1.0,
            gamma_m: 1e-6,
            kappa_b: 1.0,
            kappa_c,
            kappa_a: 0.0,
            delta_a: -2.5,
            delta_b: 0.0,
            delta_c: optimal_detuning(kappa_c),
            g_a: 0.45,
            g_c: 0.45,
            beta: 1e-4,
            cutoff: 1e3,
        }
    }
}

fn require(ok: bool, field: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            field,
            reason: reason.to_string(),
        })
    }
}

impl SystemParams {
    /// Checks every field invariant. NaN fails all comparisons and is rejected.
    pub fn validate(&self) -> Result<()> {
        require(self.omega_m > 0.0 && self.omega_m.is_finite(), "omega_m", "must be finite and > 0")?;
        require(self.kappa_c > 0.0 && self.kappa_c.is_finite(), "kappa_c", "must be finite and > 0")?;
        require(self.kappa_b > 0.0 && self.kappa_b.is_finite(), "kappa_b", "must be finite and > 0")?;
        require(self.cutoff > 0.0, "cutoff", "must be > 0")?;
        require(self.beta > 0.0, "beta", "must be > 0")?;
        require(self.gamma_m >= 0.0 && self.gamma_m.is_finite(), "gamma_m", "must be finite and >= 0")?;
        require(self.kappa_a >= 0.0, "kappa_a", "must be >= 0")?;
        require(self.g_a >= 0.0 && self.g_a.is_finite(), "g_a", "must be finite and >= 0")?;
        require(self.g_c >= 0.0 && self.g_c.is_finite(), "g_c", "must be finite and >= 0")?;
        require(self.delta_a.is_finite(), "delta_a", "must be finite")?;
        require(self.delta_b.is_finite(), "delta_b", "must be finite")?;
        require(self.delta_c.is_finite(), "delta_c", "must be finite")?;
        Ok(())
    }

    /// `hbar G_c^2`, the squared unenhanced cooling coupling in frequency
    /// units: `2 g_c^2 omega_m` with `M = 1`.
    pub fn hbar_gc_sq(&self) -> f64 {
        2.0 * self.g_c * self.g_c * self.omega_m
    }

    /// Squared zero-point length `hbar / (2 M omega_m)`.
    pub fn q_zpf_sq(&self) -> f64 {
        0.5 / self.omega_m
    }

    /// `delta_c^2 + kappa_c^2 / 4`, the recurring Lorentzian denominator.
    pub fn lorentz_denominator(&self) -> f64 {
        self.delta_c * self.delta_c + 0.25 * self.kappa_c * self.kappa_c
    }

    /// True when `-delta_c = sqrt(3) kappa_c / 2` within `rel_tol`.
    pub fn at_optimal_detuning(&self, rel_tol: f64) -> bool {
        let target = optimal_detuning(self.kappa_c);
        (self.delta_c - target).abs() <= rel_tol * target.abs()
    }

    pub fn with_g_c(mut self, g_c: f64) -> Self {
        self.g_c = g_c;
        self
    }

    pub fn with_g_a(mut self, g_a: f64) -> Self {
        self.g_a = g_a;
        self
    }

    pub fn with_gamma_m(mut self, gamma_m: f64) -> Self {
        self.gamma_m = gamma_m;
        self
    }

    pub fn with_delta_c(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self
    }

    pub fn with_kappa_c(mut self, kappa_c: f64) -> Self {
        self.kappa_c = kappa_c;
        self
    }

    pub fn with_delta_a(mut self, delta_a: f64) -> Self {
        self.delta_a = delta_a;
        self
    }

    pub fn with_kappa_a(mut self, kappa_a: f64) -> Self {
        self.kappa_a = kappa_a;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

/// A classical drive on one of the auxiliary cavities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Single-photon coupling `G_0` times the zero-point length, in frequency units
    /// per unit of dimensionless displacement.
    pub coupling: f64,
    /// Input amplitude (square root of photon flux), non-negative after the
    /// drive phase has been absorbed.
    pub input_amplitude: f64,
    /// Drive detuning `nu - omega`.
    pub detuning: f64,
}

/// Intracavity steady state produced by a drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyAmplitude {
    pub value: Complex64,
    pub magnitude: f64,
}

/// `s = sqrt(kappa) s_in / (i delta - kappa / 2)`.
pub fn steady_state_amplitude(drive: &DriveSpec, kappa: f64) -> Result<SteadyAmplitude> {
    require(kappa > 0.0, "kappa", "cavity linewidth must be > 0")?;
    let value = Complex64::new(kappa.sqrt() * drive.input_amplitude, 0.0)
        / Complex64::new(-0.5 * kappa, drive.detuning);
    Ok(SteadyAmplitude {
        value,
        magnitude: value.norm(),
    })
}

/// Pump-enhanced coupling `g = G_0 |s| q_zpf` with `q_zpf = 1/sqrt(2 omega_m)`.
pub fn enhanced_coupling(drive: &DriveSpec, kappa: f64, omega_m: f64) -> Result<f64> {
    let s = steady_state_amplitude(drive, kappa)?;
    Ok(drive.coupling * s.magnitude * (0.5 / omega_m).sqrt())
}

/// Static offset `q_0 = -G_c0 |c_s|^2 / omega_m^2` that cancels the mean
/// radiation-pressure force (hbar = M = 1).
pub fn equilibrium_displacement(g_c0: f64, c_s: Complex64, omega_m: f64) -> f64 {
    -g_c0 * c_s.norm_sqr() / (omega_m * omega_m)
}

/// Red-detuned cooling detuning that flattens the low-frequency temperature,
/// `delta_c = -(sqrt 3 / 2) kappa_c`.
pub fn optimal_detuning(kappa_c: f64) -> f64 {
    -0.5 * 3f64.sqrt() * kappa_c
}

/// Bose occupation of the mechanical environment, `1 / (exp(beta omega) - 1)`.
pub fn thermal_occupation(omega: f64, beta: f64) -> f64 {
    (beta * omega).exp_m1().recip()
}
