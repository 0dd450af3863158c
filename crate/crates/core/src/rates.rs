//! Quantum noise spectrum of the bath coordinate, golden-rule photon rates,
//! and the grand-canonical photon occupation.
//!
//! The system mode sits at `Omega = -delta_a = omega_a - nu_b` in the frame of
//! the beam-splitter drive, so the drive frequency `nu_b` plays the role of
//! the photon chemical potential.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{beta_eff, check_grid, detailed_balance_terms, fmt_num, json_num};
use crate::error::{Error, Result};
use crate::response::chi_q_norm_sqr;
use crate::units::SystemParams;

/// Converts a lab-frame system frequency and drive frequency to `Omega`.
pub fn rotating_frame_detuning(omega_a: f64, nu_b: f64) -> f64 {
    omega_a - nu_b
}

/// Bose factor `1 / (exp(x) - 1)`; negative for `x < 0`.
fn bose(x: f64) -> f64 {
    x.exp_m1().recip()
}

/// Two-sided noise spectrum `S_qq[omega]` from the spectral representation:
/// `2 J_eff (n_eff + 1)` for `omega > 0` and `2 J_eff n_eff` at `-|omega|`.
pub fn s_qq(omega: f64, p: &SystemParams) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::Grid("S_qq is evaluated at omega != 0 only".into()));
    }
    let w = omega.abs();
    let chi2 = chi_q_norm_sqr(w, p)?;
    let (lower, excess) = detailed_balance_terms(w, p);
    Ok(2.0 * chi2 * if omega > 0.0 { lower + excess } else { lower })
}

/// Emission and absorption coefficients at one system frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// Effective inverse temperature at this frequency.
    pub beta_eff: f64,
    pub thermal: bool,
}

/// `Gamma_+ = 4 g_a^2 omega_m J_eff n_eff`, `Gamma_- = Gamma_+ + 4 g_a^2 omega_m J_eff`.
pub fn gamma_rates(omega: f64, p: &SystemParams) -> Result<Rates> {
    if !(omega > 0.0) {
        return Err(Error::Grid("photon rates need Omega > 0".into()));
    }
    let scale = 4.0 * p.g_a * p.g_a * p.omega_m * chi_q_norm_sqr(omega, p)?;
    let (lower, excess) = detailed_balance_terms(omega, p);
    let b = beta_eff(omega, p);
    Ok(Rates {
        gamma_plus: scale * lower,
        gamma_minus: scale * lower + scale * excess,
        beta_eff: b.value,
        thermal: b.thermal,
    })
}

/// Golden-rule transition rates out of Fock state `n`:
/// `(n + 1) Gamma_+` upward and `n Gamma_-` downward.
pub fn fgr_rates(n: u64, omega: f64, p: &SystemParams) -> Result<(f64, f64)> {
    let r = gamma_rates(omega, p)?;
    let n = n as f64;
    Ok(((n + 1.0) * r.gamma_plus, n * r.gamma_minus))
}

/// Equilibrium occupation `1 / (exp(Omega beta_eff) - 1)`. In the gain
/// regime the raw Bose value is carried by [`Error::NonEquilibrium`].
pub fn occupation(omega: f64, p: &SystemParams) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Grid("occupation needs Omega > 0".into()));
    }
    let b = beta_eff(omega, p);
    let raw = bose(omega * b.value);
    if b.thermal {
        Ok(raw)
    } else {
        Err(Error::NonEquilibrium { raw })
    }
}

/// Occupation with cavity loss, `Gamma_+ / (Gamma_- + kappa_a - Gamma_+)`.
///
/// Written as `n0 * s / (s + kappa_a)` with `s = Gamma_- - Gamma_+`, which
/// reduces to [`occupation`] bit-for-bit at `kappa_a = 0`.
pub fn occupation_with_loss(omega: f64, p: &SystemParams) -> Result<f64> {
    let n0 = occupation(omega, p)?;
    let r = gamma_rates(omega, p)?;
    let spread = r.gamma_minus - r.gamma_plus;
    let loss_side = r.gamma_minus + p.kappa_a;
    if !(spread + p.kappa_a > 0.0) {
        return Err(Error::NoSteadyState {
            gain_side: r.gamma_plus,
            loss_side,
        });
    }
    if p.kappa_a == 0.0 {
        return Ok(n0);
    }
    Ok(n0 * (spread / (spread + p.kappa_a)))
}

/// One row of a [`RateTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    #[serde(rename = "Omega")]
    pub omega: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub n_bar: f64,
    pub n_bar_lossy: f64,
}

/// Rates and occupations over a grid of system frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    /// Gain-regime occupations are NaN unless `allow_gain` opts into the raw
    /// (negative) Bose values. Pole points carry NaN rates.
    pub fn compute(p: &SystemParams, grid: &[f64], allow_gain: bool) -> Result<Self> {
        p.validate()?;
        check_grid(grid)?;
        let rows = grid
            .par_iter()
            .map(|&omega| {
                let (gp, gm) = match gamma_rates(omega, p) {
                    Ok(r) => (r.gamma_plus, r.gamma_minus),
                    Err(_) => (f64::NAN, f64::NAN),
                };
                let pick = |r: Result<f64>| match r {
                    Ok(v) => v,
                    Err(Error::NonEquilibrium { raw }) if allow_gain => raw,
                    Err(_) => f64::NAN,
                };
                RateRow {
                    omega,
                    gamma_plus: gp,
                    gamma_minus: gm,
                    n_bar: pick(occupation(omega, p)),
                    n_bar_lossy: pick(occupation_with_loss(omega, p)),
                }
            })
            .collect();
        Ok(Self { rows })
    }

    /// CSV with columns `Omega,gamma_plus,gamma_minus,n_bar,n_bar_lossy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "Omega,gamma_plus,gamma_minus,n_bar,n_bar_lossy")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_num(r.omega),
                fmt_num(r.gamma_plus),
                fmt_num(r.gamma_minus),
                fmt_num(r.n_bar),
                fmt_num(r.n_bar_lossy)
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "Omega": json_num(r.omega),
                        "gamma_plus": json_num(r.gamma_plus),
                        "gamma_minus": json_num(r.gamma_minus),
                        "n_bar": json_num(r.n_bar),
                        "n_bar_lossy": json_num(r.n_bar_lossy),
                    })
                })
                .collect(),
        )
    }
}
