//! Frequency response of the laser-cooled mechanical mode.
//!
//! All functions are pure in `(omega, params)`. Conjugate symmetry
//! `f(-omega) = conj(f(omega))` holds for every complex response here.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::SystemParams;

/// One sample of a complex response on a real frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexResponse {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
}

impl ComplexResponse {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn invert(inv: Complex64, omega: f64) -> Result<Complex64> {
    let n2 = inv.norm_sqr();
    if n2 == 0.0 || !n2.recip().is_finite() {
        return Err(Error::Pole { omega });
    }
    Ok(inv.conj() / n2)
}

/// Inverse bare susceptibility `omega_m^2 - omega^2 - i omega gamma_m`.
pub fn chi_q0_inverse(omega: f64, p: &SystemParams) -> Complex64 {
    Complex64::new(p.omega_m * p.omega_m - omega * omega, -omega * p.gamma_m)
}

/// Bare mechanical susceptibility.
pub fn chi_q0(omega: f64, p: &SystemParams) -> Result<Complex64> {
    invert(chi_q0_inverse(omega, p), omega)
}

/// Optical self-energy from the cooling cavity,
/// `hbar G_c^2 [1/((D + w) + i k/2) + 1/((D - w) - i k/2)]`.
pub fn self_energy(omega: f64, p: &SystemParams) -> Complex64 {
    let half_k = 0.5 * p.kappa_c;
    let a = Complex64::new(p.delta_c + omega, half_k).inv();
    let b = Complex64::new(p.delta_c - omega, -half_k).inv();
    (a + b) * p.hbar_gc_sq()
}

/// Dressed susceptibility `1 / (chi_q0^-1 + Sigma)`.
pub fn chi_q(omega: f64, p: &SystemParams) -> Result<Complex64> {
    invert(chi_q0_inverse(omega, p) + self_energy(omega, p), omega)
}

/// `|chi_q|^2`, the quantity every spectral formula uses.
pub fn chi_q_norm_sqr(omega: f64, p: &SystemParams) -> Result<f64> {
    let inv = chi_q0_inverse(omega, p) + self_energy(omega, p);
    let n2 = inv.norm_sqr();
    let r = n2.recip();
    if n2 == 0.0 || !r.is_finite() {
        return Err(Error::Pole { omega });
    }
    Ok(r)
}

/// Normalized Lorentzian centred at `-delta_c` with full width `kappa_c`.
pub fn lorentzian(omega: f64, p: &SystemParams) -> f64 {
    let x = omega + p.delta_c;
    (p.kappa_c / (2.0 * PI)) / (x * x + 0.25 * p.kappa_c * p.kappa_c)
}

/// `L[omega] - L[-omega]` without cancellation:
/// `(kappa_c / 2 pi) (-4 omega delta_c) / (den(+) den(-))`.
pub fn lorentzian_asymmetry(omega: f64, p: &SystemParams) -> f64 {
    let k2 = 0.25 * p.kappa_c * p.kappa_c;
    let plus = (omega + p.delta_c).powi(2) + k2;
    let minus = (omega - p.delta_c).powi(2) + k2;
    (p.kappa_c / (2.0 * PI)) * (-4.0 * omega * p.delta_c) / (plus * minus)
}

/// Evaluates `chi_q` over a grid in parallel; pole points carry their error.
pub fn chi_q_grid(grid: &[f64], p: &SystemParams) -> Vec<Result<ComplexResponse>> {
    grid.par_iter()
        .map(|&omega| {
            chi_q(omega, p).map(|v| ComplexResponse {
                omega,
                re: v.re,
                im: v.im,
            })
        })
        .collect()
}
