use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{beta_eff, fmt_num, integration_cutoff, j_eff, ohmic_j, resonance_peaks, spectral_breakpoints};
use crate::error::{Error, Result};
use crate::quad::{composite_rule, integrate_semi_infinite, QuadConfig};
use crate::response::{chi_q_norm_sqr, lorentzian, lorentzian_asymmetry};
use crate::units::SystemParams;

/// Which part of the position autocorrelation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Contribution {
    /// Ohmic mechanical bath.
    Thermal,
    /// Cooling cavity: sideband cooling and counter-rotating heating.
    Optical,
    Total,
}

impl fmt::Display for Contribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Contribution::Thermal => "thermal",
            Contribution::Optical => "optical",
            Contribution::Total => "total",
        })
    }
}

/// A correlation value with its quadrature error (including truncation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrValue {
    pub value: Complex64,
    pub error: f64,
}

// Spectral weights (a, b) with C(t) = int_0^inf [a cos(wt) - i b sin(wt)] dw.
fn weights(w: f64, p: &SystemParams, tag: Contribution) -> Result<(f64, f64)> {
    let chi2 = chi_q_norm_sqr(w, p)?;
    let thermal = || {
        let j = ohmic_j(w, p) * chi2 / PI;
        let coth = 1.0 + 2.0 / (p.beta * w).exp_m1();
        (j * coth, j)
    };
    let optical = || {
        let h = p.hbar_gc_sq() * chi2;
        (h * (lorentzian(w, p) + lorentzian(-w, p)), h * lorentzian_asymmetry(w, p))
    };
    Ok(match tag {
        Contribution::Thermal => thermal(),
        Contribution::Optical => optical(),
        Contribution::Total => {
            let (a, b) = thermal();
            let (c, d) = optical();
            (a + c, b + d)
        }
    })
}

fn integrate_weights<F>(t: f64, p: &SystemParams, cfg: &QuadConfig, weight: F) -> Result<CorrValue>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let res = integrate_semi_infinite(
        |w| match weight(w) {
            Ok((a, b)) => {
                let (s, c) = (w * t).sin_cos();
                Complex64::new(a * c, -b * s)
            }
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        },
        0.0,
        integration_cutoff(p),
        &spectral_breakpoints(p),
        cfg,
    )?;
    if !(res.value.re.is_finite() && res.value.im.is_finite()) {
        return Err(Error::Pole { omega: f64::NAN });
    }
    Ok(CorrValue {
        value: res.value,
        error: res.total_error(),
    })
}

/// `int_0^inf (J |chi_q|^2 / pi) [coth(beta w / 2) cos(wt) - i sin(wt)] dw`.
pub fn c_qq_thermal(t: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<CorrValue> {
    if p.gamma_m == 0.0 {
        return Ok(CorrValue {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    integrate_weights(t, p, cfg, |w| weights(w, p, Contribution::Thermal))
}

/// `int_0^inf hbar G_c^2 |chi_q|^2 (e^{-iwt} L[w] + e^{iwt} L[-w]) dw`.
pub fn c_qq_optical(t: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<CorrValue> {
    if p.g_c == 0.0 {
        return Ok(CorrValue {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    integrate_weights(t, p, cfg, |w| weights(w, p, Contribution::Optical))
}

/// Sum of the thermal and optical parts.
pub fn c_qq_total(t: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<CorrValue> {
    let a = c_qq_thermal(t, p, cfg)?;
    let b = c_qq_optical(t, p, cfg)?;
    Ok(CorrValue {
        value: a.value + b.value,
        error: a.error + b.error,
    })
}

/// `(1/pi) int_0^inf J_eff [coth(w beta_eff / 2) cos(wt) - i sin(wt)] dw`,
/// built only from the effective spectral density and temperature.
pub fn spectral_representation(t: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<CorrValue> {
    integrate_weights(t, p, cfg, |w| {
        let j = j_eff(w, p)? / PI;
        let b = beta_eff(w, p);
        if !b.thermal {
            return Err(Error::NonEquilibrium { raw: b.value });
        }
        Ok((j * (1.0 + 2.0 / (w * b.value).exp_m1()), j))
    })
}

/// Uniform time sampling `t = 0, dt, ..., t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSpec {
    pub t_max: f64,
    pub dt: f64,
    /// Gauss-Legendre nodes per frequency panel.
    pub order: usize,
    /// Largest frequency panel; must resolve `cos(w t_max)`.
    pub panel: f64,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        Self {
            t_max: 200.0,
            dt: 0.01,
            order: 8,
            panel: 0.02,
        }
    }
}

/// Sampled correlation function.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub tag: Contribution,
}

impl CorrelationSeries {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,re,im,tag")?;
        for (t, c) in self.times.iter().zip(&self.values) {
            writeln!(out, "{},{},{},{}", fmt_num(*t), fmt_num(c.re), fmt_num(c.im), self.tag)?;
        }
        Ok(())
    }
}

fn frequency_edges(p: &SystemParams, spec: &SeriesSpec) -> Vec<f64> {
    let top = 50.0 * p.omega_m.max(p.kappa_c).max(p.delta_c.abs());
    let mut cuts: Vec<f64> = spectral_breakpoints(p).into_iter().filter(|&x| x < top).collect();
    for (at, width) in resonance_peaks(p) {
        cuts.extend([at - 0.5 * width, at + 0.5 * width].into_iter().filter(|&x| x > 0.0 && x < top));
    }
    cuts.push(0.0);
    cuts.push(top);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![0.0];
    for pair in cuts.windows(2) {
        let n = ((pair[1] - pair[0]) / spec.panel).ceil().max(1.0) as usize;
        for k in 1..=n {
            edges.push(pair[0] + (pair[1] - pair[0]) * k as f64 / n as f64);
        }
    }
    edges
}

/// Samples `C_qq(t)` from a fixed composite Gauss-Legendre frequency rule,
/// advancing each node's phase by a rotation per time step.
pub fn correlation_series(p: &SystemParams, tag: Contribution, spec: &SeriesSpec) -> Result<CorrelationSeries> {
    p.validate()?;
    if !(spec.dt > 0.0 && spec.t_max > 0.0 && spec.order >= 1 && spec.panel > 0.0) {
        return Err(Error::Grid("series needs dt, t_max, panel > 0 and order >= 1".into()));
    }
    let (nodes, qw) = composite_rule(&frequency_edges(p, spec), spec.order);
    let ab = nodes
        .par_iter()
        .zip(&qw)
        .map(|(&w, &q)| weights(w, p, tag).map(|(a, b)| (q * a, q * b)))
        .collect::<Result<Vec<_>>>()?;
    let step: Vec<Complex64> = nodes.iter().map(|&w| Complex64::from_polar(1.0, w * spec.dt)).collect();
    let mut phase = vec![Complex64::new(1.0, 0.0); nodes.len()];
    let count = (spec.t_max / spec.dt).round() as usize + 1;
    let mut times = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((z, &(a, b)), r) in phase.iter_mut().zip(&ab).zip(&step) {
            acc.re += a * z.re;
            acc.im -= b * z.im;
            *z *= r;
        }
        // periodic re-anchoring of the phases
        if k % 1024 == 1023 {
            let t = (k + 1) as f64 * spec.dt;
            for (z, &w) in phase.iter_mut().zip(&nodes) {
                *z = Complex64::from_polar(1.0, w * t);
            }
        }
        times.push(k as f64 * spec.dt);
        values.push(acc);
    }
    Ok(CorrelationSeries { times, values, tag })
}

/// `S[w] = 2 Re int_0^T e^{iwt} C(t) dt` by the trapezoid rule, using
/// `C(-t) = conj C(t)`.
pub fn spectrum_from_correlation(series: &CorrelationSeries, omega: f64) -> Result<f64> {
    let n = series.times.len();
    if n < 2 || series.times[0] != 0.0 {
        return Err(Error::Grid("series must start at t = 0 with at least two samples".into()));
    }
    let dt = series.times[1] - series.times[0];
    let rot = Complex64::from_polar(1.0, omega * dt);
    let mut z = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in series.values.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        acc += z * c * w;
        z *= rot;
        if k % 1024 == 1023 {
            z = Complex64::from_polar(1.0, omega * (k + 1) as f64 * dt);
        }
    }
    Ok(2.0 * (acc * dt).re)
}
