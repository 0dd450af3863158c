//! Effective spectral density and temperature of the cooled mechanical bath.
//!
//! The general quantities (`j_eff`, `beta_eff`) are evaluated pointwise from
//! the dressed susceptibility and the sideband Lorentzians. Closed forms for
//! the laser-cooling-dominated limit and the low-frequency limit with a finite
//! mechanical damping live alongside and are tested against the general path.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_real, integrate_semi_infinite, QuadConfig};
use crate::response::{chi_q_norm_sqr, lorentzian, lorentzian_asymmetry};
use crate::units::{thermal_occupation, SystemParams};

/// Ohmic mechanical spectral density with exponential cutoff.
pub fn ohmic_j(omega: f64, p: &SystemParams) -> f64 {
    p.gamma_m * omega * (-omega / p.cutoff).exp()
}

/// `pi hbar G_c^2`, the weight of the sideband Lorentzians.
fn sideband_weight(p: &SystemParams) -> f64 {
    PI * p.hbar_gc_sq()
}

/// Absorption and emission weights of the bath at `omega > 0`, before the
/// `|chi_q|^2` dressing. Returns the absorption weight `J n + P L[-w]` and
/// the excess `J + P (L[w] - L[-w])` of emission over absorption.
pub fn detailed_balance_terms(omega: f64, p: &SystemParams) -> (f64, f64) {
    let j = ohmic_j(omega, p);
    let weight = sideband_weight(p);
    let lower = j * thermal_occupation(omega, p.beta) + weight * lorentzian(-omega, p);
    (lower, j + weight * lorentzian_asymmetry(omega, p))
}

/// Effective spectral density `|chi_q|^2 {J + pi hbar G_c^2 (L[w] - L[-w])}`.
pub fn j_eff(omega: f64, p: &SystemParams) -> Result<f64> {
    let chi2 = chi_q_norm_sqr(omega, p)?;
    Ok(chi2 * (ohmic_j(omega, p) + sideband_weight(p) * lorentzian_asymmetry(omega, p)))
}

/// Effective inverse temperature at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaEff {
    /// `hbar beta_eff`; negative in the gain regime, NaN when undefined.
    pub value: f64,
    /// False for negative or undefined temperatures.
    pub thermal: bool,
}

impl BetaEff {
    pub fn temperature(&self) -> f64 {
        self.value.recip()
    }
}

/// Effective inverse temperature from the detailed-balance ratio
/// `exp(w beta_eff) = (J (n+1) + P L[w]) / (J n + P L[-w])`.
///
/// Evaluated as `ln_1p((J + P (L[w] - L[-w])) / (J n + P L[-w])) / w` so that
/// the ratio is never formed and rounded near 1.
pub fn beta_eff(omega: f64, p: &SystemParams) -> BetaEff {
    let (lower, excess) = detailed_balance_terms(omega, p);
    let upper = lower + excess;
    if !(lower > 0.0 && upper > 0.0) {
        return BetaEff {
            value: f64::NAN,
            thermal: false,
        };
    }
    let value = (excess / lower).ln_1p() / omega;
    BetaEff {
        value,
        thermal: value > 0.0,
    }
}

/// Right-hand side of the implicit coth definition of the effective
/// temperature. Independent of [`beta_eff`]; used as a cross-check.
pub fn coth_form(omega: f64, p: &SystemParams) -> f64 {
    let j = ohmic_j(omega, p);
    let weight = sideband_weight(p);
    let coth_th = 1.0 / (0.5 * p.beta * omega).tanh();
    (j * coth_th + weight * (lorentzian(omega, p) + lorentzian(-omega, p)))
        / (j + weight * (lorentzian(omega, p) - lorentzian(-omega, p)))
}

/// Inverse temperature in the laser-cooling-dominated limit,
/// `ln[((w - D)^2 + k^2/4) / ((w + D)^2 + k^2/4)] / w`.
pub fn beta_opt(omega: f64, p: &SystemParams) -> f64 {
    let k2 = 0.25 * p.kappa_c * p.kappa_c;
    let lower = (omega + p.delta_c).powi(2) + k2;
    (-4.0 * omega * p.delta_c / lower).ln_1p() / omega
}

/// Coefficients `(c0, c2)` of `hbar beta_opt = c0 + c2 w^2 + O(w^4)`.
pub fn beta_opt_expansion(p: &SystemParams) -> (f64, f64) {
    let d = p.delta_c;
    let den = p.lorentz_denominator();
    let c0 = -4.0 * d / den;
    let c2 = -d * (4.0 * d * d - 3.0 * p.kappa_c * p.kappa_c) / (3.0 * den.powi(3));
    (c0, c2)
}

/// `omega_m (delta_c^2 + kappa_c^2/4) + 4 g_c^2 delta_c`; zero at the cooling threshold.
pub fn threshold_margin(p: &SystemParams) -> f64 {
    p.omega_m * p.lorentz_denominator() + 4.0 * p.g_c * p.g_c * p.delta_c
}

fn ohmic_slope(numerator: f64, p: &SystemParams) -> Result<f64> {
    let margin = threshold_margin(p);
    if margin == 0.0 {
        return Err(Error::Divergence {
            quantity: "ohmic slope",
            denominator: margin,
        });
    }
    Ok(numerator / (p.omega_m * p.omega_m * margin * margin))
}

/// Low-frequency Ohmic slope of `j_eff` with the mechanical bath switched off.
pub fn eta_opt(p: &SystemParams) -> Result<f64> {
    ohmic_slope(-4.0 * p.g_c * p.g_c * p.delta_c * p.kappa_c * p.omega_m, p)
}

/// Low-frequency Ohmic slope of `j_eff` including the mechanical bath. Exact in `gamma_m`.
pub fn eta_eff(p: &SystemParams) -> Result<f64> {
    let den = p.lorentz_denominator();
    ohmic_slope(
        p.gamma_m * den * den - 4.0 * p.g_c * p.g_c * p.delta_c * p.kappa_c * p.omega_m,
        p,
    )
}

/// Largest cooling coupling that keeps the mechanics stable,
/// `g_c,max^2 = omega_m (delta_c^2 + kappa_c^2/4) / (4 |delta_c|)`.
pub fn g_c_max(p: &SystemParams) -> Result<f64> {
    if p.delta_c >= 0.0 {
        return Err(Error::RedDetuningRequired { delta_c: p.delta_c });
    }
    Ok((p.omega_m * p.lorentz_denominator() / (4.0 * p.delta_c.abs())).sqrt())
}

/// Closed-form `lim_{w -> 0} hbar beta_eff[w]` with finite `gamma_m`.
pub fn beta_eff_low(p: &SystemParams) -> Result<f64> {
    let den = p.lorentz_denominator();
    let g2 = p.g_c * p.g_c;
    let numerator = p.beta * (p.gamma_m * den * den - 4.0 * g2 * p.delta_c * p.kappa_c * p.omega_m);
    let denominator = den * (p.gamma_m * den + g2 * p.beta * p.kappa_c * p.omega_m);
    if denominator == 0.0 {
        return Err(Error::Divergence {
            quantity: "low-frequency beta_eff",
            denominator,
        });
    }
    Ok(numerator / denominator)
}

/// First-order expansion of [`beta_eff_low`] in `gamma_m`: returns
/// `(zeroth order, coefficient of gamma_m)`.
pub fn beta_eff_low_expansion(p: &SystemParams) -> Result<(f64, f64)> {
    if !(p.g_c > 0.0) {
        return Err(Error::InvalidParam {
            field: "g_c",
            reason: "expansion around the cooling-dominated limit needs g_c > 0".into(),
        });
    }
    let den = p.lorentz_denominator();
    let zeroth = -4.0 * p.delta_c / den;
    let first = (4.0 * p.delta_c + p.beta * den) / (p.g_c * p.g_c * p.beta * p.kappa_c * p.omega_m);
    Ok((zeroth, first))
}

/// Truncation point for semi-infinite frequency integrals.
pub fn integration_cutoff(p: &SystemParams) -> f64 {
    (10.0 * p.cutoff).max(50.0 * p.kappa_c).max(50.0 * p.omega_m)
}

/// Local maxima of `|chi_q|^2` on `omega > 0`, each with an estimated
/// half width at half maximum.
pub fn resonance_peaks(p: &SystemParams) -> Vec<(f64, f64)> {
    let top = 4.0 * p.omega_m.max(p.delta_c.abs() + p.kappa_c).max(2.0 * p.g_c);
    let n = 4000;
    let h = top / n as f64;
    let chi2 = |w: f64| chi_q_norm_sqr(w, p).unwrap_or(f64::INFINITY);
    let samples: Vec<f64> = (0..=n + 1).map(|i| chi2((i as f64 + 0.5) * h)).collect();
    let mut peaks = Vec::new();
    for i in 1..=n {
        if samples[i] >= samples[i - 1] && samples[i] > samples[i + 1] {
            let (mut a, mut b) = ((i as f64 - 0.5) * h, (i as f64 + 1.5) * h);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..200 {
                if b - a <= 1e-13 * b {
                    break;
                }
                let x1 = b - phi * (b - a);
                let x2 = a + phi * (b - a);
                if chi2(x1) >= chi2(x2) {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            let at = 0.5 * (a + b);
            let half = 0.5 * chi2(at);
            let right = bisect(|w| chi2(w) - half, at, at + 2.0 * h);
            let left = bisect(|w| chi2(w) - half, at, (at - 2.0 * h).max(0.0));
            let width = match (left, right) {
                (Some(l), Some(r)) => 0.5 * (r - l),
                (None, Some(r)) => r - at,
                (Some(l), None) => at - l,
                (None, None) => h,
            };
            peaks.push((at, width.max(1e-14 * at)));
        }
    }
    peaks
}

// Sign change of `f` between `inside` (f > 0) and `outside` (f < 0).
fn bisect(f: impl Fn(f64) -> f64, inside: f64, outside: f64) -> Option<f64> {
    if !(f(outside) < 0.0) {
        return None;
    }
    let (mut a, mut b) = (inside, outside);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Breakpoints for frequency quadratures: resonance peaks and their
/// shoulders, the cooling sideband centre, and decades up to the cutoff.
pub fn spectral_breakpoints(p: &SystemParams) -> Vec<f64> {
    let mut pts = Vec::new();
    for (at, width) in resonance_peaks(p) {
        pts.push(at);
        for k in [1.0, 10.0, 100.0, 1000.0] {
            pts.push(at - k * width);
            pts.push(at + k * width);
        }
    }
    pts.push(-p.delta_c);
    let mut decade = 1.0;
    while decade < integration_cutoff(p) {
        pts.push(decade);
        decade *= 10.0;
    }
    pts.retain(|x| *x > 0.0 && x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// A kernel or correlation value together with its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadValue {
    pub value: f64,
    pub error: f64,
}

/// Damping kernel `gamma_eff(t) = Theta(t) (2/pi) int_0^inf (J_eff/w) cos(w t) dw`.
pub fn damping_kernel(t: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<QuadValue> {
    if t < 0.0 {
        return Ok(QuadValue { value: 0.0, error: 0.0 });
    }
    let bps = spectral_breakpoints(p);
    let res = integrate_semi_infinite(
        |w| Complex64::new(j_eff(w, p).unwrap_or(f64::NAN) / w * (w * t).cos(), 0.0),
        0.0,
        integration_cutoff(p),
        &bps,
        cfg,
    )?;
    finite_or_pole(res.value.re * 2.0 / PI, res.total_error() * 2.0 / PI)
}

/// `int_0^T gamma_eff(t) dt = (2/pi) int_0^inf J_eff sin(w T) / w^2 dw`,
/// which tends to `eta_eff` for long windows in the Ohmic regime.
pub fn damping_kernel_integral(window: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<QuadValue> {
    if window <= 0.0 {
        return Ok(QuadValue { value: 0.0, error: 0.0 });
    }
    let bps = spectral_breakpoints(p);
    let res = integrate_semi_infinite(
        |w| Complex64::new(j_eff(w, p).unwrap_or(f64::NAN) * (w * window).sin() / (w * w), 0.0),
        0.0,
        integration_cutoff(p),
        &bps,
        cfg,
    )?;
    finite_or_pole(res.value.re * 2.0 / PI, res.total_error() * 2.0 / PI)
}

/// Nested-quadrature route for [`damping_kernel_integral`]: integrates the
/// kernel itself over `[0, window]`.
pub fn damping_kernel_integral_nested(window: f64, p: &SystemParams, cfg: &QuadConfig) -> Result<f64> {
    let outer = QuadConfig {
        abs_tol: cfg.abs_tol.max(1e-8),
        rel_tol: cfg.rel_tol.max(1e-6),
        ..*cfg
    };
    let (v, _) = integrate_real(
        |t| damping_kernel(t, p, cfg).map(|k| k.value).unwrap_or(f64::NAN),
        0.0,
        window,
        &[],
        &outer,
    )?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Pole { omega: f64::NAN })
    }
}

fn finite_or_pole(value: f64, error: f64) -> Result<QuadValue> {
    if value.is_finite() {
        Ok(QuadValue { value, error })
    } else {
        Err(Error::Pole { omega: f64::NAN })
    }
}

/// Per-point status of a [`BathSpectrum`] sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointFlags {
    pub pole: bool,
    pub non_thermal: bool,
}

impl PointFlags {
    pub fn label(&self) -> &'static str {
        match (self.pole, self.non_thermal) {
            (false, false) => "ok",
            (true, false) => "pole",
            (false, true) => "non_thermal",
            (true, true) => "pole|non_thermal",
        }
    }
}

/// Logarithmic grid with `count` points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Grid(format!("log grid needs 0 < lo < hi and count >= 2 (got {lo}, {hi}, {count})")));
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => lo * (step * i as f64).exp(),
        })
        .collect())
}

/// Linear grid with `count` points over `[lo, hi]`.
pub fn lin_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(hi > lo) {
        return Err(Error::Grid(format!("linear grid needs lo < hi and count >= 2 (got {lo}, {hi}, {count})")));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i == count - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

/// Default spectrum grid: 400 log-spaced points over `[1e-4, 4] omega_m`.
pub fn default_grid(p: &SystemParams) -> Vec<f64> {
    log_grid(1e-4 * p.omega_m, 4.0 * p.omega_m, 400).expect("static grid is valid")
}

/// Sampled effective bath over a positive, ascending frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathSpectrum {
    pub grid: Vec<f64>,
    pub j_eff: Vec<f64>,
    pub beta_eff: Vec<f64>,
    pub flags: Vec<PointFlags>,
}

#[derive(Serialize)]
struct SpectrumRow {
    omega: f64,
    j_eff: f64,
    beta_eff: f64,
    t_eff: f64,
    flags: &'static str,
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("grid is empty".into()));
    }
    if !grid.iter().all(|w| *w > 0.0 && w.is_finite()) {
        return Err(Error::Grid("grid entries must be finite and > 0".into()));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Grid("grid must be strictly ascending".into()));
    }
    Ok(())
}

impl BathSpectrum {
    pub fn compute(p: &SystemParams, grid: &[f64]) -> Result<Self> {
        p.validate()?;
        check_grid(grid)?;
        let samples: Vec<(f64, f64, PointFlags)> = grid
            .par_iter()
            .map(|&w| {
                let b = beta_eff(w, p);
                match j_eff(w, p) {
                    Ok(j) => (j, b.value, PointFlags { pole: false, non_thermal: !b.thermal }),
                    Err(_) => (f64::NAN, b.value, PointFlags { pole: true, non_thermal: !b.thermal }),
                }
            })
            .collect();
        let mut out = Self {
            grid: grid.to_vec(),
            j_eff: Vec::with_capacity(grid.len()),
            beta_eff: Vec::with_capacity(grid.len()),
            flags: Vec::with_capacity(grid.len()),
        };
        for (j, b, f) in samples {
            out.j_eff.push(j);
            out.beta_eff.push(b);
            out.flags.push(f);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn rows(&self) -> impl Iterator<Item = SpectrumRow> + '_ {
        (0..self.len()).map(|i| SpectrumRow {
            omega: self.grid[i],
            j_eff: self.j_eff[i],
            beta_eff: self.beta_eff[i],
            t_eff: self.beta_eff[i].recip(),
            flags: self.flags[i].label(),
        })
    }

    /// CSV with columns `omega,j_eff,beta_eff,t_eff,flags`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "omega,j_eff,beta_eff,t_eff,flags")?;
        for r in self.rows() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_num(r.omega),
                fmt_num(r.j_eff),
                fmt_num(r.beta_eff),
                fmt_num(r.t_eff),
                r.flags
            )?;
        }
        Ok(())
    }

    /// JSON array of row objects mirroring the CSV columns.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.rows().map(|r| row_json(&r)).collect())
    }
}

fn row_json(r: &SpectrumRow) -> serde_json::Value {
    serde_json::json!({
        "omega": json_num(r.omega),
        "j_eff": json_num(r.j_eff),
        "beta_eff": json_num(r.beta_eff),
        "t_eff": json_num(r.t_eff),
        "flags": r.flags,
    })
}

/// Fixed-width scientific notation used in every CSV this crate emits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.10e}")
    } else {
        format!("{x}")
    }
}

/// JSON has no NaN/inf; non-finite numbers become `null`.
pub fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> SystemParams {
        SystemParams::default()
    }

    // Quadratic extrapolation to zero through three abscissae.
    fn extrapolate_to_zero(xs: [f64; 3], ys: [f64; 3]) -> f64 {
        let mut total = 0.0;
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if i != j {
                    w *= (0.0 - xs[j]) / (xs[i] - xs[j]);
                }
            }
            total += w * ys[i];
        }
        total
    }

    #[test]
    fn ohmic_examples() {
        let p = fig1();
        assert_eq!(ohmic_j(0.0, &p), 0.0);
        assert_relative_eq!(ohmic_j(1.0, &p), 1e-6 * (-1e-3f64).exp(), max_relative = 1e-15);
        assert!((ohmic_j(1.0, &p) - 9.99e-7).abs() < 1e-9);
        assert_relative_eq!(ohmic_j(p.cutoff, &p), p.gamma_m * p.cutoff / 1f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn j_eff_without_cooling_is_dressed_ohmic() {
        let p = fig1().with_g_c(0.0);
        for w in [0.01, 0.5, 0.99, 3.0] {
            let chi = crate::response::chi_q0(w, &p).unwrap().norm_sqr();
            assert_relative_eq!(j_eff(w, &p).unwrap(), chi * ohmic_j(w, &p), max_relative = 1e-14);
        }
    }

    #[test]
    fn j_eff_slope_matches_eta_eff() {
        let p = fig1();
        let w = 1e-4;
        assert_relative_eq!(j_eff(w, &p).unwrap() / w, eta_eff(&p).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn cooled_j_eff_is_broad_at_low_frequency() {
        let cooled = fig1();
        let bare = fig1().with_g_c(0.0);
        for w in [1e-3, 0.05, 0.2] {
            assert!(j_eff(w, &cooled).unwrap() > 1e3 * j_eff(w, &bare).unwrap());
        }
    }

    #[test]
    fn beta_eff_bare_bath_is_beta() {
        let p = fig1().with_g_c(0.0);
        for w in [1e-4, 0.1, 1.0, 3.7] {
            let b = beta_eff(w, &p);
            assert!(b.thermal);
            assert_relative_eq!(b.value, p.beta, max_relative = 1e-12);
        }
    }

    #[test]
    fn beta_eff_fig1_low_frequency() {
        let p = fig1();
        let b = beta_eff(1e-5, &p);
        assert!((b.value - 2.838).abs() < 1e-3);
        let ratio = p.beta / b.value;
        assert!((ratio - 3.5e-5).abs() < 0.05e-5, "T_eff/T = {ratio}");
    }

    #[test]
    fn blue_detuning_gives_negative_temperature() {
        let p = fig1().with_delta_c(1.0);
        let b = beta_eff(0.1, &p);
        assert!(b.value < 0.0);
        assert!(!b.thermal);
    }

    #[test]
    fn undefined_temperature_is_flagged() {
        let p = fig1().with_g_c(0.0).with_gamma_m(0.0);
        let b = beta_eff(0.3, &p);
        assert!(b.value.is_nan() && !b.thermal);
    }

    #[test]
    fn beta_opt_examples() {
        let p = fig1();
        assert_relative_eq!(beta_opt(1e-7, &p), 3.0, max_relative = 1e-10);
        assert_relative_eq!(beta_opt(1.0, &p), 13f64.ln(), max_relative = 1e-14);
        let p0 = p.with_gamma_m(0.0);
        for i in 0..100 {
            let w = 1e-3 + 4.0 * i as f64 / 99.0;
            assert_relative_eq!(beta_eff(w, &p0).value, beta_opt(w, &p), max_relative = 1e-12);
        }
    }

    #[test]
    fn beta_opt_expansion_examples() {
        let (c0, c2) = beta_opt_expansion(&fig1());
        assert_relative_eq!(c0, 3.0, max_relative = 1e-14);
        assert!(c2.abs() < 1e-15);
        let (c0, c2) = beta_opt_expansion(&fig1().with_kappa_c(1.0));
        assert_relative_eq!(c0, 3.2, max_relative = 1e-14);
        assert_relative_eq!(c2, 1.0 / (3.0 * 1.25f64.powi(3)), max_relative = 1e-14);
        assert!((c2 - 0.1707).abs() < 1e-4);
    }

    #[test]
    fn beta_opt_expansion_matches_finite_differences() {
        let p = fig1().with_kappa_c(1.0);
        let (c0, c2) = beta_opt_expansion(&p);
        let h = 1e-3;
        let f0 = beta_opt(1e-9, &p);
        let (f1, f2) = (beta_opt(h, &p), beta_opt(2.0 * h, &p));
        let c2_num = (16.0 * (f1 - f0) - (f2 - f0)) / (12.0 * h * h);
        assert_relative_eq!(f0, c0, max_relative = 1e-12);
        assert_relative_eq!(c2_num, c2, max_relative = 1e-6);
    }

    #[test]
    fn eta_opt_examples() {
        let p = fig1();
        assert_eq!(eta_opt(&p.with_g_c(0.0)).unwrap(), 0.0);
        let v = eta_opt(&p).unwrap();
        let expected = (0.81 * 2.0 / 3f64.sqrt()) / (4.0 / 3.0 - 0.81f64).powi(2);
        assert_relative_eq!(v, expected, max_relative = 1e-13);
        assert!((v - 3.415).abs() < 1e-3);
        let g = g_c_max(&p).unwrap();
        assert!(eta_opt(&p.with_g_c(g * (1.0 - 1e-6))).unwrap() > 1e10);
        // omega_m (D^2 + k^2/4) + 4 g^2 D vanishes exactly at D = -1/2, k = 1, g = 1/2.
        let zero = p.with_g_c(0.5).with_kappa_c(1.0).with_delta_c(-0.5);
        assert!(matches!(eta_opt(&zero), Err(Error::Divergence { .. })));
    }

    #[test]
    fn g_c_max_examples() {
        let p = fig1();
        assert_relative_eq!(g_c_max(&p).unwrap(), 1.0 / 3f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g_c_max(&p).unwrap(), p.kappa_c / 2.0, max_relative = 1e-14);
        let q = p.with_kappa_c(2.0).with_delta_c(-1.0);
        assert_relative_eq!(g_c_max(&q).unwrap(), 0.5f64.sqrt(), max_relative = 1e-14);
        let q4 = SystemParams { omega_m: 4.0, ..q };
        assert_relative_eq!(g_c_max(&q4).unwrap(), 2.0 * g_c_max(&q).unwrap(), max_relative = 1e-14);
        let opt = (p.kappa_c * p.omega_m / (2.0 * 3f64.sqrt())).sqrt();
        assert_relative_eq!(g_c_max(&p).unwrap(), opt, max_relative = 1e-14);
        assert!(matches!(g_c_max(&p.with_delta_c(0.0)), Err(Error::RedDetuningRequired { .. })));
        assert!(g_c_max(&p.with_delta_c(0.5)).is_err());
    }

    #[test]
    fn beta_eff_low_examples() {
        let p = fig1();
        // Independent evaluation of the closed form with literal numbers.
        let d = 4.0 / 3.0;
        let k = 2.0 / 3f64.sqrt();
        let expected = 1e-4 * (1e-6 * d * d + 4.0 * 0.2025 * k) / (d * (1e-6 * d + 0.2025 * 1e-4 * k));
        assert_relative_eq!(beta_eff_low(&p).unwrap(), expected, max_relative = 1e-13);
        assert!((beta_eff_low(&p).unwrap() - 2.838).abs() < 1e-3);
        assert_relative_eq!(beta_eff_low(&p.with_gamma_m(0.0)).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(beta_eff_low(&p.with_g_c(0.0)).unwrap(), p.beta, max_relative = 1e-14);
    }

    #[test]
    fn beta_eff_low_expansion_examples() {
        let p = fig1();
        let (z, f) = beta_eff_low_expansion(&p).unwrap();
        assert_relative_eq!(z, 3.0, max_relative = 1e-14);
        assert!((f - (-1.7105e5)).abs() < 0.0005e5, "{f}");
        let approx = z + f * p.gamma_m;
        assert!((approx - 2.829).abs() < 1e-3);
        assert!((approx / beta_eff_low(&p).unwrap() - 1.0).abs() < 4e-3);
        let (z0, _) = beta_eff_low_expansion(&p.with_gamma_m(0.0)).unwrap();
        assert_eq!(z0, beta_opt_expansion(&p).0);
        assert!(beta_eff_low_expansion(&p.with_g_c(0.0)).is_err());
    }

    #[test]
    fn expansion_sign_flips_with_cold_bath() {
        let p = fig1();
        let d = p.lorentz_denominator();
        let edge = 4.0 * p.delta_c.abs() / d;
        let (_, hot) = beta_eff_low_expansion(&p.with_beta(0.5 * edge)).unwrap();
        let (_, cold) = beta_eff_low_expansion(&p.with_beta(2.0 * edge)).unwrap();
        assert!(hot < 0.0 && cold > 0.0);
    }

    #[test]
    fn eta_eff_examples() {
        let p = fig1();
        assert_eq!(eta_eff(&p.with_gamma_m(0.0)).unwrap(), eta_opt(&p).unwrap());
        let expected = (1e-6 * 16.0 / 9.0 + 0.81 * 2.0 / 3f64.sqrt()) / (4.0 / 3.0 - 0.81f64).powi(2);
        assert_relative_eq!(eta_eff(&p).unwrap(), expected, max_relative = 1e-13);
        assert!((eta_eff(&p).unwrap() - 3.4151).abs() < 1e-4);
    }

    #[test]
    fn low_frequency_limits_by_extrapolation() {
        let p = fig1();
        let xs = [1e-3, 1e-4, 1e-5];
        let j = extrapolate_to_zero(xs, xs.map(|w| j_eff(w, &p).unwrap() / w));
        let b = extrapolate_to_zero(xs, xs.map(|w| beta_eff(w, &p).value));
        assert_relative_eq!(j, eta_eff(&p).unwrap(), max_relative = 1e-4);
        assert_relative_eq!(b, beta_eff_low(&p).unwrap(), max_relative = 1e-4);
    }

    #[test]
    fn coth_form_agrees_with_detailed_balance() {
        let p = fig1();
        for w in [1e-3, 0.05, 0.3, 1.0, 2.5] {
            let b = beta_eff(w, &p);
            let from_exp = 1.0 / (0.5 * w * b.value).tanh();
            assert_relative_eq!(from_exp, coth_form(w, &p), max_relative = 1e-10);
        }
    }

    #[test]
    fn cooling_direction() {
        let p = fig1();
        for w in [1e-3, 0.1, 0.5, 1.0, 3.0] {
            let sideband_ratio = lorentzian(w, &p) / lorentzian(-w, &p);
            if sideband_ratio > (w * p.beta).exp() {
                assert!(beta_eff(w, &p).value > p.beta);
            }
        }
    }

    #[test]
    fn flat_temperature_at_optimal_detuning() {
        let p = fig1();
        let h = 1e-3;
        let f0 = beta_opt(1e-9, &p);
        let c2 = (16.0 * (beta_opt(h, &p) - f0) - (beta_opt(2.0 * h, &p) - f0)) / (12.0 * h * h);
        assert!(c2.abs() < 1e-6 * f0, "{c2}");
    }

    #[test]
    fn kernel_is_causal() {
        let v = damping_kernel(-1.0, &fig1(), &QuadConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn kernel_area_tends_to_eta_eff() {
        let p = fig1();
        let cfg = QuadConfig::default();
        let window = 50.0 / p.kappa_c;
        let area = damping_kernel_integral(window, &p, &cfg).unwrap();
        let eta = eta_eff(&p).unwrap();
        assert!((area.value / eta - 1.0).abs() < 0.05, "{} vs {eta}", area.value);
    }

    #[test]
    fn kernel_integral_routes_agree() {
        let p = fig1().with_gamma_m(0.0);
        let cfg = QuadConfig::default();
        let window = 3.0;
        let direct = damping_kernel_integral(window, &p, &cfg).unwrap().value;
        let nested = damping_kernel_integral_nested(window, &p, &cfg).unwrap();
        assert_relative_eq!(direct, nested, max_relative = 1e-5);
    }

    #[test]
    fn kernel_bare_ohmic_tracks_direct_quadrature() {
        // Dressed-Ohmic bath: (2/pi) int |chi_q0|^2 gamma_m e^{-w/L} cos(wt) dw, built here
        // from the bare susceptibility and an independent breakpoint set.
        let p = SystemParams { gamma_m: 0.05, g_c: 0.0, cutoff: 50.0, ..fig1() };
        let cfg = QuadConfig::default();
        for t in [0.0, 0.2, 0.5] {
            let k = damping_kernel(t, &p, &cfg).unwrap().value;
            let (direct, _) = integrate_real(
                |w| {
                    let chi = crate::response::chi_q0(w, &p).unwrap().norm_sqr();
                    2.0 / PI * chi * p.gamma_m * (-w / p.cutoff).exp() * (w * t).cos()
                },
                0.0,
                integration_cutoff(&p),
                &[0.9, 1.0, 1.1, 10.0, 100.0],
                &cfg,
            )
            .unwrap();
            assert_relative_eq!(k, direct, max_relative = 1e-6);
        }
    }

    #[test]
    fn resonance_peaks_find_bare_and_dressed_modes() {
        let bare = resonance_peaks(&fig1().with_g_c(0.0));
        assert_eq!(bare.len(), 1);
        assert!((bare[0].0 - 1.0).abs() < 1e-9);
        assert!(bare[0].1 < 1e-5);
        let dressed = resonance_peaks(&fig1());
        assert!(!dressed.is_empty());
    }

    #[test]
    fn spectrum_grid_and_serialization() {
        let p = fig1();
        let s = BathSpectrum::compute(&p, &default_grid(&p)).unwrap();
        assert_eq!(s.len(), 400);
        assert_eq!(s.grid[0], 1e-4);
        assert_eq!(s.grid[399], 4.0);
        assert!(s.flags.iter().all(|f| f.label() == "ok"));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 401);
        assert!(text.starts_with("omega,j_eff,beta_eff,t_eff,flags\n"));
        let json = s.to_json();
        assert_eq!(json.as_array().unwrap().len(), 400);
        assert_eq!(json[0]["flags"], "ok");
    }

    #[test]
    fn spectrum_flags_poles() {
        let p = fig1().with_g_c(0.0).with_gamma_m(0.0);
        let s = BathSpectrum::compute(&p, &[0.5, 1.0]).unwrap();
        assert!(s.flags[1].pole);
        assert!(s.j_eff[1].is_nan());
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let p = fig1();
        assert!(BathSpectrum::compute(&p, &[]).is_err());
        assert!(BathSpectrum::compute(&p, &[0.0, 1.0]).is_err());
        assert!(BathSpectrum::compute(&p, &[1.0, 0.5]).is_err());
        assert!(log_grid(1.0, 1.0, 10).is_err());
        assert!(lin_grid(0.0, 1.0, 1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn stable_red() -> impl Strategy<Value = SystemParams> {
            (0.05..3.0f64, 0.05..3.0f64, 0.0..0.99f64, 0.0..0.1f64, 1e-5..10.0f64).prop_map(
                |(kappa_c, neg_delta, frac, gamma_m, beta)| {
                    let p = SystemParams { kappa_c, delta_c: -neg_delta, gamma_m, beta, ..Default::default() };
                    let g = g_c_max(&p).unwrap() * frac;
                    p.with_g_c(g)
                },
            )
        }

        proptest! {
            #[test]
            fn eta_eff_positive_when_stable(p in stable_red()) {
                prop_assume!(p.g_c > 0.0 || p.gamma_m > 0.0);
                prop_assert!(eta_eff(&p).unwrap() > 0.0);
            }

            #[test]
            fn reduction_chain(p in stable_red(), w in 1e-3..4.0f64) {
                let p0 = p.with_gamma_m(0.0);
                prop_assume!(p0.g_c > 1e-3);
                let a = beta_eff(w, &p0).value;
                prop_assert!((a - beta_opt(w, &p0)).abs() <= 1e-12 * a.abs());
                prop_assert_eq!(eta_eff(&p0).unwrap(), eta_opt(&p0).unwrap());
            }

            #[test]
            fn coth_equivalence(p in stable_red(), w in 1e-3..4.0f64) {
                prop_assume!(p.g_c > 1e-3);
                let b = beta_eff(w, &p);
                prop_assume!(b.thermal);
                let x = 0.5 * w * b.value;
                prop_assume!(x < 15.0);
                let lhs = 1.0 / x.tanh();
                let rhs = coth_form(w, &p);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "{} vs {}", lhs, rhs);
            }

            #[test]
            fn threshold_matches_margin_zero(p in stable_red()) {
                let g = g_c_max(&p).unwrap();
                let m = threshold_margin(&p.with_g_c(g));
                prop_assert!(m.abs() <= 1e-12 * p.omega_m * p.lorentz_denominator());
            }
        }
    }
}
