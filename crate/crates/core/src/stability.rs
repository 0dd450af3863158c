//! Linear stability of the coupled mechanical, cooling-cavity and probe modes.
//!
//! The eigenvalue test on the drift matrix is authoritative. The closed-form
//! criteria are reported next to it and checked against it wherever their
//! assumptions hold.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bath::fmt_num;
use crate::error::{Error, Result};
use crate::units::SystemParams;

/// Half-width of the band around zero abscissa classified as marginal.
pub const MARGIN: f64 = 1e-9;

/// Relative tolerance on `delta_c = -sqrt(3) kappa_c / 2` for the closed-form criteria.
pub const OPTIMAL_DETUNING_TOL: f64 = 1e-9;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Linear-dynamics generator over `(Q, P, X_c, Y_c[, X_a, Y_a])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix(DMatrix<f64>);

impl DriftMatrix {
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidParam {
                field: "drift_matrix",
                reason: format!("{} entries for dimension {dim}", entries.len()),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<f64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Mechanical mode and cooling cavity.
pub fn drift_matrix_qc(p: &SystemParams) -> DriftMatrix {
    let (w, g, k) = (p.omega_m, 2.0 * p.g_c, 0.5 * p.kappa_c);
    #[rustfmt::skip]
    let m = [
        0.0, w,          0.0,        0.0,
        -w,  -p.gamma_m, g,          0.0,
        0.0, 0.0,        -k,         -p.delta_c,
        g,   0.0,        p.delta_c,  -k,
    ];
    DriftMatrix(DMatrix::from_row_slice(4, 4, &m))
}

/// Mechanical mode, cooling cavity and probe cavity. The probe's own free
/// Hamiltonian is dropped, so `X_a`, `Y_a` carry no damping.
pub fn drift_matrix_full(p: &SystemParams) -> DriftMatrix {
    let (w, g, k, ga) = (p.omega_m, 2.0 * p.g_c, 0.5 * p.kappa_c, 2.0 * p.g_a);
    #[rustfmt::skip]
    let m = [
        0.0, w,          0.0,       0.0,        0.0,       0.0,
        -w,  -p.gamma_m, g,         0.0,        ga,        0.0,
        0.0, 0.0,        -k,        -p.delta_c, 0.0,       0.0,
        g,   0.0,        p.delta_c, -k,         0.0,       0.0,
        0.0, 0.0,        0.0,       0.0,        0.0,       -p.delta_a,
        ga,  0.0,        0.0,       0.0,        p.delta_a, 0.0,
    ];
    DriftMatrix(DMatrix::from_row_slice(6, 6, &m))
}

/// Three-state verdict; `Marginal` covers the band where strict
/// inequalities cannot classify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    /// Verdict from a quantity that must be positive for stability.
    pub fn from_margin(value: f64) -> Self {
        if value > 0.0 {
            Verdict::Stable
        } else if value < 0.0 {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }

    /// Verdict from a spectral abscissa.
    pub fn from_abscissa(abscissa: f64) -> Self {
        if abscissa.abs() < MARGIN {
            Verdict::Marginal
        } else if abscissa < 0.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }

    /// True when both are definite and differ.
    pub fn conflicts(&self, other: Verdict) -> bool {
        *self != Verdict::Marginal && other != Verdict::Marginal && *self != other
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Left-hand side of `4 g_c^2 delta_c + (delta_c^2 + kappa_c^2/4) omega_m > 0`.
pub fn routh_hurwitz_qc(p: &SystemParams) -> Result<(f64, Verdict)> {
    if p.delta_c >= 0.0 {
        return Err(Error::RedDetuningRequired { delta_c: p.delta_c });
    }
    let value = 4.0 * p.g_c * p.g_c * p.delta_c + p.lorentz_denominator() * p.omega_m;
    Ok((value, Verdict::from_margin(value)))
}

/// Closed-form criteria of the six-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criteria {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub verdict: Verdict,
}

/// `s1 = omega_m kappa_c - 2 sqrt3 g_c^2`, `s2 = -delta_a`,
/// `s3 = 2 sqrt3 delta_a g_c^2 - 4 g_a^2 kappa_c - delta_a kappa_c omega_m`.
/// Valid at optimal detuning with `gamma_m` taken as zero.
pub fn full_criteria(p: &SystemParams) -> Result<Criteria> {
    if !p.at_optimal_detuning(OPTIMAL_DETUNING_TOL) {
        let target = crate::units::optimal_detuning(p.kappa_c);
        return Err(Error::OffOptimalDetuning {
            mismatch: (p.delta_c - target) / target.abs(),
        });
    }
    let gc2 = p.g_c * p.g_c;
    let s1 = p.omega_m * p.kappa_c - 2.0 * SQRT3 * gc2;
    let s2 = -p.delta_a;
    let s3 = 2.0 * SQRT3 * p.delta_a * gc2 - 4.0 * p.g_a * p.g_a * p.kappa_c - p.delta_a * p.kappa_c * p.omega_m;
    let verdict = [s1, s2, s3]
        .into_iter()
        .map(Verdict::from_margin)
        .fold(Verdict::Stable, |acc, v| match (acc, v) {
            (Verdict::Unstable, _) | (_, Verdict::Unstable) => Verdict::Unstable,
            (Verdict::Marginal, _) | (_, Verdict::Marginal) => Verdict::Marginal,
            _ => Verdict::Stable,
        });
    Ok(Criteria { s1, s2, s3, verdict })
}

/// Eigenvalues and their maximum real part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub abscissa: f64,
    pub verdict: Verdict,
}

/// All eigenvalues via a real Schur decomposition.
pub fn eigen_stable(m: &DriftMatrix) -> Result<Spectrum> {
    if m.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParam {
            field: "drift_matrix",
            reason: "non-finite entry".into(),
        });
    }
    let schur = m.0.clone().try_schur(f64::EPSILON, 10_000).ok_or(Error::EigenNotConverged { dim: m.dim() })?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let abscissa = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum {
        eigenvalues,
        abscissa,
        verdict: Verdict::from_abscissa(abscissa),
    })
}

/// Closed-form values next to the eigenvalue verdict of the six-mode matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `None` away from optimal detuning.
    pub criteria: Option<Criteria>,
    /// `None` for blue detuning.
    pub rh_qc: Option<(f64, Verdict)>,
    pub qc: Spectrum,
    pub full: Spectrum,
}

impl StabilityReport {
    pub fn compute(p: &SystemParams) -> Result<Self> {
        Ok(Self {
            criteria: full_criteria(p).ok(),
            rh_qc: routh_hurwitz_qc(p).ok(),
            qc: eigen_stable(&drift_matrix_qc(p))?,
            full: eigen_stable(&drift_matrix_full(p))?,
        })
    }

    /// Analytic and eigenvalue verdicts disagree where the analytic form applies.
    /// Closed forms are only compared at `gamma_m = 0`.
    pub fn disagrees(&self, p: &SystemParams) -> bool {
        if p.gamma_m != 0.0 {
            return false;
        }
        let full = self.criteria.is_some_and(|c| c.verdict.conflicts(self.full.verdict));
        let qc = self.rh_qc.is_some_and(|(_, v)| v.conflicts(self.qc.verdict));
        full || qc
    }
}

/// Second axis of a stability map; the first is always `g_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapAxis {
    GA,
    DeltaA,
}

impl MapAxis {
    pub fn name(&self) -> &'static str {
        match self {
            MapAxis::GA => "g_a",
            MapAxis::DeltaA => "delta_a",
        }
    }

    fn apply(&self, p: SystemParams, value: f64) -> SystemParams {
        match self {
            MapAxis::GA => p.with_g_a(value),
            MapAxis::DeltaA => p.with_delta_a(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    pub g_c: f64,
    pub y: f64,
    pub report: StabilityReport,
    pub disagree: bool,
}

/// Stability raster over `g_c x axis`, row-major with `g_c` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub axis: MapAxis,
    pub cells: Vec<MapCell>,
}

impl StabilityMap {
    pub fn compute(p: &SystemParams, g_c: &[f64], axis: MapAxis, ys: &[f64]) -> Result<Self> {
        p.validate()?;
        if g_c.is_empty() || ys.is_empty() {
            return Err(Error::Grid("stability map needs a non-empty grid".into()));
        }
        let cells = (0..g_c.len() * ys.len())
            .into_par_iter()
            .map(|idx| {
                let (gc, y) = (g_c[idx / ys.len()], ys[idx % ys.len()]);
                let q = axis.apply(p.with_g_c(gc), y);
                let report = StabilityReport::compute(&q)?;
                let disagree = report.disagrees(&q);
                Ok(MapCell { g_c: gc, y, report, disagree })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axis, cells })
    }

    pub fn disagreements(&self) -> usize {
        self.cells.iter().filter(|c| c.disagree).count()
    }

    pub fn header(&self) -> String {
        format!(
            "g_c,{},s1,s2,s3,analytic_verdict,rh_qc,rh_verdict,abscissa_qc,verdict_qc,abscissa,eigen_verdict,disagree",
            self.axis.name()
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.header())?;
        for c in &self.cells {
            let r = &c.report;
            let (s1, s2, s3, av) = match r.criteria {
                Some(k) => (k.s1, k.s2, k.s3, k.verdict.as_str()),
                None => (f64::NAN, f64::NAN, f64::NAN, "n/a"),
            };
            let (rh, rv) = match r.rh_qc {
                Some((v, verdict)) => (v, verdict.as_str()),
                None => (f64::NAN, "n/a"),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_num(c.g_c),
                fmt_num(c.y),
                fmt_num(s1),
                fmt_num(s2),
                fmt_num(s3),
                av,
                fmt_num(rh),
                rv,
                fmt_num(r.qc.abscissa),
                r.qc.verdict,
                fmt_num(r.full.abscissa),
                r.full.verdict,
                u8::from(c.disagree)
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        use crate::bath::json_num;
        let rows = self
            .cells
            .iter()
            .map(|c| {
                let r = &c.report;
                let crit = r.criteria;
                serde_json::json!({
                    "g_c": json_num(c.g_c),
                    self.axis.name(): json_num(c.y),
                    "s1": crit.map_or(serde_json::Value::Null, |k| json_num(k.s1)),
                    "s2": crit.map_or(serde_json::Value::Null, |k| json_num(k.s2)),
                    "s3": crit.map_or(serde_json::Value::Null, |k| json_num(k.s3)),
                    "analytic_verdict": crit.map_or("n/a", |k| k.verdict.as_str()),
                    "rh_qc": r.rh_qc.map_or(serde_json::Value::Null, |(v, _)| json_num(v)),
                    "rh_verdict": r.rh_qc.map_or("n/a", |(_, v)| v.as_str()),
                    "abscissa_qc": json_num(r.qc.abscissa),
                    "verdict_qc": r.qc.verdict.as_str(),
                    "abscissa": json_num(r.full.abscissa),
                    "eigen_verdict": r.full.verdict.as_str(),
                    "disagree": u8::from(c.disagree),
                })
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Bisects the switch of `f` between `lo`, where it holds, and `hi`, where it
/// does not. `lo > hi` is allowed.
pub fn bisect_boundary(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<bool>, tol: f64) -> Result<f64> {
    if !f(lo)? || f(hi)? {
        return Err(Error::Grid(format!("no boundary bracketed in [{lo}, {hi}]")));
    }
    while (hi - lo).abs() > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
