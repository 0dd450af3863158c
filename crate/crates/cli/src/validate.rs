//! Cross-checks between closed forms and brute-force oracles for one
//! parameter set, collected into a JSON report.

use std::io::Write;

use clap::Args;
use optobath::bath::{beta_eff, beta_eff_low, beta_opt, coth_form, default_grid, eta_eff, eta_opt, g_c_max, lin_grid};
use optobath::oracle::{
    c_qq_total, correlation_series, langevin_trajectory, lyapunov_covariance, max_time_step, spectral_representation,
    spectrum_from_correlation, Contribution, LangevinConfig, SeriesSpec,
};
use optobath::quad::QuadConfig;
use optobath::rates::{gamma_rates, occupation, occupation_with_loss, s_qq};
use optobath::stability::{
    bisect_boundary, drift_matrix_full, drift_matrix_qc, eigen_stable, full_criteria, routh_hurwitz_qc, Verdict,
};
use optobath::{Error, SystemParams};
use serde::Serialize;

use crate::commands::open_output;
use crate::config::{CliResult, CommonArgs, RunConfig};

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Monte Carlo ensemble size.
    #[arg(long, default_value_t = 1000)]
    pub trajectories: usize,
    /// Length of each trajectory.
    #[arg(long, default_value_t = 200.0)]
    pub duration: f64,
    /// Time step (default: the smaller of 0.002 and the admissible maximum).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub skip_langevin: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    /// Worst observed deviation (relative unless noted in `detail`).
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measured(name: &'static str, deviation: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: if deviation <= tolerance { Status::Pass } else { Status::Fail },
            deviation: Some(deviation),
            tolerance: Some(tolerance),
            detail: detail.into(),
        }
    }

    fn verdict(name: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            deviation: None,
            tolerance: None,
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skipped,
            deviation: None,
            tolerance: None,
            detail: reason.into(),
        }
    }

    fn errored(name: &'static str, e: Error) -> Self {
        Self {
            name,
            status: Status::Fail,
            deviation: None,
            tolerance: None,
            detail: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub params: SystemParams,
    pub passed: bool,
    pub failures: usize,
    pub skipped: usize,
    pub checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

// Runs `f` and turns a library error into a failing check.
fn guard(name: &'static str, f: impl FnOnce() -> Result<Check, Error>) -> Check {
    f().unwrap_or_else(|e| Check::errored(name, e))
}

/// Options for the stochastic check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub seed: u64,
    pub trajectories: usize,
    pub duration: f64,
    pub dt: Option<f64>,
    pub enabled: bool,
}

pub fn run_checks(p: &SystemParams, quad: &QuadConfig, mc: &MonteCarlo) -> Report {
    let mut checks = Vec::new();
    let red = p.delta_c < 0.0;
    let grid = lin_grid(0.01 * p.omega_m, 3.0 * p.omega_m, 100).expect("static grid");

    checks.push(if red {
        guard("beta_eff_low_limit", || {
            let w = 1e-6 * p.omega_m;
            let closed = beta_eff_low(p)?;
            Ok(Check::measured("beta_eff_low_limit", rel(beta_eff(w, p).value, closed), 1e-3, format!("closed form {closed:.6}")))
        })
    } else {
        Check::skipped("beta_eff_low_limit", "closed form requires delta_c < 0")
    });

    let thermal: Vec<f64> = default_grid(p).into_iter().filter(|&w| beta_eff(w, p).thermal).collect();
    checks.push(if thermal.is_empty() {
        Check::skipped("coth_identity", "no grid point has a positive effective temperature")
    } else {
        let worst = thermal
            .iter()
            .map(|&w| rel(1.0 / (0.5 * w * beta_eff(w, p).value).tanh(), coth_form(w, p)))
            .fold(0.0, f64::max);
        Check::measured("coth_identity", worst, 1e-10, format!("{} thermal grid points", thermal.len()))
    });

    checks.push(if p.g_a == 0.0 {
        Check::skipped("detailed_balance", "g_a = 0: all rates vanish")
    } else {
        guard("detailed_balance", || {
            let mut worst: f64 = 0.0;
            let mut used = 0;
            for &w in &grid {
                let r = gamma_rates(w, p)?;
                if r.thermal {
                    worst = worst.max(rel(r.gamma_minus / r.gamma_plus, (w * r.beta_eff).exp()));
                    used += 1;
                }
            }
            Ok(Check::measured("detailed_balance", worst, 1e-12, format!("{used} thermal points")))
        })
    });

    checks.push(guard("lossless_limit", || {
        let lossless = p.with_kappa_a(0.0);
        let mut mismatches = 0;
        let mut used = 0;
        for &w in &grid {
            match (occupation(w, &lossless), occupation_with_loss(w, &lossless)) {
                (Ok(a), Ok(b)) => {
                    used += 1;
                    if a.to_bits() != b.to_bits() {
                        mismatches += 1;
                    }
                }
                (Err(Error::NonEquilibrium { .. }), _) => {}
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        Ok(Check::verdict("lossless_limit", mismatches == 0, format!("{mismatches} of {used} points differ")))
    }));

    let cooled_limit = p.with_gamma_m(0.0);
    checks.push(if p.g_c == 0.0 {
        Check::skipped("reduction_beta_opt", "g_c = 0: no laser-cooling-dominated limit")
    } else {
        let worst = grid
            .iter()
            .map(|&w| rel(beta_eff(w, &cooled_limit).value, beta_opt(w, p)))
            .fold(0.0, f64::max);
        Check::measured("reduction_beta_opt", worst, 1e-12, "beta_eff(gamma_m = 0) vs beta_opt")
    });

    checks.push(match (eta_eff(&cooled_limit), eta_opt(p)) {
        (Ok(a), Ok(b)) => Check::measured("reduction_eta", rel(a, b), 1e-12, "eta_eff(gamma_m = 0) vs eta_opt"),
        (Err(e), _) | (_, Err(e)) => Check::skipped("reduction_eta", e.to_string()),
    });

    checks.push(if p.gamma_m == 0.0 {
        Check::skipped("reduction_bare", "gamma_m = 0: bare bath has no spectral weight")
    } else {
        let bare = p.with_g_c(0.0);
        let worst = grid.iter().map(|&w| rel(beta_eff(w, &bare).value, p.beta)).fold(0.0, f64::max);
        Check::measured("reduction_bare", worst, 1e-12, "beta_eff(g_c = 0) vs beta")
    });

    checks.push(if red {
        guard("threshold_g_c_max", || {
            let g_max = g_c_max(p)?;
            let found = bisect_boundary(0.0, 4.0 * g_max, |g| Ok(routh_hurwitz_qc(&p.with_g_c(g))?.0 > 0.0), 1e-15)?;
            Ok(Check::measured("threshold_g_c_max", rel(found, g_max), 1e-12, format!("g_c,max = {g_max:.12}")))
        })
    } else {
        Check::skipped("threshold_g_c_max", "threshold requires delta_c < 0")
    });

    checks.push(if red {
        guard("routh_hurwitz_vs_eigen", || {
            let (value, rh) = routh_hurwitz_qc(&cooled_limit)?;
            let eig = eigen_stable(&drift_matrix_qc(&cooled_limit))?;
            Ok(Check::verdict(
                "routh_hurwitz_vs_eigen",
                !rh.conflicts(eig.verdict),
                format!("criterion {value:.6e} ({rh}), abscissa {:.6e} ({})", eig.abscissa, eig.verdict),
            ))
        })
    } else {
        Check::skipped("routh_hurwitz_vs_eigen", "criterion applies to red detuning only")
    });

    checks.push(match full_criteria(&cooled_limit) {
        Ok(c) => guard("criteria_vs_eigen", || {
            let eig = eigen_stable(&drift_matrix_full(&cooled_limit))?;
            Ok(Check::verdict(
                "criteria_vs_eigen",
                !c.verdict.conflicts(eig.verdict),
                format!(
                    "s1 {:.4e}, s2 {:.4e}, s3 {:.4e} ({}); abscissa {:.4e} ({})",
                    c.s1, c.s2, c.s3, c.verdict, eig.abscissa, eig.verdict
                ),
            ))
        }),
        Err(e) => Check::skipped("criteria_vs_eigen", e.to_string()),
    });

    let stable_qc = eigen_stable(&drift_matrix_qc(p));
    let stable_limit = eigen_stable(&drift_matrix_qc(&cooled_limit));
    checks.push(match (&stable_limit, &stable_qc) {
        (Ok(a), Ok(b)) if a.verdict == Verdict::Stable && p.gamma_m > 0.0 => {
            Check::verdict("damping_keeps_stability", b.verdict == Verdict::Stable, format!("abscissa {:.6e}", b.abscissa))
        }
        (Ok(_), Ok(_)) => Check::skipped("damping_keeps_stability", "needs gamma_m > 0 and a stable undamped system"),
        (Err(e), _) | (_, Err(e)) => Check::errored("damping_keeps_stability", e.clone()),
    });

    let unstable_reason = |s: &Result<optobath::stability::Spectrum, Error>| match s {
        Ok(s) if s.verdict == Verdict::Stable => None,
        Ok(s) => Some(format!("system not stable (abscissa {:.4e}, {})", s.abscissa, s.verdict)),
        Err(e) => Some(e.to_string()),
    };

    checks.push(match unstable_reason(&stable_qc) {
        Some(reason) => Check::skipped("representation_equivalence", reason),
        None => {
            let name = "representation_equivalence";
            let mut worst: f64 = 0.0;
            let mut outcome = None;
            for t in [0.0, 0.5, 1.0, 5.0] {
                match (c_qq_total(t, p, quad), spectral_representation(t, p, quad)) {
                    (Ok(a), Ok(b)) => worst = worst.max((a.value - b.value).norm() / b.value.norm()),
                    (_, Err(Error::NonEquilibrium { .. })) => {
                        outcome = Some(Check::skipped(name, "effective temperature not positive on the whole axis"));
                        break;
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        outcome = Some(Check::errored(name, e));
                        break;
                    }
                }
            }
            outcome.unwrap_or_else(|| Check::measured(name, worst, 1e-3, "t = 0, 0.5, 1, 5"))
        }
    });

    checks.push(match (unstable_reason(&stable_qc), &stable_qc) {
        (Some(reason), _) => Check::skipped("spectrum_consistency", reason),
        (None, Ok(s)) if -s.abscissa * 200.0 < 25.0 => Check::skipped(
            "spectrum_consistency",
            format!("correlations decay too slowly (rate {:.3e}) for a t <= 200 window", -s.abscissa),
        ),
        _ => guard("spectrum_consistency", || {
            let series = correlation_series(p, Contribution::Total, &SeriesSpec::default())?;
            let mut worst: f64 = 0.0;
            for w in lin_grid(0.05 * p.omega_m, 2.0 * p.omega_m, 40)? {
                worst = worst.max(rel(spectrum_from_correlation(&series, w)?, s_qq(w, p)?));
            }
            Ok(Check::measured("spectrum_consistency", worst, 1e-2, "DFT of C_qq on t in [0, 200], dt = 0.01"))
        }),
    });

    let lyap = match unstable_reason(&stable_limit) {
        Some(reason) => Err(reason),
        None => lyapunov_covariance(&cooled_limit).map_err(|e| e.to_string()),
    };
    checks.push(match &lyap {
        Err(reason) => Check::skipped("lyapunov_variance", reason.clone()),
        Ok(v) => guard("lyapunov_variance", || {
            let spectral = spectral_representation(0.0, &cooled_limit, quad)?.value.re;
            let q2 = v.q_variance() * 2.0 * cooled_limit.q_zpf_sq();
            Ok(Check::measured("lyapunov_variance", rel(q2, spectral), 1e-3, format!("<Q^2> = {:.8}", v.q_variance())))
        }),
    });

    checks.push(match (&lyap, mc.enabled) {
        (_, false) => Check::skipped("langevin_vs_lyapunov", "disabled"),
        (Err(reason), _) => Check::skipped("langevin_vs_lyapunov", reason.clone()),
        (Ok(v), true) => guard("langevin_vs_lyapunov", || {
            let dt = mc.dt.unwrap_or_else(|| max_time_step(&cooled_limit).min(0.002));
            let cfg = LangevinConfig {
                seed: mc.seed,
                duration: mc.duration,
                dt,
                trajectories: mc.trajectories,
            };
            let m = langevin_trajectory(&cooled_limit, &cfg)?;
            let z = (m.mean[0][0] - v.q_variance()).abs() / m.stderr[0][0];
            Ok(Check::measured(
                "langevin_vs_lyapunov",
                z,
                3.0,
                format!(
                    "deviation in standard errors; <Q^2> = {:.6} +- {:.6} ({} trajectories, dt = {dt})",
                    m.mean[0][0], m.stderr[0][0], m.trajectories
                ),
            ))
        }),
    });

    let failures = checks.iter().filter(|c| c.status == Status::Fail).count();
    let skipped = checks.iter().filter(|c| c.status == Status::Skipped).count();
    Report {
        params: *p,
        passed: failures == 0,
        failures,
        skipped,
        checks,
    }
}

/// Writes the report and returns whether every check passed or was skipped.
pub fn validate(args: &ValidateArgs) -> CliResult<bool> {
    let cfg = RunConfig::resolve(&args.common)?;
    let p = cfg.single()?;
    let mc = MonteCarlo {
        seed: cfg.seed,
        trajectories: args.trajectories,
        duration: args.duration,
        dt: args.dt,
        enabled: !args.skip_langevin,
    };
    let report = run_checks(&p, &cfg.quad, &mc);
    let mut out = open_output(cfg.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(anyhow::Error::from)?;
    writeln!(out).and_then(|_| out.flush()).map_err(anyhow::Error::from)?;
    Ok(report.passed)
}
