use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::require_white_noise_stable;
use crate::error::{Error, Result};
use crate::stability::drift_matrix_qc;
use crate::units::SystemParams;

/// Largest admissible Euler-Maruyama step, `0.01 / max(omega_m, kappa_c)`.
pub fn max_time_step(p: &SystemParams) -> f64 {
    0.01 / p.omega_m.max(p.kappa_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangevinConfig {
    /// Trajectory `i` uses a generator seeded with `seed + i`.
    pub seed: u64,
    /// Length of each trajectory; the first half is discarded.
    pub duration: f64,
    pub dt: f64,
    pub trajectories: usize,
}

/// Ensemble second moments over `(Q, P, X_c, Y_c)` with standard errors
/// across trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangevinMoments {
    pub mean: [[f64; 4]; 4],
    pub stderr: [[f64; 4]; 4],
    pub trajectories: usize,
    pub steps: usize,
}

fn run(a: &[[f64; 4]; 4], noise: f64, steps: usize, dt: f64, seed: u64, index: usize) -> Result<[[f64; 4]; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let burn = steps / 2;
    let mut x = [0.0f64; 4];
    let mut acc = [[0.0f64; 4]; 4];
    for k in 0..steps {
        let mut dx = [0.0f64; 4];
        for (i, row) in a.iter().enumerate() {
            dx[i] = (row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3]) * dt;
        }
        dx[2] += noise * rng.sample::<f64, _>(StandardNormal);
        dx[3] += noise * rng.sample::<f64, _>(StandardNormal);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        if k % 1024 == 0 && x.iter().any(|v| !(v.abs() < 1e12)) {
            return Err(Error::TrajectoryDiverged {
                trajectory: index,
                time: (k + 1) as f64 * dt,
            });
        }
        if k >= burn {
            for i in 0..4 {
                for j in i..4 {
                    acc[i][j] += x[i] * x[j];
                }
            }
        }
    }
    let n = (steps - burn) as f64;
    for i in 0..4 {
        for j in i..4 {
            acc[i][j] /= n;
            acc[j][i] = acc[i][j];
        }
    }
    Ok(acc)
}

/// Euler-Maruyama ensemble of the linearized mechanics and cooling cavity
/// driven by vacuum input noise. Results are independent of thread count.
pub fn langevin_trajectory(p: &SystemParams, cfg: &LangevinConfig) -> Result<LangevinMoments> {
    require_white_noise_stable(p)?;
    let limit = max_time_step(p);
    if !(cfg.dt > 0.0 && cfg.dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::InvalidParam {
            field: "dt",
            reason: format!("must lie in (0, {limit}]"),
        });
    }
    if cfg.trajectories < 2 {
        return Err(Error::InvalidParam {
            field: "trajectories",
            reason: "need at least 2 for a standard error".into(),
        });
    }
    let steps = (cfg.duration / cfg.dt).round() as usize;
    if steps < 2 {
        return Err(Error::InvalidParam {
            field: "duration",
            reason: "shorter than two steps".into(),
        });
    }
    let m = drift_matrix_qc(p);
    let mut a = [[0.0; 4]; 4];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m.get(i, j);
        }
    }
    let noise = (0.5 * p.kappa_c * cfg.dt).sqrt();
    let samples = (0..cfg.trajectories)
        .into_par_iter()
        .map(|i| run(&a, noise, steps, cfg.dt, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len() as f64;
    let mut mean = [[0.0; 4]; 4];
    let mut stderr = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mu = samples.iter().map(|s| s[i][j]).sum::<f64>() / n;
            let var = samples.iter().map(|s| (s[i][j] - mu).powi(2)).sum::<f64>() / (n - 1.0);
            mean[i][j] = mu;
            stderr[i][j] = (var / n).sqrt();
        }
    }
    Ok(LangevinMoments {
        mean,
        stderr,
        trajectories: cfg.trajectories,
        steps,
    })
}
