//! Brute-force cross-checks for the closed forms: time-domain correlation
//! functions, the steady-state covariance of the linearized dynamics, and
//! stochastic trajectories.
//!
//! The covariance and trajectory routes model white optical input noise only
//! and therefore apply at `gamma_m = 0`.

mod correlation;
mod langevin;
mod lyapunov;

pub use correlation::{
    c_qq_optical, c_qq_thermal, c_qq_total, correlation_series, spectral_representation, spectrum_from_correlation,
    Contribution, CorrValue, CorrelationSeries, SeriesSpec,
};
pub use langevin::{langevin_trajectory, max_time_step, LangevinConfig, LangevinMoments};
pub use lyapunov::{diffusion_matrix, lyapunov_covariance, CovarianceMatrix};

use crate::error::{Error, Result};
use crate::stability::{drift_matrix_qc, eigen_stable, Verdict};
use crate::units::SystemParams;

/// Shared precondition of the white-noise oracles.
pub(crate) fn require_white_noise_stable(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.gamma_m != 0.0 {
        return Err(Error::OracleInvalid(format!(
            "white-noise oracle needs gamma_m = 0, got {}",
            p.gamma_m
        )));
    }
    let s = eigen_stable(&drift_matrix_qc(p))?;
    if s.verdict != Verdict::Stable {
        return Err(Error::Unstable { abscissa: s.abscissa });
    }
    Ok(())
}
