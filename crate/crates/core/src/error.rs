use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// The (dressed) inverse susceptibility vanished at a real frequency.
    #[error("susceptibility pole at omega = {omega}")]
    Pole { omega: f64 },

    #[error("{quantity} diverges: denominator {denominator:e} is zero")]
    Divergence {
        quantity: &'static str,
        denominator: f64,
    },

    #[error("a red-detuned cooling drive (delta_c < 0) is required, got delta_c = {delta_c}")]
    RedDetuningRequired { delta_c: f64 },

    #[error("analytic criteria need optimal detuning -delta_c = sqrt(3) kappa_c / 2 (relative mismatch {mismatch:e})")]
    OffOptimalDetuning { mismatch: f64 },

    #[error("no steady state: gamma_minus + kappa_a ({loss_side:e}) does not exceed gamma_plus ({gain_side:e})")]
    NoSteadyState { gain_side: f64, loss_side: f64 },

    /// Negative or undefined effective temperature; `raw` is the Bose
    /// expression evaluated anyway.
    #[error("no equilibrium occupation in the gain regime (raw Bose value {raw})")]
    NonEquilibrium { raw: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {achieved:e} > requested {requested:e}")]
    QuadratureNotConverged {
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("eigenvalue solver did not converge for a {dim}x{dim} matrix")]
    EigenNotConverged { dim: usize },

    #[error("system is not stable (spectral abscissa {abscissa:e})")]
    Unstable { abscissa: f64 },

    #[error("oracle not applicable: {0}")]
    OracleInvalid(String),

    #[error("trajectory {trajectory} diverged at t = {time}")]
    TrajectoryDiverged { trajectory: usize, time: f64 },

    #[error("empty or malformed grid: {0}")]
    Grid(String),
}
