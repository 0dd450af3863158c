//! Numerics for a laser-cooled mechanical resonator used as an engineered
//! bath for photons: effective spectral density and temperature, photon
//! transition rates and grand-canonical occupation, dynamical stability, and
//! brute-force oracles (time-domain correlations, Lyapunov covariance,
//! Langevin trajectories) that cross-check every closed form.
//!
//! Units: hbar = k_B = M = 1, frequencies in units of the mechanical
//! frequency.

pub mod bath;
pub mod error;
pub mod msi;
pub mod oracle;
pub mod presets;
pub mod quad;
pub mod rates;
pub mod response;
pub mod stability;
pub mod units;

pub use error::{Error, Result};
pub use units::SystemParams;
