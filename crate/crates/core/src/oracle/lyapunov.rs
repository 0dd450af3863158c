use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::require_white_noise_stable;
use crate::error::{Error, Result};
use crate::stability::drift_matrix_qc;
use crate::units::SystemParams;

/// Largest residual `max |A V + V A^T + D|` accepted from the solver.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Steady-state second moments over `(Q, P, X_c, Y_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    pub entries: [[f64; 4]; 4],
    pub residual: f64,
}

impl CovarianceMatrix {
    /// `<Q^2>`; the mechanical displacement variance is `<q^2> = 2 q_zpf^2 <Q^2>`.
    pub fn q_variance(&self) -> f64 {
        self.entries[0][0]
    }
}

/// Vacuum optical input noise: `kappa_c / 2` on `X_c` and `Y_c`.
pub fn diffusion_matrix(p: &SystemParams) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 0.5 * p.kappa_c, 0.5 * p.kappa_c]))
}

/// Solves `A V + V A^T + D = 0` through the Kronecker-product linear system.
pub fn lyapunov_covariance(p: &SystemParams) -> Result<CovarianceMatrix> {
    require_white_noise_stable(p)?;
    let a = drift_matrix_qc(p).as_matrix().clone();
    let d = diffusion_matrix(p);
    let eye = DMatrix::<f64>::identity(4, 4);
    // column-major vec: vec(A V) = (I kron A) vec V, vec(V A^T) = (A kron I) vec V
    let k = eye.kronecker(&a) + a.kronecker(&eye);
    let rhs = DVector::from_iterator(16, d.iter().map(|x| -x));
    let v = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::OracleInvalid("singular Lyapunov operator".into()))?;
    let v = DMatrix::from_column_slice(4, 4, v.as_slice());
    let v = (&v + v.transpose()) * 0.5;
    let residual = (&a * &v + &v * a.transpose() + &d).amax();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::OracleInvalid(format!("Lyapunov residual {residual:e}")));
    }
    let mut entries = [[0.0; 4]; 4];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = v[(i, j)];
        }
    }
    Ok(CovarianceMatrix { entries, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{c_qq_total, spectral_representation};
    use crate::quad::QuadConfig;
    use approx::assert_relative_eq;

    fn cooled() -> SystemParams {
        SystemParams::default().with_gamma_m(0.0)
    }

    #[test]
    fn decoupled_cavity_is_vacuum() {
        // weak coupling: optical block within O(g_c^2) of vacuum
        let v = lyapunov_covariance(&cooled().with_g_c(1e-3)).unwrap();
        assert_relative_eq!(v.entries[2][2], 0.5, epsilon = 1e-5);
        assert_relative_eq!(v.entries[3][3], 0.5, epsilon = 1e-5);
    }

    #[test]
    fn covariance_contract() {
        let v = lyapunov_covariance(&cooled()).unwrap();
        assert!(v.residual < RESIDUAL_TOL);
        for i in 0..4 {
            assert!(v.entries[i][i] > 0.0);
            for j in 0..4 {
                assert_eq!(v.entries[i][j], v.entries[j][i]);
            }
        }
        assert_relative_eq!(v.q_variance(), 1.0992569002, max_relative = 1e-9);
    }

    #[test]
    fn variance_matches_spectral_integral() {
        let p = cooled();
        let v = lyapunov_covariance(&p).unwrap();
        let cfg = QuadConfig::default();
        let q2 = spectral_representation(0.0, &p, &cfg).unwrap().value.re;
        assert_relative_eq!(v.q_variance() * 2.0 * p.q_zpf_sq(), q2, max_relative = 1e-6);
        let direct = c_qq_total(0.0, &p, &cfg).unwrap().value.re;
        assert_relative_eq!(v.q_variance() * 2.0 * p.q_zpf_sq(), direct, max_relative = 1e-6);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(lyapunov_covariance(&SystemParams::default()), Err(Error::OracleInvalid(_))));
        assert!(matches!(lyapunov_covariance(&cooled().with_g_c(0.6)), Err(Error::Unstable { .. })));
        assert!(matches!(lyapunov_covariance(&cooled().with_g_c(0.0)), Err(Error::Unstable { .. })));
    }
}
