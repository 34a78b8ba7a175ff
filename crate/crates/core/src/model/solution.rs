//! Beamforming solutions: relaxed per-user covariances, recovered vectors
//! and the transmit covariance they add up to.

use crate::error::{Error, Result};
use crate::{real, CMatrix, CVector, Real};

/// Relaxed and (optionally) recovered beamformers for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution<T> {
    /// Relaxed per-user covariances, each `n_t x n_t` Hermitian PSD.
    pub user_covariances: Vec<CMatrix<T>>,
    /// Rank-one beamformers recovered by randomization, when available.
    pub beamformers: Option<Vec<CVector<T>>>,
    /// Total transmit covariance.
    pub r_x: CMatrix<T>,
}

impl<T: Real> BeamformingSolution<T> {
    pub fn new(user_covariances: Vec<CMatrix<T>>, r_x: CMatrix<T>) -> Self {
        Self {
            user_covariances,
            beamformers: None,
            r_x,
        }
    }

    pub fn n_t(&self) -> usize {
        self.r_x.nrows()
    }

    /// Sensing covariance `R_x - sum_k W_k`.
    pub fn sensing_covariance(&self) -> CMatrix<T> {
        let mut r_s = self.r_x.clone();
        for w in &self.user_covariances {
            r_s -= w;
        }
        r_s
    }

    /// Checks the structural invariants: Hermitian `R_x`, PSD ordering and
    /// the trace budget.
    pub fn validate(&self, power_budget: T) -> Result<()> {
        let n = self.n_t();
        for w in &self.user_covariances {
            if w.nrows() != n || w.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.nrows(),
                });
            }
        }
        let herm_gap = (&self.r_x - self.r_x.adjoint()).norm();
        if herm_gap > real(1e-10) {
            return Err(Error::Domain(format!(
                "transmit covariance not Hermitian (gap {herm_gap:?})"
            )));
        }
        let tol = real::<T>(-1e-8);
        if min_eigenvalue(&self.r_x) < tol {
            return Err(Error::Domain("transmit covariance not PSD".into()));
        }
        if min_eigenvalue(&self.sensing_covariance()) < tol {
            return Err(Error::Domain(
                "sensing covariance R_x - sum W_k not PSD".into(),
            ));
        }
        let trace = hermitian_trace(&self.r_x);
        if trace > power_budget + real(1e-8) {
            return Err(Error::Domain(format!(
                "transmit covariance trace {trace:?} exceeds budget {power_budget:?}"
            )));
        }
        Ok(())
    }
}

/// Real trace of a Hermitian matrix.
pub fn hermitian_trace<T: Real>(m: &CMatrix<T>) -> T {
    (0..m.nrows()).fold(T::zero(), |acc, i| acc + m[(i, i)].re)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &CMatrix<T>) -> T {
    let eig = m.clone().symmetric_eigenvalues();
    eig.iter().copied().fold(T::infinity(), |a, b| if b < a { b } else { a })
}

/// Total transmit covariance `sum_k W_k + R_s`.
pub fn transmit_covariance<T: Real>(
    user_covariances: &[CMatrix<T>],
    sensing: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    let n = sensing.nrows();
    if sensing.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sensing.ncols(),
        });
    }
    let mut r = sensing.clone();
    for w in user_covariances {
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.nrows(),
            });
        }
        r += w;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cidentity(n: usize) -> CMatrix<f64> {
        CMatrix::identity(n, n)
    }

    #[test]
    fn identity_sensing_only() {
        let r = transmit_covariance::<f64>(&[], &cidentity(3)).unwrap();
        assert_eq!(r, cidentity(3));
    }

    #[test]
    fn rank_one_user_only() {
        let w = CVector::from_vec(vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]);
        let w_mat = &w * w.adjoint();
        let r = transmit_covariance(&[w_mat], &CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(r[(0, 0)], Complex::new(1.0, 0.0));
        assert_eq!(r[(1, 1)], Complex::new(0.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = transmit_covariance::<f64>(&[cidentity(2)], &cidentity(3));
        assert!(r.is_err());
    }

    #[test]
    fn random_sum_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 4;
        let mut rand_psd = || {
            let a = CMatrix::<f64>::from_fn(n, n, |_, _| {
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            &a * a.adjoint()
        };
        let ws: Vec<CMatrix<f64>> = (0..3).map(|_| rand_psd()).collect();
        let rs = rand_psd();
        let r = transmit_covariance(&ws, &rs).unwrap();
        let mut oracle = CMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = rs[(i, j)];
                for w in &ws {
                    acc += w[(i, j)];
                }
                oracle[(i, j)] = acc;
            }
        }
        assert!((r - oracle).norm() < 1e-12);
    }

    #[test]
    fn validate_enforces_psd_ordering() {
        let w = cidentity(2) * Complex::new(2.0, 0.0);
        let sol = BeamformingSolution::new(vec![w], cidentity(2));
        // R_x - W = -I: not PSD
        assert!(sol.validate(10.0).is_err());
        let sol = BeamformingSolution::new(vec![cidentity(2) * Complex::new(0.5, 0.0)], cidentity(2));
        sol.validate(10.0).unwrap();
        // trace 2 > 1: budget violation
        assert!(sol.validate(1.0).is_err());
    }
}
