//! Real parameterization of Hermitian matrices.
//!
//! An `n x n` Hermitian matrix maps to `n^2` real parameters: the `n` real
//! diagonal entries first, then for each pair `i < j` (row-major) the real
//! and imaginary parts of the upper-triangular entry.

use crate::{CMatrix, CVector, Cplx, Real};

/// Number of real parameters of an `n x n` Hermitian matrix.
pub fn param_count(n: usize) -> usize {
    n * n
}

/// Sparse description of one Hermitian basis matrix: at most two
/// `(row, col, coeff)` entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// `e_i e_i^H`
    Diag(usize),
    /// `e_i e_j^H + e_j e_i^H`
    OffRe(usize, usize),
    /// `j e_i e_j^H - j e_j e_i^H`
    OffIm(usize, usize),
}

impl Basis {
    /// The non-zero entries of the basis matrix.
    pub fn entries<T: Real>(&self) -> [(usize, usize, Cplx<T>); 2] {
        let one = Cplx::new(T::one(), T::zero());
        let j = Cplx::new(T::zero(), T::one());
        match *self {
            Basis::Diag(i) => [(i, i, one), (i, i, Cplx::new(T::zero(), T::zero()))],
            Basis::OffRe(i, k) => [(i, k, one), (k, i, one)],
            Basis::OffIm(i, k) => [(i, k, j), (k, i, -j)],
        }
    }

    pub fn entry_count(&self) -> usize {
        match self {
            Basis::Diag(_) => 1,
            _ => 2,
        }
    }
}

/// Ordered basis for the Hermitian matrices of one dimension.
#[derive(Debug, Clone)]
pub struct HermBasis {
    pub n: usize,
    basis: Vec<Basis>,
}

impl HermBasis {
    pub fn new(n: usize) -> Self {
        let mut basis = Vec::with_capacity(param_count(n));
        for i in 0..n {
            basis.push(Basis::Diag(i));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                basis.push(Basis::OffRe(i, j));
                basis.push(Basis::OffIm(i, j));
            }
        }
        Self { n, basis }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self, p: usize) -> Basis {
        self.basis[p]
    }

    /// Materializes parameters into a Hermitian matrix.
    pub fn to_matrix<T: Real>(&self, params: &[T]) -> CMatrix<T> {
        assert_eq!(params.len(), self.len());
        let mut m = CMatrix::zeros(self.n, self.n);
        self.add_to_matrix(params, T::one(), &mut m);
        m
    }

    /// Accumulates `scale * Herm(params)` into `out`.
    pub fn add_to_matrix<T: Real>(&self, params: &[T], scale: T, out: &mut CMatrix<T>) {
        let n = self.n;
        for i in 0..n {
            out[(i, i)] += Cplx::new(scale * params[i], T::zero());
        }
        let mut p = n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = Cplx::new(scale * params[p], scale * params[p + 1]);
                out[(i, j)] += v;
                out[(j, i)] += v.conj();
                p += 2;
            }
        }
    }

    /// Extracts the parameters of a Hermitian matrix (upper triangle read).
    pub fn to_params<T: Real>(&self, m: &CMatrix<T>, out: &mut [T]) {
        assert_eq!(out.len(), self.len());
        let n = self.n;
        for i in 0..n {
            out[i] = m[(i, i)].re;
        }
        let mut p = n;
        for i in 0..n {
            for j in (i + 1)..n {
                out[p] = m[(i, j)].re;
                out[p + 1] = m[(i, j)].im;
                p += 2;
            }
        }
    }

    /// Coefficients `c_p = tr(E_p v v^H)` such that
    /// `v^H Herm(x) v = sum_p c_p x_p` for any parameters `x`.
    pub fn quadform_coeffs<T: Real>(&self, v: &CVector<T>) -> Vec<T> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let two = T::one() + T::one();
        let mut c = vec![T::zero(); self.len()];
        for i in 0..n {
            c[i] = v[i].norm_sqr();
        }
        let mut p = n;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = v[i] * v[j].conj();
                c[p] = two * z.re;
                c[p + 1] = two * z.im;
                p += 2;
            }
        }
        c
    }

    /// `tr(M E_p)` for Hermitian `M`; real by construction.
    #[inline]
    pub fn trace_with<T: Real>(&self, m: &CMatrix<T>, p: usize) -> T {
        let two = T::one() + T::one();
        match self.basis[p] {
            Basis::Diag(i) => m[(i, i)].re,
            Basis::OffRe(i, j) => two * m[(i, j)].re,
            Basis::OffIm(i, j) => two * m[(i, j)].im,
        }
    }

    /// `Re tr(M1 E_p M2 E_q)` for Hermitian `M1`, `M2` (powers of the same
    /// matrix in practice).
    #[inline]
    pub fn trace_sandwich<T: Real>(
        &self,
        m1: &CMatrix<T>,
        p: usize,
        m2: &CMatrix<T>,
        q: usize,
    ) -> T {
        let ep = self.basis[p].entries::<T>();
        let eq = self.basis[q].entries::<T>();
        let np = self.basis[p].entry_count();
        let nq = self.basis[q].entry_count();
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (r1, c1, a) in ep.iter().take(np) {
            for (r2, c2, b) in eq.iter().take(nq) {
                // tr(M1 e_r1 e_c1^T M2 e_r2 e_c2^T) = M2[c1, r2] * M1[c2, r1]
                acc += *a * *b * m2[(*c1, *r2)] * m1[(*c2, *r1)];
            }
        }
        acc.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;
    use proptest::prelude::*;

    fn herm_from(params: &[f64], n: usize) -> CMatrix<f64> {
        HermBasis::new(n).to_matrix(params)
    }

    #[test]
    fn param_count_is_n_squared() {
        for n in 1..6 {
            assert_eq!(HermBasis::new(n).len(), n * n);
        }
    }

    #[test]
    fn basis_matrices_are_hermitian() {
        let b = HermBasis::new(3);
        for p in 0..b.len() {
            let mut params = vec![0.0; b.len()];
            params[p] = 1.0;
            let m = herm_from(&params, 3);
            assert!((&m - m.adjoint()).norm() < 1e-15);
        }
    }

    #[test]
    fn quadform_coeffs_match_direct_evaluation() {
        let b = HermBasis::new(3);
        let v = CVector::from_vec(vec![
            Complex::new(0.3, -0.4),
            Complex::new(-1.1, 0.2),
            Complex::new(0.5, 0.9),
        ]);
        let c = b.quadform_coeffs(&v);
        let params: Vec<f64> = (0..b.len()).map(|i| 0.1 * (i as f64) - 0.35).collect();
        let m = b.to_matrix(&params);
        let direct = (v.adjoint() * &m * &v)[(0, 0)].re;
        let linear: f64 = c.iter().zip(&params).map(|(a, b)| a * b).sum();
        assert!((direct - linear).abs() < 1e-12);
    }

    #[test]
    fn trace_formulas_match_materialized_products() {
        let b = HermBasis::new(3);
        let params: Vec<f64> = (0..9).map(|i| (i as f64 * 0.731).sin()).collect();
        let m = b.to_matrix(&params) + CMatrix::identity(3, 3) * Complex::new(3.0, 0.0);
        for p in 0..b.len() {
            let mut unit = vec![0.0; b.len()];
            unit[p] = 1.0;
            let ep = herm_from(&unit, 3);
            let expect = (&m * &ep).trace().re;
            assert!((b.trace_with(&m, p) - expect).abs() < 1e-12);
            for q in 0..b.len() {
                let mut unit_q = vec![0.0; b.len()];
                unit_q[q] = 1.0;
                let eq = herm_from(&unit_q, 3);
                let expect = (&m * &ep * &m * &eq).trace().re;
                let got = b.trace_sandwich(&m, p, &m, q);
                assert!(
                    (got - expect).abs() < 1e-10,
                    "p={p} q={q} got={got} expect={expect}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_exact(values in proptest::collection::vec(-10.0f64..10.0, 16)) {
            let b = HermBasis::new(4);
            let m = b.to_matrix(&values);
            let mut back = vec![0.0; 16];
            b.to_params(&m, &mut back);
            prop_assert_eq!(values, back);
        }
    }
}
