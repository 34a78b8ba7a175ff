//! Constraint and objective callbacks for the interior-point kernel.
//!
//! Everything is expressed over one flat real parameter vector. Hermitian
//! matrix variables live in contiguous parameter blocks (see
//! [`super::herm::HermBasis`]); affine matrix expressions are signed sums of
//! such blocks plus a constant, which covers every cone constraint the block
//! optimizers generate.

use super::herm::HermBasis;
use crate::{CMatrix, RMatrix, RVector, Real};
use std::sync::Arc;

/// Sparse affine functional `c^T x + b`.
#[derive(Debug, Clone)]
pub struct SparseAffine<T> {
    pub terms: Vec<(usize, T)>,
    pub constant: T,
}

impl<T: Real> SparseAffine<T> {
    pub fn new(terms: Vec<(usize, T)>, constant: T) -> Self {
        Self { terms, constant }
    }

    pub fn constant(c: T) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn value(&self, x: &RVector<T>) -> T {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }

    /// `out += w * c`.
    pub fn add_scaled(&self, w: T, out: &mut RVector<T>) {
        for &(i, c) in &self.terms {
            out[i] += w * c;
        }
    }

    /// Appends a whole coefficient block starting at `offset`.
    pub fn push_block(&mut self, offset: usize, coeffs: &[T], scale: T) {
        for (i, &c) in coeffs.iter().enumerate() {
            if c != T::zero() {
                self.terms.push((offset + i, scale * c));
            }
        }
    }
}

/// Affine Hermitian-matrix-valued map
/// `S(x) = S_0 + sum_b sign_b Herm(x[block_b]) + sum_j sign_j x_j I`.
#[derive(Debug, Clone)]
pub struct AffineMatrixExpr<T> {
    pub basis: Arc<HermBasis>,
    pub constant: CMatrix<T>,
    /// `(parameter offset, sign)` of each Hermitian block.
    pub blocks: Vec<(usize, T)>,
    /// `(parameter index, sign)` of each scaled-identity term.
    pub identities: Vec<(usize, T)>,
}

impl<T: Real> AffineMatrixExpr<T> {
    pub fn from_blocks(basis: Arc<HermBasis>, blocks: Vec<(usize, T)>) -> Self {
        let n = basis.n;
        Self {
            basis,
            constant: CMatrix::zeros(n, n),
            blocks,
            identities: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.n
    }

    pub fn eval(&self, x: &RVector<T>) -> CMatrix<T> {
        let mut s = self.constant.clone();
        let n2 = self.basis.len();
        for &(off, sign) in &self.blocks {
            self.basis
                .add_to_matrix(&x.as_slice()[off..off + n2], sign, &mut s);
        }
        for &(idx, sign) in &self.identities {
            let v = sign * x[idx];
            for i in 0..self.basis.n {
                s[(i, i)] += nalgebra::Complex::new(v, T::zero());
            }
        }
        s
    }

    /// Accumulates `w * grad tr(M dS)` into `out` — the gradient pattern
    /// shared by the log-det barrier and the trace-inverse constraint.
    pub fn add_trace_grad(&self, m: &CMatrix<T>, w: T, out: &mut RVector<T>) {
        for &(off, sign) in &self.blocks {
            for p in 0..self.basis.len() {
                out[off + p] += w * sign * self.basis.trace_with(m, p);
            }
        }
        if !self.identities.is_empty() {
            let tr = (0..self.basis.n).fold(T::zero(), |a, i| a + m[(i, i)].re);
            for &(idx, sign) in &self.identities {
                out[idx] += w * sign * tr;
            }
        }
    }
}

/// Smooth scalar constraint `g(x) >= 0` with concave `g`.
pub trait SmoothConstraint<T: Real> {
    /// Margin `g(x)`; `None` when `x` is outside the domain of definition.
    fn value(&self, x: &RVector<T>) -> Option<T>;
    /// Writes the gradient (overwrites `out`). Only called where `value` is
    /// `Some`.
    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>);
    /// `out += w * hess g(x)`.
    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>);
}

/// Smooth concave objective to maximize.
pub trait Objective<T: Real> {
    fn value(&self, x: &RVector<T>) -> Option<T>;
    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>);
    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>);
}

/// Affine constraint `c^T x + b >= 0`.
#[derive(Debug, Clone)]
pub struct AffineConstraint<T>(pub SparseAffine<T>);

impl<T: Real> SmoothConstraint<T> for AffineConstraint<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        Some(self.0.value(x))
    }
    fn grad(&self, _x: &RVector<T>, out: &mut RVector<T>) {
        out.fill(T::zero());
        self.0.add_scaled(T::one(), out);
    }
    fn add_hess(&self, _x: &RVector<T>, _w: T, _out: &mut RMatrix<T>) {}
}

/// `g(x) = linear(x) + sum_j w_j ln(affine_j(x))`, concave for `w_j >= 0`.
#[derive(Debug, Clone)]
pub struct LogAffineCombo<T> {
    pub linear: SparseAffine<T>,
    pub logs: Vec<(T, SparseAffine<T>)>,
}

impl<T: Real> SmoothConstraint<T> for LogAffineCombo<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        let mut v = self.linear.value(x);
        for (w, aff) in &self.logs {
            let r = aff.value(x);
            if r <= T::zero() {
                return None;
            }
            v += *w * num_traits::Float::ln(r);
        }
        Some(v)
    }

    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>) {
        out.fill(T::zero());
        self.linear.add_scaled(T::one(), out);
        for (w, aff) in &self.logs {
            let r = aff.value(x);
            aff.add_scaled(*w / r, out);
        }
    }

    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>) {
        // hess = -sum_j w_j / r_j^2 a_j a_j^T
        for (wj, aff) in &self.logs {
            let r = aff.value(x);
            let scale = -w * *wj / (r * r);
            for &(i, ci) in &aff.terms {
                for &(j, cj) in &aff.terms {
                    out[(i, j)] += scale * ci * cj;
                }
            }
        }
    }
}

/// `g(x) = linear(x) + 1/2 sum_i d_i x_i^2`, concave for `d_i <= 0`.
#[derive(Debug, Clone)]
pub struct QuadDiag<T> {
    pub linear: SparseAffine<T>,
    pub diag: Vec<(usize, T)>,
}

impl<T: Real> QuadDiag<T> {
    fn eval(&self, x: &RVector<T>) -> T {
        let half = T::one() / (T::one() + T::one());
        self.diag
            .iter()
            .fold(self.linear.value(x), |acc, &(i, d)| {
                acc + half * d * x[i] * x[i]
            })
    }
}

impl<T: Real> SmoothConstraint<T> for QuadDiag<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        Some(self.eval(x))
    }
    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>) {
        out.fill(T::zero());
        self.linear.add_scaled(T::one(), out);
        for &(i, d) in &self.diag {
            out[i] += d * x[i];
        }
    }
    fn add_hess(&self, _x: &RVector<T>, w: T, out: &mut RMatrix<T>) {
        for &(i, d) in &self.diag {
            out[(i, i)] += w * d;
        }
    }
}

/// `g(x) = bound - tr(S(x)^{-1}) >= 0` on the interior `S(x) > 0`.
#[derive(Debug, Clone)]
pub struct TraceInverseBound<T> {
    pub expr: AffineMatrixExpr<T>,
    pub bound: T,
}

impl<T: Real> TraceInverseBound<T> {
    fn inverse(&self, x: &RVector<T>) -> Option<CMatrix<T>> {
        let s = self.expr.eval(x);
        super::psd_cholesky(&s).map(|(c, _)| c.inverse())
    }
}

impl<T: Real> SmoothConstraint<T> for TraceInverseBound<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        let m = self.inverse(x)?;
        let tr = (0..m.nrows()).fold(T::zero(), |a, i| a + m[(i, i)].re);
        Some(self.bound - tr)
    }

    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>) {
        let m = self.inverse(x).expect("grad called outside domain");
        let m2 = &m * &m;
        out.fill(T::zero());
        // d(-tr S^{-1}) = +tr(S^{-2} dS)
        self.expr.add_trace_grad(&m2, T::one(), out);
    }

    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>) {
        let m = self.inverse(x).expect("hess called outside domain");
        let m2 = &m * &m;
        let basis = &self.expr.basis;
        // hess g = -(tr(S^{-1} E_q S^{-2} E_p) + tr(S^{-2} E_q S^{-1} E_p))
        for &(off_a, sa) in &self.expr.blocks {
            for &(off_b, sb) in &self.expr.blocks {
                for p in 0..basis.len() {
                    for q in 0..basis.len() {
                        let h = basis.trace_sandwich(&m, q, &m2, p)
                            + basis.trace_sandwich(&m2, q, &m, p);
                        out[(off_a + p, off_b + q)] -= w * sa * sb * h;
                    }
                }
            }
        }
        debug_assert!(
            self.expr.identities.is_empty(),
            "identity terms unsupported in trace-inverse hessian"
        );
    }
}

/// Maximize `c^T x`.
#[derive(Debug, Clone)]
pub struct LinearObjective<T>(pub SparseAffine<T>);

impl<T: Real> Objective<T> for LinearObjective<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        Some(self.0.value(x))
    }
    fn grad(&self, _x: &RVector<T>, out: &mut RVector<T>) {
        out.fill(T::zero());
        self.0.add_scaled(T::one(), out);
    }
    fn add_hess(&self, _x: &RVector<T>, _w: T, _out: &mut RMatrix<T>) {}
}

/// Maximize a concave diagonal quadratic.
#[derive(Debug, Clone)]
pub struct QuadDiagObjective<T>(pub QuadDiag<T>);

impl<T: Real> Objective<T> for QuadDiagObjective<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        self.0.value(x)
    }
    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>) {
        SmoothConstraint::grad(&self.0, x, out)
    }
    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>) {
        SmoothConstraint::add_hess(&self.0, x, w, out)
    }
}

/// Maximize `-tr(S(x)^{-1})` (equivalently minimize the trace of the
/// inverse) on the interior `S(x) > 0`.
#[derive(Debug, Clone)]
pub struct NegTraceInverseObjective<T>(pub TraceInverseBound<T>);

impl<T: Real> NegTraceInverseObjective<T> {
    pub fn new(expr: AffineMatrixExpr<T>) -> Self {
        Self(TraceInverseBound {
            expr,
            bound: T::zero(),
        })
    }
}

impl<T: Real> Objective<T> for NegTraceInverseObjective<T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        self.0.value(x)
    }
    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>) {
        SmoothConstraint::grad(&self.0, x, out)
    }
    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>) {
        SmoothConstraint::add_hess(&self.0, x, w, out)
    }
}

/// Wraps a constraint as `g(x) + x_s >= 0` for phase-I softening.
pub struct Shifted<'a, T: Real> {
    pub inner: &'a dyn SmoothConstraint<T>,
    pub slack_index: usize,
}

impl<'a, T: Real> SmoothConstraint<T> for Shifted<'a, T> {
    fn value(&self, x: &RVector<T>) -> Option<T> {
        self.inner.value(x).map(|v| v + x[self.slack_index])
    }
    fn grad(&self, x: &RVector<T>, out: &mut RVector<T>) {
        self.inner.grad(x, out);
        out[self.slack_index] += T::one();
    }
    fn add_hess(&self, x: &RVector<T>, w: T, out: &mut RMatrix<T>) {
        self.inner.add_hess(x, w, out);
    }
}
