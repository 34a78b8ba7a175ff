//! Small dense convex kernel: log-barrier path following with damped Newton
//! steps over real-parameterized Hermitian variables.
//!
//! Problems are stated as maximization of a smooth concave objective subject
//! to affine-PSD cones (log-det barrier), smooth concave scalar inequalities
//! `g(x) >= 0` (log barrier) and per-coordinate boxes. The barrier parameter
//! grows geometrically; each stage is solved by Newton's method with an
//! Armijo backtracking line search.

mod constraints;
mod herm;

pub use constraints::{
    AffineConstraint, AffineMatrixExpr, LinearObjective, LogAffineCombo,
    NegTraceInverseObjective, Objective, QuadDiag, QuadDiagObjective, Shifted, SmoothConstraint,
    SparseAffine, TraceInverseBound,
};
pub use herm::{param_count, Basis, HermBasis};

use crate::config::SolverOptions;
use crate::error::{Error, Result};
use crate::{real, CMatrix, RMatrix, RVector, Real};
use std::sync::Arc;

/// `lo <= x_i <= hi`.
#[derive(Debug, Clone, Copy)]
pub struct BoxBound<T> {
    pub index: usize,
    pub lo: T,
    pub hi: T,
}

/// Affine-PSD constraint `S(x) >= 0`.
#[derive(Debug, Clone)]
pub struct PsdConstraint<T> {
    pub expr: AffineMatrixExpr<T>,
}

/// A conic program over one flat real variable vector.
pub struct ConicProblem<'a, T: Real> {
    pub dim: usize,
    pub objective: Box<dyn Objective<T> + 'a>,
    pub psd: Vec<PsdConstraint<T>>,
    pub scalars: Vec<Box<dyn SmoothConstraint<T> + 'a>>,
    pub boxes: Vec<BoxBound<T>>,
    /// Strictly feasible starting point.
    pub initial: RVector<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub x: RVector<T>,
    pub objective: T,
    pub outer_iterations: usize,
    pub newton_iterations: usize,
    /// Duality-gap surrogate (total barrier degree over the final barrier
    /// parameter).
    pub kkt_residual: T,
    /// Worst constraint violation at the returned point (zero for an
    /// interior point).
    pub constraint_violation: T,
    /// Objective value at the end of each barrier stage.
    pub stage_objectives: Vec<T>,
    pub status: SolveStatus,
}

struct BarrierEval<T: Real> {
    phi: T,
}

/// Cholesky factorization that only succeeds for Hermitian positive-definite
/// input. nalgebra's complex Cholesky takes complex square roots of negative
/// pivots instead of failing, so the factor diagonal must be validated.
/// Returns the factorization together with `ln det`.
pub fn psd_cholesky<T: Real>(
    m: &CMatrix<T>,
) -> Option<(nalgebra::Cholesky<nalgebra::Complex<T>, nalgebra::Dyn>, T)> {
    let chol = m.clone().cholesky()?;
    let l = chol.l_dirty();
    let mut logdet = T::zero();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if d.re <= T::zero() || num_traits::Float::abs(d.im) > real::<T>(1e-12) * (T::one() + d.re)
        {
            return None;
        }
        logdet += num_traits::Float::ln(d.re);
    }
    Some((chol, logdet + logdet))
}

impl<'a, T: Real> ConicProblem<'a, T> {
    /// Total barrier degree: PSD dimensions plus scalar and box log terms.
    fn barrier_degree(&self) -> T {
        let mut m = 0usize;
        for p in &self.psd {
            m += p.expr.dim();
        }
        m += self.scalars.len();
        m += 2 * self.boxes.len();
        T::from_usize(m.max(1)).unwrap()
    }

    /// `Phi_t(x) = -t f(x) + phi(x)`, `None` outside the strict interior.
    fn barrier(&self, t: T, x: &RVector<T>) -> Option<BarrierEval<T>> {
        let f = self.objective.value(x)?;
        let mut phi = T::zero();
        for psd in &self.psd {
            let s = psd.expr.eval(x);
            let (_, logdet) = psd_cholesky(&s)?;
            phi -= logdet;
        }
        for c in &self.scalars {
            let g = c.value(x)?;
            if g <= T::zero() {
                return None;
            }
            phi -= num_traits::Float::ln(g);
        }
        for b in &self.boxes {
            let lo = x[b.index] - b.lo;
            let hi = b.hi - x[b.index];
            if lo <= T::zero() || hi <= T::zero() {
                return None;
            }
            phi -= num_traits::Float::ln(lo) + num_traits::Float::ln(hi);
        }
        Some(BarrierEval { phi: phi - t * f })
    }

    /// Gradient and Hessian of `Phi_t` at a strictly feasible `x`.
    fn barrier_derivatives(&self, t: T, x: &RVector<T>) -> (RVector<T>, RMatrix<T>) {
        let dim = self.dim;
        let mut grad = RVector::zeros(dim);
        let mut hess = RMatrix::zeros(dim, dim);

        self.objective.grad(x, &mut grad);
        grad *= -t;
        self.objective.add_hess(x, -t, &mut hess);

        for psd in &self.psd {
            let expr = &psd.expr;
            let s = expr.eval(x);
            let m = psd_cholesky(&s)
                .expect("barrier derivatives outside domain")
                .0
                .inverse();
            // grad(-logdet) = -tr(S^{-1} dS)
            expr.add_trace_grad(&m, -T::one(), &mut grad);
            add_logdet_hessian(expr, &m, &mut hess);
        }

        let mut g_buf = RVector::zeros(dim);
        for c in &self.scalars {
            let g = c.value(x).expect("barrier derivatives outside domain");
            c.grad(x, &mut g_buf);
            let inv_g = T::one() / g;
            // grad(-ln g) = -grad g / g
            grad.axpy(-inv_g, &g_buf, T::one());
            // hess(-ln g) = g g^T / g^2 - hess g / g
            hess.ger(inv_g * inv_g, &g_buf, &g_buf, T::one());
            c.add_hess(x, -inv_g, &mut hess);
        }

        for b in &self.boxes {
            let lo = x[b.index] - b.lo;
            let hi = b.hi - x[b.index];
            grad[b.index] += T::one() / hi - T::one() / lo;
            hess[(b.index, b.index)] += T::one() / (lo * lo) + T::one() / (hi * hi);
        }
        (grad, hess)
    }

    /// Smallest signed margin over all constraints (negative when violated,
    /// `-inf` when outside a domain of definition), plus a description of
    /// the binding constraint. `+inf` for an unconstrained problem.
    pub fn min_margin(&self, x: &RVector<T>) -> (T, String) {
        let mut worst = T::infinity();
        let mut what = String::from("unconstrained");
        let mut consider = |m: T, label: &str| {
            if m < worst {
                worst = m;
                what = label.to_string();
            }
        };
        for (i, psd) in self.psd.iter().enumerate() {
            let s = psd.expr.eval(x);
            let min_eig = s
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(T::infinity(), num_traits::Float::min);
            consider(min_eig, &format!("psd[{i}]"));
        }
        for (i, c) in self.scalars.iter().enumerate() {
            match c.value(x) {
                Some(g) => consider(g, &format!("scalar[{i}]")),
                None => consider(T::neg_infinity(), &format!("scalar[{i}] out of domain")),
            }
        }
        for b in &self.boxes {
            consider(x[b.index] - b.lo, &format!("box[{}] lower", b.index));
            consider(b.hi - x[b.index], &format!("box[{}] upper", b.index));
        }
        (worst, what)
    }

    /// Worst violation over all constraints (0 when feasible).
    pub fn worst_violation(&self, x: &RVector<T>) -> (T, String) {
        let (m, what) = self.min_margin(x);
        (num_traits::Float::max(-m, T::zero()), what)
    }

    /// Smallest margin over all constraints at `x` (negative when violated).
    pub fn slater_margin(&self, x: &RVector<T>) -> T {
        self.min_margin(x).0
    }
}

fn add_logdet_hessian<T: Real>(expr: &AffineMatrixExpr<T>, m: &CMatrix<T>, hess: &mut RMatrix<T>) {
    let basis = &expr.basis;
    let n2 = basis.len();
    // hess(-logdet)[p,q] = tr(S^{-1} E_p S^{-1} E_q)
    for (ai, &(off_a, sa)) in expr.blocks.iter().enumerate() {
        for &(off_b, sb) in expr.blocks.iter().skip(ai) {
            let sign = sa * sb;
            if off_a == off_b {
                for p in 0..n2 {
                    for q in p..n2 {
                        let v = sign * basis.trace_sandwich(m, p, m, q);
                        hess[(off_a + p, off_b + q)] += v;
                        if p != q {
                            hess[(off_a + q, off_b + p)] += v;
                        }
                    }
                }
            } else {
                for p in 0..n2 {
                    for q in 0..n2 {
                        let v = sign * basis.trace_sandwich(m, p, m, q);
                        hess[(off_a + p, off_b + q)] += v;
                        hess[(off_b + q, off_a + p)] += v;
                    }
                }
            }
        }
    }
    if !expr.identities.is_empty() {
        let m2 = m * m;
        let tr_m2 = (0..m.nrows()).fold(T::zero(), |a, i| a + m2[(i, i)].re);
        for &(ia, sa) in &expr.identities {
            // identity-identity coupling
            for &(ib, sb) in &expr.identities {
                hess[(ia, ib)] += sa * sb * tr_m2;
            }
            // identity-block coupling: tr(S^{-1} I S^{-1} E_q) = tr(S^{-2} E_q)
            for &(off_b, sb) in &expr.blocks {
                for q in 0..basis.len() {
                    let v = sa * sb * basis.trace_with(&m2, q);
                    hess[(ia, off_b + q)] += v;
                    hess[(off_b + q, ia)] += v;
                }
            }
        }
    }
}

/// Validates that the problem's initial point is strictly feasible (Slater
/// margin at least `1e-8`); when it is not, runs a phase-I violation
/// minimization and returns its strictly feasible point, or
/// [`Error::Infeasible`] when no strict interior exists.
pub fn feasibility_init<T: Real>(
    problem: &ConicProblem<'_, T>,
    opts: &SolverOptions<T>,
) -> Result<RVector<T>> {
    let margin_target = real::<T>(1e-8);
    if problem.slater_margin(&problem.initial) >= margin_target {
        return Ok(problem.initial.clone());
    }
    phase_one(problem, opts)
}

fn phase_one<T: Real>(problem: &ConicProblem<'_, T>, opts: &SolverOptions<T>) -> Result<RVector<T>> {
    let dim = problem.dim;
    let s_idx = dim;

    // slack start: one above the worst violation; every softened constraint
    // is then strictly satisfied
    let (violation, worst_label) = problem.worst_violation(&problem.initial);
    if !num_traits::Float::is_finite(violation) {
        return Err(Error::Infeasible(format!(
            "initial point outside constraint domain ({worst_label})"
        )));
    }
    let s0 = violation + T::one();

    let mut initial = RVector::zeros(dim + 1);
    initial.rows_mut(0, dim).copy_from(&problem.initial);
    initial[s_idx] = s0;

    let psd = problem
        .psd
        .iter()
        .map(|p| {
            let mut expr = p.expr.clone();
            expr.identities.push((s_idx, T::one()));
            PsdConstraint { expr }
        })
        .collect();

    let scalars: Vec<Box<dyn SmoothConstraint<T> + '_>> = problem
        .scalars
        .iter()
        .map(|c| {
            Box::new(Shifted {
                inner: c.as_ref(),
                slack_index: s_idx,
            }) as Box<dyn SmoothConstraint<T> + '_>
        })
        .collect();

    let soft = ConicProblem {
        dim: dim + 1,
        objective: Box::new(LinearObjective(SparseAffine::new(
            vec![(s_idx, -T::one())],
            T::zero(),
        ))),
        psd,
        scalars,
        boxes: problem.boxes.clone(),
        initial,
    };

    let mut phase_opts = opts.clone();
    phase_opts.tol = real(1e-6);
    let report = solve_inner(&soft, &phase_opts)?;
    let s_final = report.x[s_idx];
    if s_final >= -real::<T>(1e-8) {
        return Err(Error::Infeasible(format!(
            "phase-I could not find a strict interior (residual violation {:?}, worst at start: {worst_label})",
            s_final
        )));
    }
    Ok(report.x.rows(0, dim).into_owned())
}

/// Solves the problem from its initial point.
///
/// The initial point must be strictly feasible; use [`feasibility_init`]
/// first when in doubt.
pub fn solve<T: Real>(
    problem: &ConicProblem<'_, T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    solve_inner(problem, opts)
}

fn solve_inner<T: Real>(
    problem: &ConicProblem<'_, T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    let mut x = problem.initial.clone();
    if problem.barrier(opts.t_init, &x).is_none() {
        let (v, what) = problem.worst_violation(&x);
        return Err(Error::Infeasible(format!(
            "initial point not strictly feasible (violation {:?} at {what})",
            v
        )));
    }

    let degree = problem.barrier_degree();
    let mut t = opts.t_init;
    let mut outer = 0usize;
    let mut newton_total = 0usize;
    let mut stage_objectives = Vec::new();
    let mut hit_cap;

    loop {
        let converged = newton_stage(problem, t, &mut x, opts, &mut newton_total);
        hit_cap = !converged;
        outer += 1;
        let obj = self_objective(problem, &x);
        stage_objectives.push(obj);
        if degree / t <= opts.tol {
            break;
        }
        t *= opts.barrier_mult;
        if outer > 60 {
            hit_cap = true;
            break;
        }
    }

    let (violation, _) = problem.worst_violation(&x);
    let status = if hit_cap {
        SolveStatus::MaxIterations
    } else {
        SolveStatus::Optimal
    };
    Ok(SolveReport {
        objective: self_objective(problem, &x),
        x,
        outer_iterations: outer,
        newton_iterations: newton_total,
        kkt_residual: degree / t,
        constraint_violation: num_traits::Float::max(violation, T::zero()),
        stage_objectives,
        status,
    })
}

fn self_objective<T: Real>(problem: &ConicProblem<'_, T>, x: &RVector<T>) -> T {
    problem.objective.value(x).unwrap_or_else(T::nan)
}

/// Damped Newton on `Phi_t`; returns false when the step cap was reached
/// before the decrement converged.
fn newton_stage<T: Real>(
    problem: &ConicProblem<'_, T>,
    t: T,
    x: &mut RVector<T>,
    opts: &SolverOptions<T>,
    newton_total: &mut usize,
) -> bool {
    let mut current = problem
        .barrier(t, x)
        .expect("newton stage entered with infeasible point");
    let mut stalled = 0usize;
    for _ in 0..opts.newton_max {
        *newton_total += 1;
        let (grad, mut hess) = problem.barrier_derivatives(t, x);

        let step = match solve_newton_system(&mut hess, &grad) {
            Some(s) => s,
            None => return true, // hessian numerically singular: accept point
        };
        let decrement = -grad.dot(&step);
        if decrement / (T::one() + T::one()) <= opts.newton_tol {
            return true;
        }

        // Armijo backtracking with feasibility filtering
        let mut alpha = T::one();
        let slope = grad.dot(&step);
        let mut accepted = false;
        for _ in 0..80 {
            let candidate = &*x + &step * alpha;
            if let Some(eval) = problem.barrier(t, &candidate) {
                if eval.phi <= current.phi + opts.armijo_c * alpha * slope {
                    let progress = current.phi - eval.phi;
                    if progress <= real::<T>(1e-14) * (T::one() + num_traits::Float::abs(current.phi))
                    {
                        stalled += 1;
                    } else {
                        stalled = 0;
                    }
                    *x = candidate;
                    current = eval;
                    accepted = true;
                    break;
                }
            }
            alpha *= opts.armijo_shrink;
        }
        if !accepted || stalled >= 3 {
            // no admissible or productive step left at this stage
            return true;
        }
    }
    false
}

fn solve_newton_system<T: Real>(hess: &mut RMatrix<T>, grad: &RVector<T>) -> Option<RVector<T>> {
    // symmetrize against accumulation drift
    let n = hess.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (hess[(i, j)] + hess[(j, i)]) / (T::one() + T::one());
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let max_diag = (0..n).fold(T::zero(), |a, i| {
        num_traits::Float::max(a, num_traits::Float::abs(hess[(i, i)]))
    });
    let mut ridge = T::zero();
    let base = real::<T>(1e-12) * (T::one() + max_diag);
    for attempt in 0..40 {
        let mut m = hess.clone();
        if ridge > T::zero() {
            for i in 0..n {
                m[(i, i)] += ridge;
            }
        }
        if let Some(chol) = nalgebra::Cholesky::new(m) {
            return Some(chol.solve(&(-grad)));
        }
        ridge = if attempt == 0 {
            base
        } else {
            ridge * real::<T>(10.0)
        };
    }
    None
}

/// Convenience: a problem with a single Hermitian matrix variable of
/// dimension `n` plus `extra` scalar variables appended after it.
pub fn single_block_layout(n: usize, extra: usize) -> (Arc<HermBasis>, usize) {
    let basis = Arc::new(HermBasis::new(n));
    let dim = basis.len() + extra;
    (basis, dim)
}
