//! Max-min secrecy beamforming by successive convex approximation over
//! relaxed per-user covariances, plus Gaussian-randomization recovery of
//! rank-one beamformers.
//!
//! Each epoch maximizes a level variable `zeta` subject to, for every
//! (user, target) pair, a concave surrogate of the secrecy margin in which
//! the two convex log terms are replaced by their first-order expansions at
//! the incumbent. Power, estimation-bound and PSD-ordering constraints are
//! passed straight to the interior-point kernel.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{hermitian_trace, BeamformingSolution, ChannelSet};
use crate::solver::{
    feasibility_init, solve, AffineConstraint, AffineMatrixExpr, ConicProblem, HermBasis,
    LinearObjective, LogAffineCombo, PsdConstraint, SmoothConstraint, SolveReport, SparseAffine,
    TraceInverseBound,
};
use crate::{real, CMatrix, CVector, Cplx, RVector, Real};
use rand::Rng;
use std::sync::Arc;

/// Incumbent of the successive convex approximation.
#[derive(Debug, Clone)]
pub struct ScaState<T> {
    pub epoch: usize,
    pub user_covariances: Vec<CMatrix<T>>,
    pub r_x: CMatrix<T>,
    /// Worst-case pair margin at the incumbent, bits (unclamped).
    pub zeta: T,
    pub converged: bool,
}

/// Expansion constants of the two linearized log terms, per user and per
/// (target, user) pair.
#[derive(Debug, Clone)]
pub struct LogLinearization<T> {
    /// Per-user residual-plus-noise constant.
    pub b_e: Vec<T>,
    /// Per-(target, user) total-power constant, indexed `[target][user]`.
    pub d_e: Vec<Vec<T>>,
}

/// Tangent of `log2` at `at`, evaluated at `value`: exact at the expansion
/// point and an upper bound everywhere else.
pub fn log2_tangent<T: Real>(value: T, at: T) -> T {
    num_traits::Float::log2(at) + (value - at) / (at * num_traits::Float::ln(real::<T>(2.0)))
}

fn quad<T: Real>(h: &CVector<T>, m: &CMatrix<T>) -> T {
    (h.adjoint() * m * h)[(0, 0)].re
}

/// First-order expansion constants at the incumbent. Fails when an
/// expansion constant is not strictly positive.
pub fn linearize_logs<T: Real>(
    state: &ScaState<T>,
    channels: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<LogLinearization<T>> {
    let mut b_e = Vec::with_capacity(channels.users.len());
    for (k, h) in channels.users.iter().enumerate() {
        let b = quad(h, &state.r_x) - quad(h, &state.user_covariances[k]) + cfg.sigma_c2;
        if b <= T::zero() {
            return Err(Error::Domain(format!(
                "non-positive expansion constant B for user {k}"
            )));
        }
        b_e.push(b);
    }
    let mut d_e = Vec::with_capacity(channels.targets.len());
    for (l, h_l) in channels.targets.iter().enumerate() {
        let mut row = Vec::with_capacity(channels.users.len());
        for _k in 0..channels.users.len() {
            let d = quad(h_l, &state.r_x) + cfg.sigma_c2;
            if d <= T::zero() {
                return Err(Error::Domain(format!(
                    "non-positive expansion constant D for target {l}"
                )));
            }
            row.push(d);
        }
        d_e.push(row);
    }
    Ok(LogLinearization { b_e, d_e })
}

/// Secrecy margin `R_k - R_{l|k}` of one pair in bits, evaluated directly
/// from covariances. `weight_bits` is `iota / (rho_k ln 2)`.
pub fn pair_margin<T: Real>(
    h_k: &CVector<T>,
    h_l: &CVector<T>,
    w_k: &CMatrix<T>,
    r_x: &CMatrix<T>,
    sigma: T,
    weight_bits: T,
) -> T {
    let a = quad(h_k, r_x) + sigma;
    let b = a - quad(h_k, w_k);
    let c = quad(h_l, r_x) - quad(h_l, w_k) + sigma;
    let d = quad(h_l, r_x) + sigma;
    weight_bits
        * (num_traits::Float::ln(a) - num_traits::Float::ln(b) + num_traits::Float::ln(c)
            - num_traits::Float::ln(d))
}

/// Worst-case pair margin `min_{k,l} (R_k - R_{l|k})` in bits.
pub fn min_pair_margin<T: Real>(
    user_covariances: &[CMatrix<T>],
    r_x: &CMatrix<T>,
    channels: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
) -> T {
    let ln2 = num_traits::Float::ln(real::<T>(2.0));
    let mut worst = T::infinity();
    for (k, h_k) in channels.users.iter().enumerate() {
        let w = cfg.iota / (rho[k] * ln2);
        for h_l in &channels.targets {
            let m = pair_margin(h_k, h_l, &user_covariances[k], r_x, cfg.sigma_c2, w);
            if m < worst {
                worst = m;
            }
        }
    }
    worst
}

/// Isotropic covariance split: half the available power shared equally by
/// the user covariances, the rest (short of a sliver kept for strictness)
/// to sensing.
pub fn isotropic_split<T: Real>(
    n_t: usize,
    users: usize,
    p_avail: T,
) -> (Vec<CMatrix<T>>, CMatrix<T>) {
    let n = T::from_usize(n_t).unwrap();
    let k = T::from_usize(users.max(1)).unwrap();
    let two = real::<T>(2.0);
    let per_user = p_avail / (two * k * n);
    let w: Vec<CMatrix<T>> = (0..users)
        .map(|_| CMatrix::identity(n_t, n_t) * Cplx::new(per_user, T::zero()))
        .collect();
    let r_x = CMatrix::identity(n_t, n_t) * Cplx::new(real::<T>(0.999) * p_avail / n, T::zero());
    (w, r_x)
}

struct SdrLayout {
    basis: Arc<HermBasis>,
    users: usize,
    n2: usize,
}

impl SdrLayout {
    fn new(n_t: usize, users: usize) -> Self {
        let basis = Arc::new(HermBasis::new(n_t));
        let n2 = basis.len();
        Self { basis, users, n2 }
    }
    fn w_offset(&self, k: usize) -> usize {
        k * self.n2
    }
    fn rx_offset(&self) -> usize {
        self.users * self.n2
    }
    fn zeta_index(&self) -> usize {
        (self.users + 1) * self.n2
    }
    fn dim(&self) -> usize {
        (self.users + 1) * self.n2 + 1
    }
}

fn pack_state<T: Real>(layout: &SdrLayout, state: &ScaState<T>, zeta: T) -> RVector<T> {
    let mut x = RVector::zeros(layout.dim());
    for (k, w) in state.user_covariances.iter().enumerate() {
        let off = layout.w_offset(k);
        layout
            .basis
            .to_params(w, &mut x.as_mut_slice()[off..off + layout.n2]);
    }
    let off = layout.rx_offset();
    layout
        .basis
        .to_params(&state.r_x, &mut x.as_mut_slice()[off..off + layout.n2]);
    x[layout.zeta_index()] = zeta;
    x
}

fn unpack_state<T: Real>(layout: &SdrLayout, x: &RVector<T>) -> (Vec<CMatrix<T>>, CMatrix<T>, T) {
    let w = (0..layout.users)
        .map(|k| {
            let off = layout.w_offset(k);
            layout.basis.to_matrix(&x.as_slice()[off..off + layout.n2])
        })
        .collect();
    let off = layout.rx_offset();
    let r_x = layout.basis.to_matrix(&x.as_slice()[off..off + layout.n2]);
    (w, r_x, x[layout.zeta_index()])
}

/// Merges scaled affine forms into one, combining duplicate indices.
fn merge_affine<T: Real>(
    dim: usize,
    parts: &[(T, &SparseAffine<T>)],
    extra_constant: T,
) -> SparseAffine<T> {
    let mut dense = vec![T::zero(); dim];
    let mut constant = extra_constant;
    for (scale, aff) in parts {
        constant += *scale * aff.constant;
        for &(i, c) in &aff.terms {
            dense[i] += *scale * c;
        }
    }
    let terms = dense
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != T::zero())
        .collect();
    SparseAffine::new(terms, constant)
}

/// One surrogate epoch: maximizes the level variable under the linearized
/// secrecy constraints, the estimation bound, the power budget and the PSD
/// orderings. The returned state never has a lower worst-case margin than
/// the incumbent.
pub fn solve_sdr_epoch<T: Real>(
    state: &ScaState<T>,
    channels: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
    p_avail: T,
) -> Result<(ScaState<T>, SolveReport<T>)> {
    let users = channels.users.len();
    let targets = channels.targets.len();
    if rho.len() != users {
        return Err(Error::DimensionMismatch {
            expected: users,
            got: rho.len(),
        });
    }
    if targets == 0 {
        return Err(Error::EmptyTargets);
    }
    let n_t = channels.n_t();
    let layout = SdrLayout::new(n_t, users);
    let lin = linearize_logs(state, channels, cfg)?;
    let ln2 = num_traits::Float::ln(real::<T>(2.0));

    // channel quadratic-form coefficient blocks
    let qu: Vec<Vec<T>> = channels
        .users
        .iter()
        .map(|h| layout.basis.quadform_coeffs(h))
        .collect();
    let qt: Vec<Vec<T>> = channels
        .targets
        .iter()
        .map(|h| layout.basis.quadform_coeffs(h))
        .collect();

    let affine_from = |blocks: &[(usize, &Vec<T>, T)], constant: T| -> SparseAffine<T> {
        let mut aff = SparseAffine::new(Vec::new(), constant);
        for &(off, coeffs, scale) in blocks {
            aff.push_block(off, coeffs, scale);
        }
        aff
    };

    let mut scalars: Vec<Box<dyn SmoothConstraint<T>>> = Vec::new();

    for (k, qk) in qu.iter().enumerate() {
        let w_bits = cfg.iota / (rho[k] * ln2);
        let a_aff = affine_from(&[(layout.rx_offset(), qk, T::one())], cfg.sigma_c2);
        let b_aff = affine_from(
            &[
                (layout.rx_offset(), qk, T::one()),
                (layout.w_offset(k), qk, -T::one()),
            ],
            cfg.sigma_c2,
        );
        for (l, ql) in qt.iter().enumerate() {
            let c_aff = affine_from(
                &[
                    (layout.rx_offset(), ql, T::one()),
                    (layout.w_offset(k), ql, -T::one()),
                ],
                cfg.sigma_c2,
            );
            let d_aff = affine_from(&[(layout.rx_offset(), ql, T::one())], cfg.sigma_c2);

            let b_e = lin.b_e[k];
            let d_e = lin.d_e[l][k];
            let two = real::<T>(2.0);
            let base =
                w_bits * (two - num_traits::Float::ln(b_e) - num_traits::Float::ln(d_e));
            let mut linear = merge_affine(
                layout.dim(),
                &[(-w_bits / b_e, &b_aff), (-w_bits / d_e, &d_aff)],
                base,
            );
            linear.terms.push((layout.zeta_index(), -T::one()));

            scalars.push(Box::new(LogAffineCombo {
                linear,
                logs: vec![(w_bits, a_aff.clone()), (w_bits, c_aff)],
            }));
        }
    }

    // power budget: p_avail - tr(R_x) >= 0
    let power_terms: Vec<(usize, T)> = (0..n_t)
        .map(|i| (layout.rx_offset() + i, -T::one()))
        .collect();
    scalars.push(Box::new(AffineConstraint(SparseAffine::new(
        power_terms,
        p_avail,
    ))));

    // estimation bound: xi_norm - tr(R_x^{-1}) >= 0
    let rx_expr =
        AffineMatrixExpr::from_blocks(layout.basis.clone(), vec![(layout.rx_offset(), T::one())]);
    scalars.push(Box::new(TraceInverseBound {
        expr: rx_expr,
        bound: cfg.xi_norm,
    }));

    // PSD cones: each user covariance and the sensing remainder
    let mut psd = Vec::with_capacity(users + 1);
    for k in 0..users {
        psd.push(PsdConstraint {
            expr: AffineMatrixExpr::from_blocks(
                layout.basis.clone(),
                vec![(layout.w_offset(k), T::one())],
            ),
        });
    }
    let mut sensing_blocks = vec![(layout.rx_offset(), T::one())];
    for k in 0..users {
        sensing_blocks.push((layout.w_offset(k), -T::one()));
    }
    psd.push(PsdConstraint {
        expr: AffineMatrixExpr::from_blocks(layout.basis.clone(), sensing_blocks),
    });

    let incumbent_margin =
        min_pair_margin(&state.user_covariances, &state.r_x, channels, cfg, rho);
    let slack = num_traits::Float::max(
        real::<T>(1e-9),
        real::<T>(1e-3) * (T::one() + num_traits::Float::abs(incumbent_margin)),
    );
    let initial = pack_state(&layout, state, incumbent_margin - slack);

    let mut problem = ConicProblem {
        dim: layout.dim(),
        objective: Box::new(LinearObjective(SparseAffine::new(
            vec![(layout.zeta_index(), T::one())],
            T::zero(),
        ))),
        psd,
        scalars,
        boxes: vec![],
        initial,
    };

    let mut opts = cfg.solver.clone();
    if state.epoch > 0 {
        // the incumbent sits on the previous barrier's central path at its
        // final parameter; restarting there avoids crawling out of the
        // boundary region
        let degree =
            T::from_usize((users + 1) * n_t + problem.scalars.len()).unwrap();
        opts.t_init = num_traits::Float::max(degree / opts.tol / real(10.0), opts.t_init);
    }
    problem.initial = feasibility_init(&problem, &opts)?;
    let report = solve(&problem, &opts)?;

    let (w_new, rx_new, _zeta_var) = unpack_state(&layout, &report.x);
    let new_margin = min_pair_margin(&w_new, &rx_new, channels, cfg, rho);

    // monotone acceptance: keep the incumbent when the solver's point is
    // numerically worse
    if new_margin >= incumbent_margin - real(1e-12) {
        Ok((
            ScaState {
                epoch: state.epoch + 1,
                user_covariances: w_new,
                r_x: rx_new,
                zeta: new_margin,
                converged: false,
            },
            report,
        ))
    } else {
        Ok((
            ScaState {
                epoch: state.epoch + 1,
                user_covariances: state.user_covariances.clone(),
                r_x: state.r_x.clone(),
                zeta: incumbent_margin,
                converged: true,
            },
            report,
        ))
    }
}

/// Strictly feasible starting state from the isotropic split, or
/// [`Error::Infeasible`] when the estimation bound cannot be met at all.
pub fn initial_state<T: Real>(
    channels: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
    p_avail: T,
) -> Result<ScaState<T>> {
    let n_t = channels.n_t();
    if p_avail <= T::zero() {
        return Err(Error::Infeasible("no transmit power available".into()));
    }
    let n = T::from_usize(n_t).unwrap();
    let iso_best = n * n / p_avail;
    if cfg.xi_norm < iso_best / real(0.999) {
        return Err(Error::Infeasible(format!(
            "normalized estimation bound {:?} below the isotropic optimum {:?}",
            cfg.xi_norm, iso_best
        )));
    }
    let (w, r_x) = isotropic_split(n_t, channels.users.len(), p_avail);
    let zeta = min_pair_margin(&w, &r_x, channels, cfg, rho);
    Ok(ScaState {
        epoch: 0,
        user_covariances: w,
        r_x,
        zeta,
        converged: false,
    })
}

/// Runs surrogate epochs until the worst-case margin stalls.
pub fn optimize_beams<T: Real>(
    state0: ScaState<T>,
    channels: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
    p_avail: T,
) -> Result<ScaState<T>> {
    let mut state = state0;
    for _ in 0..cfg.loops.sca_max_epochs {
        let zeta_prev = state.zeta;
        let (next, _report) = solve_sdr_epoch(&state, channels, cfg, rho, p_avail)?;
        state = next;
        if state.converged
            || num_traits::Float::abs(state.zeta - zeta_prev) <= cfg.loops.sca_tol_bits
        {
            state.converged = true;
            return Ok(state);
        }
    }
    state.converged = true;
    Ok(state)
}

/// Recovered rank-one solution with its objective and the gap to the
/// relaxed bound.
#[derive(Debug, Clone)]
pub struct RecoveredSolution<T> {
    pub solution: BeamformingSolution<T>,
    /// Worst-case secrecy rate of the recovered solution, bits.
    pub objective: T,
    /// Worst-case secrecy rate of the relaxed solution, bits.
    pub sdr_objective: T,
    /// `sdr_objective - objective`.
    pub gap: T,
}

fn hermitian_sqrt<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut root = CMatrix::zeros(n, n);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > T::zero() {
            let s = num_traits::Float::sqrt(l);
            let v = eig.eigenvectors.column(i);
            root += (v * v.adjoint()).map(|e| e * Cplx::new(s, T::zero()));
        }
    }
    root
}

/// Clips negative eigenvalues to zero and rescales to the target trace.
fn repair_psd<T: Real>(m: &CMatrix<T>, target_trace: T) -> CMatrix<T> {
    let n = m.nrows();
    let half = Cplx::new(real::<T>(0.5), T::zero());
    let sym = (m + m.adjoint()).map(|e| e * half);
    if target_trace <= real(1e-15) {
        return CMatrix::zeros(n, n);
    }
    let eig = sym.symmetric_eigen();
    let mut clipped = CMatrix::zeros(n, n);
    let mut trace = T::zero();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > T::zero() {
            let v = eig.eigenvectors.column(i);
            clipped += (v * v.adjoint()).map(|e| e * Cplx::new(l, T::zero()));
            trace += l;
        }
    }
    if trace <= real(1e-15) {
        // nothing left after clipping: spread the power isotropically
        return CMatrix::identity(n, n)
            * Cplx::new(target_trace / T::from_usize(n).unwrap(), T::zero());
    }
    clipped * Cplx::new(target_trace / trace, T::zero())
}

/// Draws `trials` Gaussian candidates per user from the relaxed covariances,
/// repairs the sensing covariance and returns the feasible candidate set
/// with the best worst-case secrecy rate.
///
/// The principal-eigenvector set is always among the candidates, so a
/// relaxation that is already rank one is recovered exactly.
pub fn rank_one_recovery<T: Real>(
    state: &ScaState<T>,
    channels: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
    trials: usize,
    rng: &mut impl Rng,
) -> Result<RecoveredSolution<T>> {
    let n_t = channels.n_t();
    let users = channels.users.len();
    let relaxed = BeamformingSolution::new(state.user_covariances.clone(), state.r_x.clone());
    let sdr_report = metrics::evaluate(channels, &relaxed, cfg, rho)?;
    let sdr_objective = sdr_report.s_min;

    let traces: Vec<T> = state.user_covariances.iter().map(hermitian_trace).collect();
    let roots: Vec<CMatrix<T>> = state.user_covariances.iter().map(hermitian_sqrt).collect();
    let sensing_trace =
        hermitian_trace(&state.r_x) - traces.iter().copied().fold(T::zero(), |a, b| a + b);

    let principal: Vec<CVector<T>> = state
        .user_covariances
        .iter()
        .zip(&traces)
        .map(|(w, &tr)| {
            if tr <= real(1e-15) {
                return CVector::zeros(n_t);
            }
            let eig = w.clone().symmetric_eigen();
            let (best, _) = eig.eigenvalues.iter().enumerate().fold(
                (0usize, T::neg_infinity()),
                |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc },
            );
            let v = eig.eigenvectors.column(best).into_owned();
            v * Cplx::new(num_traits::Float::sqrt(tr), T::zero())
        })
        .collect();

    let mut candidates: Vec<Vec<CVector<T>>> = Vec::with_capacity(trials + 1);
    candidates.push(principal);
    let inv_sqrt2 = Cplx::new(real::<T>(std::f64::consts::FRAC_1_SQRT_2), T::zero());
    for _ in 0..trials {
        let set: Vec<CVector<T>> = (0..users)
            .map(|k| {
                if traces[k] <= real(1e-15) {
                    return CVector::zeros(n_t);
                }
                let g = CVector::from_fn(n_t, |_, _| {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    Cplx::new(real::<T>(re), real::<T>(im)) * inv_sqrt2
                });
                let w = &roots[k] * g;
                let norm2 = w.norm_squared();
                if norm2 <= real(1e-30) {
                    return CVector::zeros(n_t);
                }
                let scale = num_traits::Float::sqrt(traces[k] / norm2);
                w * Cplx::new(scale, T::zero())
            })
            .collect();
        candidates.push(set);
    }

    let crb_slack = real::<T>(1e-8);
    let beam_power = traces.iter().copied().fold(T::zero(), |a, b| a + b);
    let mut best: Option<(T, BeamformingSolution<T>)> = None;
    for set in candidates {
        let mut outer_base = CMatrix::<T>::zeros(n_t, n_t);
        for w in &set {
            outer_base += w * w.adjoint();
        }

        // feasibility ladder: first the clipped remainder as-is, then with
        // isotropic loading, then borrowing a sliver of beam power into the
        // sensing covariance so the total covariance regains full rank
        // tau = 1 degenerates to the relaxed covariance with zero
        // beamformers, which is always feasible, so the ladder cannot fail
        let mut accepted: Option<BeamformingSolution<T>> = None;
        'ladder: for tau_exp in [
            0f64, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0,
        ] {
            let tau = real::<T>(tau_exp);
            let keep = T::one() - tau;
            let outer_sum = outer_base.map(|e| e * Cplx::new(keep, T::zero()));
            let target_trace = sensing_trace + tau * beam_power;
            let raw_sensing = &state.r_x - &outer_sum;
            let mut repaired = repair_psd(&raw_sensing, target_trace);

            for blend_step in 0..=3 {
                let r_x_cand = &outer_sum + &repaired;
                if let Ok(norm) = metrics::crb_normalized(&r_x_cand) {
                    if norm <= cfg.xi_norm + crb_slack {
                        let scale = Cplx::new(num_traits::Float::sqrt(keep), T::zero());
                        let scaled: Vec<CVector<T>> =
                            set.iter().map(|w| w * scale).collect();
                        let w_mats: Vec<CMatrix<T>> =
                            scaled.iter().map(|w| w * w.adjoint()).collect();
                        let mut sol = BeamformingSolution::new(w_mats, r_x_cand);
                        sol.beamformers = Some(scaled);
                        accepted = Some(sol);
                        break 'ladder;
                    }
                }
                if blend_step == 3 || target_trace <= real(1e-15) {
                    break;
                }
                let iso = CMatrix::identity(n_t, n_t)
                    * Cplx::new(target_trace / T::from_usize(n_t).unwrap(), T::zero());
                let half = Cplx::new(real::<T>(0.5), T::zero());
                repaired = (&repaired + &iso).map(|e| e * half);
                let tr = hermitian_trace(&repaired);
                if tr > real(1e-15) {
                    repaired *= Cplx::new(target_trace / tr, T::zero());
                }
            }
        }
        let Some(sol) = accepted else {
            continue;
        };
        let report = metrics::evaluate(channels, &sol, cfg, rho)?;
        if best.as_ref().map_or(true, |(obj, _)| report.s_min > *obj) {
            best = Some((report.s_min, sol));
        }
    }

    let (objective, solution) = best.ok_or_else(|| {
        Error::Infeasible("no randomization candidate satisfied the estimation bound".into())
    })?;
    Ok(RecoveredSolution {
        solution,
        objective,
        sdr_objective,
        gap: sdr_objective - objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_channels;
    use crate::model::{ArrayGeometry, Scatterer, Scenario, TargetSpec};
    use nalgebra::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg(users: usize, targets: usize, n_tx: usize) -> SystemConfig<f64> {
        SystemConfig {
            users,
            targets,
            n_tx,
            n_rx: 3,
            frames: 4 * n_tx.max(4),
            scatterers: 2,
            xi_norm: 1e6,
            ..Default::default()
        }
    }

    fn seeded_channels(cfg: &SystemConfig<f64>, seed: u64) -> ChannelSet<f64> {
        let geo = ArrayGeometry::from_config(cfg).unwrap();
        let scenario = Scenario::draw(cfg, &mut ChaCha8Rng::seed_from_u64(seed));
        build_channels(cfg, &geo, &scenario).unwrap()
    }

    #[test]
    fn tangent_is_exact_at_point_and_above_elsewhere() {
        let at = 0.37f64;
        assert!((log2_tangent(at, at) - at.log2()).abs() < 1e-15);
        for v in [0.5 * at, 2.0 * at] {
            assert!(log2_tangent(v, at) >= v.log2());
        }
    }

    #[test]
    fn linearization_matches_quadratic_forms() {
        let cfg = small_cfg(2, 1, 3);
        let channels = seeded_channels(&cfg, 5);
        let state = initial_state(&channels, &cfg, &[1.0, 1.0], cfg.power_budget).unwrap();
        let lin = linearize_logs(&state, &channels, &cfg).unwrap();
        for (k, h) in channels.users.iter().enumerate() {
            let expect =
                quad(h, &state.r_x) - quad(h, &state.user_covariances[k]) + cfg.sigma_c2;
            assert!((lin.b_e[k] - expect).abs() < 1e-18);
            assert!(lin.b_e[k] > 0.0);
        }
    }

    #[test]
    fn sca_epochs_never_decrease_the_margin() {
        let cfg = small_cfg(2, 1, 3);
        let channels = seeded_channels(&cfg, 11);
        let rho = vec![1.0, 1.0];
        let mut state = initial_state(&channels, &cfg, &rho, cfg.power_budget).unwrap();
        let mut last = state.zeta;
        for _ in 0..4 {
            let (next, _) =
                solve_sdr_epoch(&state, &channels, &cfg, &rho, cfg.power_budget).unwrap();
            assert!(
                next.zeta >= last - 1e-8,
                "margin dropped: {} -> {}",
                last,
                next.zeta
            );
            last = next.zeta;
            state = next;
        }
    }

    #[test]
    fn infeasible_estimation_bound_detected() {
        let mut cfg = small_cfg(1, 1, 3);
        let p = cfg.power_budget;
        cfg.xi_norm = 0.9 * 9.0 / p; // below N^2 / P
        let channels = seeded_channels(&cfg, 3);
        let err = initial_state(&channels, &cfg, &[1.0], p).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn single_user_without_eavesdropper_reaches_mrt_rate() {
        // one user, one zero-gain target, loose estimation bound: the
        // optimum is maximum-ratio transmission at full power
        let cfg = small_cfg(1, 1, 4);
        let geo = ArrayGeometry::from_config(&cfg).unwrap();
        let mut scenario = Scenario::draw(&cfg, &mut ChaCha8Rng::seed_from_u64(21));
        scenario.targets = vec![TargetSpec {
            azimuth: 0.3,
            broadside: 1.5,
            distance: 50.0,
            scatterers: vec![Scatterer {
                azimuth: 0.3,
                broadside: 1.5,
                forward_gain: Complex::new(0.0, 0.0),
                echo_gain: Complex::new(0.0, 0.0),
            }],
        }];
        let channels = build_channels(&cfg, &geo, &scenario).unwrap();
        let rho = vec![1.0];
        let state = initial_state(&channels, &cfg, &rho, cfg.power_budget).unwrap();
        let state = optimize_beams(state, &channels, &cfg, &rho, cfg.power_budget).unwrap();

        let h = &channels.users[0];
        let mrt = (1.0 + cfg.power_budget * h.norm_squared() / cfg.sigma_c2).log2();
        assert!(
            (state.zeta - mrt).abs() < 1e-4,
            "zeta = {}, mrt = {}",
            state.zeta,
            mrt
        );
    }

    #[test]
    fn rank_one_recovery_exact_for_rank_one_input() {
        let cfg = small_cfg(1, 1, 3);
        let channels = seeded_channels(&cfg, 31);
        let rho = vec![1.0];
        let h = &channels.users[0];
        let w = h.clone() * Complex::new((0.5 * cfg.power_budget).sqrt() / h.norm(), 0.0);
        let w_mat = &w * w.adjoint();
        let r_x =
            &w_mat + CMatrix::identity(3, 3) * Complex::new(0.5 * cfg.power_budget / 3.0, 0.0);
        let state = ScaState {
            epoch: 1,
            user_covariances: vec![w_mat.clone()],
            r_x,
            zeta: 0.0,
            converged: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = rank_one_recovery(&state, &channels, &cfg, &rho, 16, &mut rng).unwrap();
        assert!(rec.gap.abs() < 1e-9, "gap = {}", rec.gap);
        let w_rec = &rec.solution.beamformers.as_ref().unwrap()[0];
        let cos = (w_rec.adjoint() * &w)[(0, 0)].norm() / (w_rec.norm() * w.norm());
        assert!((cos - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_covariance_recovers_zero_beamformer() {
        let cfg = small_cfg(1, 1, 3);
        let channels = seeded_channels(&cfg, 33);
        let state = ScaState {
            epoch: 1,
            user_covariances: vec![CMatrix::zeros(3, 3)],
            r_x: CMatrix::identity(3, 3) * Complex::new(cfg.power_budget / 3.0, 0.0),
            zeta: 0.0,
            converged: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rec = rank_one_recovery(&state, &channels, &cfg, &[1.0], 8, &mut rng).unwrap();
        assert!(rec.solution.beamformers.as_ref().unwrap()[0].norm() == 0.0);
    }

    #[test]
    fn recovered_solution_is_feasible() {
        let cfg = small_cfg(2, 1, 3);
        let channels = seeded_channels(&cfg, 41);
        let rho = vec![1.0, 1.0];
        let state = initial_state(&channels, &cfg, &rho, cfg.power_budget).unwrap();
        let state = optimize_beams(state, &channels, &cfg, &rho, cfg.power_budget).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rec = rank_one_recovery(&state, &channels, &cfg, &rho, 50, &mut rng).unwrap();
        rec.solution.validate(cfg.power_budget + 1e-9).unwrap();
        let norm = metrics::crb_normalized(&rec.solution.r_x).unwrap();
        assert!(norm <= cfg.xi_norm + 1e-6);
    }
}
