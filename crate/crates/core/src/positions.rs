//! Transmit-antenna placement: ascent on the worst-case secrecy margin via
//! concave quadratic surrogates with backtracked curvature.
//!
//! With beamformers and ratios fixed, each pair margin is a smooth function
//! of the antenna coordinates through the steering phases. One epoch builds
//! the tangent plane of every pair margin, subtracts `delta/2 ||d||^2`, and
//! maximizes the worst surrogate level inside the movable boxes. The
//! curvature `delta` doubles until the step improves the true objective, so
//! every accepted step is a true ascent.

use crate::beamforming::min_pair_margin;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::model::{ArrayGeometry, BeamformingSolution, ChannelSet};
use crate::solver::{solve, BoxBound, ConicProblem, LinearObjective, QuadDiag, SmoothConstraint, SparseAffine};
use crate::{real, CMatrix, CVector, Cplx, RVector, Real};

/// One placement iterate.
#[derive(Debug, Clone)]
pub struct PositionIterate<T> {
    /// Flattened coordinates `[x_0, z_0, x_1, z_1, ...]`, meters.
    pub u: Vec<T>,
    pub epoch: usize,
    /// Curvature scalar accepted by the last backtracking pass.
    pub curvature: T,
    /// Worst-case pair margin at `u`, bits (unclamped).
    pub margin: T,
    /// Worst-case secrecy rate at `u`, bits.
    pub s_min: T,
}

/// Values and position gradients of every `(user, target)` pair margin.
#[derive(Debug, Clone)]
pub struct PairGradients<T> {
    /// `[user][target]` margins in bits.
    pub values: Vec<Vec<T>>,
    /// `[user][target]` gradients over the flattened coordinates,
    /// bits per meter.
    pub grads: Vec<Vec<RVector<T>>>,
}

/// Per-element coordinate derivatives of a channel vector: entry `i` of
/// `dx` is `d h_i / d x_i` (the only non-zero derivative of `h_i`).
struct ChannelDerivatives<T> {
    h: CVector<T>,
    dx: CVector<T>,
    dz: CVector<T>,
}

fn user_derivatives<T: Real>(
    h: &CVector<T>,
    azimuth: T,
    broadside: T,
    wavelength: T,
) -> ChannelDerivatives<T> {
    let kappa = real::<T>(2.0) * T::PI() / wavelength;
    let cx = kappa * num_traits::Float::cos(azimuth) * num_traits::Float::sin(broadside);
    let cz = kappa * num_traits::Float::cos(broadside);
    let j = Cplx::new(T::zero(), T::one());
    ChannelDerivatives {
        h: h.clone(),
        dx: h.map(|e| e * j * Cplx::new(cx, T::zero())),
        dz: h.map(|e| e * j * Cplx::new(cz, T::zero())),
    }
}

fn target_derivatives<T: Real>(
    target: &crate::model::TargetSpec<T>,
    geo: &ArrayGeometry<T>,
    wavelength: T,
) -> ChannelDerivatives<T> {
    let n_t = geo.n_t();
    let kappa = real::<T>(2.0) * T::PI() / wavelength;
    let j = Cplx::new(T::zero(), T::one());
    let mut h = CVector::zeros(n_t);
    let mut dx = CVector::zeros(n_t);
    let mut dz = CVector::zeros(n_t);
    for s in &target.scatterers {
        let a = crate::model::tx_steering_vector(
            s.azimuth,
            s.broadside,
            wavelength,
            &geo.fa_positions,
        );
        let cx = kappa * num_traits::Float::cos(s.azimuth) * num_traits::Float::sin(s.broadside);
        let cz = kappa * num_traits::Float::cos(s.broadside);
        for i in 0..n_t {
            let term = a[i] * s.forward_gain;
            h[i] += term;
            dx[i] += term * j * Cplx::new(cx, T::zero());
            dz[i] += term * j * Cplx::new(cz, T::zero());
        }
    }
    ChannelDerivatives { h, dx, dz }
}

/// Gradient of `h^H M h` w.r.t. each coordinate, accumulated as
/// `scale * d q / d u` into `out`.
fn add_quadform_gradient<T: Real>(
    der: &ChannelDerivatives<T>,
    m: &CMatrix<T>,
    scale: T,
    out: &mut RVector<T>,
) {
    let mh = m * &der.h;
    let two = real::<T>(2.0);
    for i in 0..der.h.len() {
        out[2 * i] += scale * two * (der.dx[i].conj() * mh[i]).re;
        out[2 * i + 1] += scale * two * (der.dz[i].conj() * mh[i]).re;
    }
}

/// Analytic margin values and gradients at the geometry's current
/// positions. Beamformers are held fixed; channels must have been built at
/// the same positions.
pub fn secrecy_position_gradients<T: Real>(
    geo: &ArrayGeometry<T>,
    channels: &ChannelSet<T>,
    sol: &BeamformingSolution<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
) -> PairGradients<T> {
    let n_t = geo.n_t();
    let dim = 2 * n_t;
    let ln2 = num_traits::Float::ln(real::<T>(2.0));
    let sigma = cfg.sigma_c2;

    let user_ders: Vec<ChannelDerivatives<T>> = channels
        .users
        .iter()
        .zip(&channels.scenario.users)
        .map(|(h, spec)| user_derivatives(h, spec.azimuth, spec.broadside, cfg.wavelength))
        .collect();
    let target_ders: Vec<ChannelDerivatives<T>> = channels
        .scenario
        .targets
        .iter()
        .map(|t| target_derivatives(t, geo, cfg.wavelength))
        .collect();

    let quad = |h: &CVector<T>, m: &CMatrix<T>| -> T { (h.adjoint() * m * h)[(0, 0)].re };

    let mut values = Vec::with_capacity(channels.users.len());
    let mut grads = Vec::with_capacity(channels.users.len());
    for (k, ud) in user_ders.iter().enumerate() {
        let weight = cfg.iota / (rho[k] * ln2);
        let residual_k = &sol.r_x - &sol.user_covariances[k];
        let a = quad(&ud.h, &sol.r_x) + sigma;
        let b = quad(&ud.h, &residual_k) + sigma;

        let mut row_vals = Vec::with_capacity(channels.targets.len());
        let mut row_grads = Vec::with_capacity(channels.targets.len());
        for td in &target_ders {
            let c = quad(&td.h, &residual_k) + sigma;
            let d = quad(&td.h, &sol.r_x) + sigma;
            let value = weight
                * (num_traits::Float::ln(a) - num_traits::Float::ln(b)
                    + num_traits::Float::ln(c)
                    - num_traits::Float::ln(d));

            let mut g = RVector::zeros(dim);
            add_quadform_gradient(ud, &sol.r_x, weight / a, &mut g);
            add_quadform_gradient(ud, &residual_k, -weight / b, &mut g);
            add_quadform_gradient(td, &residual_k, weight / c, &mut g);
            add_quadform_gradient(td, &sol.r_x, -weight / d, &mut g);

            row_vals.push(value);
            row_grads.push(g);
        }
        values.push(row_vals);
        grads.push(row_grads);
    }
    PairGradients { values, grads }
}

/// Outcome of the curvature backtracking pass.
pub enum CurvatureOutcome<T, C> {
    /// A step at curvature `delta` whose candidate improves the objective.
    Accepted { delta: T, candidate: C },
    /// The doubling cap was reached without an improving step.
    Overflow,
}

/// Doubles the curvature scalar until `solve_at`'s candidate passes
/// `improves`. `solve_at` may return `None` for a failed subproblem, which
/// also doubles the curvature.
pub fn curvature_backtrack<T: Real, C>(
    initial_delta: T,
    max_doublings: usize,
    mut solve_at: impl FnMut(T) -> Option<C>,
    mut improves: impl FnMut(&C) -> bool,
) -> CurvatureOutcome<T, C> {
    let mut delta = initial_delta;
    for _ in 0..=max_doublings {
        if let Some(candidate) = solve_at(delta) {
            if improves(&candidate) {
                return CurvatureOutcome::Accepted { delta, candidate };
            }
        }
        delta = delta * real(2.0);
    }
    CurvatureOutcome::Overflow
}

fn movable_dims<T: Real>(geo: &ArrayGeometry<T>) -> (Vec<usize>, Vec<T>, Vec<T>) {
    let mut idx = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, r) in geo.fa_regions.iter().enumerate() {
        if r.x_max > r.x_min {
            idx.push(2 * i);
            lo.push(r.x_min);
            hi.push(r.x_max);
        }
        if r.z_max > r.z_min {
            idx.push(2 * i + 1);
            lo.push(r.z_min);
            hi.push(r.z_max);
        }
    }
    (idx, lo, hi)
}

/// Maximizes the worst-case secrecy margin over the movable boxes with the
/// beamformers fixed. Returns the final iterate and the channels rebuilt at
/// its positions. Point boxes make this the identity.
pub fn optimize_positions<T: Real>(
    geo: &ArrayGeometry<T>,
    channels: &ChannelSet<T>,
    sol: &BeamformingSolution<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
) -> Result<(PositionIterate<T>, ArrayGeometry<T>, ChannelSet<T>)> {
    let (mov_idx, mov_lo, mov_hi) = movable_dims(geo);
    let mut geo_now = geo.clone();
    let mut channels_now = channels.clone();
    let mut margin_now = min_pair_margin(&sol.user_covariances, &sol.r_x, &channels_now, cfg, rho);
    let mut curvature = T::one();

    if mov_idx.is_empty() {
        let s_min = num_traits::Float::max(margin_now, T::zero());
        return Ok((
            PositionIterate {
                u: geo.position_vector(),
                epoch: 0,
                curvature,
                margin: margin_now,
                s_min,
            },
            geo_now,
            channels_now,
        ));
    }

    let mut epoch = 0usize;
    for _ in 0..cfg.loops.position_max_epochs {
        epoch += 1;
        let u_now = geo_now.position_vector();

        // pull strictly inside the boxes so the barrier has room
        let mut u_int = u_now.clone();
        for (m, &gi) in mov_idx.iter().enumerate() {
            let width = mov_hi[m] - mov_lo[m];
            let inset = real::<T>(1e-9) * width;
            u_int[gi] = nalgebra::clamp(u_int[gi], mov_lo[m] + inset, mov_hi[m] - inset);
        }
        let geo_int = geo_now.with_position_vector(&u_int)?;
        let channels_int = channels_now.at_positions(cfg, &geo_int)?;
        let pairs = secrecy_position_gradients(&geo_int, &channels_int, sol, cfg, rho);

        let step = curvature_backtrack(
            T::one(),
            cfg.loops.curvature_max_doublings,
            |delta| {
                solve_surrogate(&pairs, &mov_idx, &mov_lo, &mov_hi, &u_int, delta, cfg)
                    .ok()
                    .map(|d| {
                        // exact box projection of the candidate positions
                        let mut u_new = u_int.clone();
                        for (m, &gi) in mov_idx.iter().enumerate() {
                            u_new[gi] =
                                nalgebra::clamp(u_int[gi] + d[m], mov_lo[m], mov_hi[m]);
                        }
                        u_new
                    })
            },
            |u_new| {
                let Ok(geo_new) = geo_now.with_position_vector(u_new) else {
                    return false;
                };
                let Ok(ch_new) = channels_now.at_positions(cfg, &geo_new) else {
                    return false;
                };
                let margin_new =
                    min_pair_margin(&sol.user_covariances, &sol.r_x, &ch_new, cfg, rho);
                margin_new >= margin_now - real(1e-12)
            },
        );

        match step {
            CurvatureOutcome::Accepted { delta, candidate } => {
                curvature = delta;
                let geo_new = geo_now.with_position_vector(&candidate)?;
                let ch_new = channels_now.at_positions(cfg, &geo_new)?;
                let margin_new =
                    min_pair_margin(&sol.user_covariances, &sol.r_x, &ch_new, cfg, rho);
                let improvement = margin_new - margin_now;
                geo_now = geo_new;
                channels_now = ch_new;
                margin_now = margin_new;
                if num_traits::Float::abs(improvement) <= cfg.loops.position_tol_bits {
                    break;
                }
            }
            CurvatureOutcome::Overflow => break, // zero step accepted
        }
    }

    Ok((
        PositionIterate {
            u: geo_now.position_vector(),
            epoch,
            curvature,
            margin: margin_now,
            s_min: num_traits::Float::max(margin_now, T::zero()),
        },
        geo_now,
        channels_now,
    ))
}

/// Solves the level-maximization surrogate at one curvature; returns the
/// movable-coordinate displacement.
fn solve_surrogate<T: Real>(
    pairs: &PairGradients<T>,
    mov_idx: &[usize],
    mov_lo: &[T],
    mov_hi: &[T],
    u_int: &[T],
    delta: T,
    cfg: &SystemConfig<T>,
) -> Result<Vec<T>> {
    let m = mov_idx.len();
    let level_idx = m;
    let dim = m + 1;

    let mut scalars: Vec<Box<dyn SmoothConstraint<T>>> = Vec::new();
    let mut min_value = T::infinity();
    for (vals_row, grads_row) in pairs.values.iter().zip(&pairs.grads) {
        for (value, grad) in vals_row.iter().zip(grads_row) {
            let mut terms: Vec<(usize, T)> = Vec::with_capacity(m + 1);
            for (mi, &gi) in mov_idx.iter().enumerate() {
                let g = grad[gi];
                if g != T::zero() {
                    terms.push((mi, g));
                }
            }
            terms.push((level_idx, -T::one()));
            scalars.push(Box::new(QuadDiag {
                linear: SparseAffine::new(terms, *value),
                diag: (0..m).map(|mi| (mi, -delta)).collect(),
            }));
            if *value < min_value {
                min_value = *value;
            }
        }
    }

    let boxes: Vec<BoxBound<T>> = mov_idx
        .iter()
        .enumerate()
        .map(|(mi, &gi)| BoxBound {
            index: mi,
            lo: mov_lo[mi] - u_int[gi],
            hi: mov_hi[mi] - u_int[gi],
        })
        .collect();

    let mut initial = RVector::zeros(dim);
    let slack = num_traits::Float::max(
        real::<T>(1e-9),
        real::<T>(1e-3) * (T::one() + num_traits::Float::abs(min_value)),
    );
    initial[level_idx] = min_value - slack;

    let problem = ConicProblem {
        dim,
        objective: Box::new(LinearObjective(SparseAffine::new(
            vec![(level_idx, T::one())],
            T::zero(),
        ))),
        psd: vec![],
        scalars,
        boxes,
        initial,
    };
    let report = solve(&problem, &cfg.solver)?;
    Ok((0..m).map(|mi| report.x[mi]).collect())
}
