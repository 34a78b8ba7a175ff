//! Alternating optimization driver: beamformers, antenna positions and
//! extraction ratios in turn, until the worst-case secrecy rate settles.
//!
//! Power couples the blocks: the ratio block reserves a small guard on top
//! of the transmit power so the incumbent beamformers stay strictly inside
//! the next epoch's budget, keeping every block update monotone.

use crate::beamforming::{
    initial_state, min_pair_margin, optimize_beams, rank_one_recovery, ScaState,
};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::metrics;
use crate::model::{
    build_channels, hermitian_trace, ArrayGeometry, BeamformingSolution, ChannelSet, Scenario,
};
use crate::positions::optimize_positions;
use crate::ratios::optimize_ratios;
use crate::{real, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// One epoch of the alternating loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AoEpochRecord<T> {
    pub epoch: usize,
    /// Worst-case secrecy rate after the full epoch, bits.
    pub s_min: T,
    /// Unclamped worst-case pair margin, bits.
    pub margin: T,
    /// Margin reached by the beamforming block, bits.
    pub zeta: T,
    pub s_after_beams: T,
    pub s_after_positions: T,
    pub s_after_explore: T,
    pub s_after_ratios: T,
    pub crb_normalized: T,
    pub crb_value: T,
    pub p_cs: T,
    pub p_comp: T,
    pub positions: Vec<(T, T)>,
    pub rho: Vec<T>,
    /// Wall-clock spent in this epoch (excluded from determinism).
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoStatus {
    Converged,
    MaxEpochs,
}

/// Full record of one alternating-optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct AoTrace<T> {
    /// Worst-case secrecy rate at the feasible starting point, bits.
    pub initial_s_min: T,
    pub epochs: Vec<AoEpochRecord<T>>,
    pub status: AoStatus,
    /// Objective of the relaxed solution at the end of the loop.
    pub relaxed_s_min: T,
    /// Objective after rank-one recovery.
    pub recovered_s_min: T,
    /// `relaxed_s_min - recovered_s_min`.
    pub recovery_gap: T,
}

/// Everything a run produces: the trace plus the final operating point.
#[derive(Debug, Clone)]
pub struct AoOutcome<T> {
    pub trace: AoTrace<T>,
    /// Relaxed covariances at the final positions and ratios.
    pub relaxed: BeamformingSolution<T>,
    /// Rank-one solution recovered by randomization.
    pub recovered: BeamformingSolution<T>,
    pub geometry: ArrayGeometry<T>,
    pub channels: ChannelSet<T>,
    pub rho: Vec<T>,
}

/// Draws seeded placement candidates uniformly in the movable boxes,
/// re-solves the beams at each, and adopts the best candidate when it beats
/// the incumbent's worst-case margin. Returns the (clamped) margin after
/// probing. No-op for point boxes.
fn explore_positions<T: Real>(
    cfg: &SystemConfig<T>,
    geo: &mut ArrayGeometry<T>,
    channels: &mut ChannelSet<T>,
    sca: &mut ScaState<T>,
    rho: &[T],
    p_avail: T,
    epoch: usize,
) -> Result<T> {
    let mut best_margin = min_pair_margin(&sca.user_covariances, &sca.r_x, channels, cfg, rho);
    if cfg.loops.exploration_probes == 0 || geo.fa_regions.iter().all(|r| r.is_point()) {
        return Ok(num_traits::Float::max(best_margin, T::zero()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4558_504c);
    rng.set_stream(epoch as u64);
    for _ in 0..cfg.loops.exploration_probes {
        let mut candidate = geo.clone();
        for (p, r) in candidate
            .fa_positions
            .iter_mut()
            .zip(&candidate.fa_regions)
        {
            let x = rng.gen_range(r.x_min.to_f64().unwrap()..=r.x_max.to_f64().unwrap());
            let z = rng.gen_range(r.z_min.to_f64().unwrap()..=r.z_max.to_f64().unwrap());
            let (cx, cz) = r.clamp(real(x), real(z));
            *p = (cx, cz);
        }
        let probe_channels = channels.at_positions(cfg, &candidate)?;
        let Ok(state0) = initial_state(&probe_channels, cfg, rho, p_avail) else {
            continue;
        };
        let Ok(state) = optimize_beams(state0, &probe_channels, cfg, rho, p_avail) else {
            continue;
        };
        if state.zeta > best_margin + real(1e-12) {
            best_margin = state.zeta;
            *geo = candidate;
            *channels = probe_channels;
            *sca = state;
        }
    }
    sca.converged = false;
    Ok(num_traits::Float::max(best_margin, T::zero()))
}

/// Runs beamforming, placement and ratio blocks in turn from the canonical
/// starting point (isotropic covariances, ratios at one, antennas where the
/// geometry puts them) until `|Delta S_min| <= ao_tol_bits` or the epoch cap.
pub fn run_ao<T: Real>(
    cfg: &SystemConfig<T>,
    geo: &ArrayGeometry<T>,
    scenario: &Scenario<T>,
) -> Result<AoOutcome<T>> {
    cfg.validate()?;
    geo.validate()?;
    let channels = build_channels(cfg, geo, scenario)?;
    run_ao_from(cfg, geo.clone(), channels, None)
}

/// Same as [`run_ao`] but continuing from a previous beamforming state
/// (used by sweeps to warm-start across nearby problem instances).
pub fn run_ao_warm<T: Real>(
    cfg: &SystemConfig<T>,
    geo: &ArrayGeometry<T>,
    scenario: &Scenario<T>,
    warm: Option<ScaState<T>>,
) -> Result<AoOutcome<T>> {
    cfg.validate()?;
    geo.validate()?;
    let channels = build_channels(cfg, geo, scenario)?;
    run_ao_from(cfg, geo.clone(), channels, warm)
}

fn run_ao_from<T: Real>(
    cfg: &SystemConfig<T>,
    mut geo: ArrayGeometry<T>,
    mut channels: ChannelSet<T>,
    warm: Option<ScaState<T>>,
) -> Result<AoOutcome<T>> {
    let users = channels.users.len();
    let p_t = cfg.power_budget;
    let guard = num_traits::Float::max(real::<T>(1e-9), real::<T>(1e-6) * p_t);

    let mut rho = vec![T::one(); users];
    let mut p_comp = T::zero();

    let mut sca = match warm {
        Some(state) => state,
        None => initial_state(&channels, cfg, &rho, p_t - guard)?,
    };
    let initial_sol = BeamformingSolution::new(sca.user_covariances.clone(), sca.r_x.clone());
    let mut s_prev = metrics::evaluate(&channels, &initial_sol, cfg, &rho)?.s_min;
    let initial_s_min = s_prev;

    let mut epochs = Vec::new();
    let mut status = AoStatus::MaxEpochs;

    for epoch in 1..=cfg.loops.ao_max_epochs {
        let t0 = Instant::now();
        let p_avail = p_t - p_comp - guard;

        // block 1: beamforming at fixed positions and ratios
        sca = optimize_beams(sca, &channels, cfg, &rho, p_avail)?;
        sca.converged = false;
        let sol = BeamformingSolution::new(sca.user_covariances.clone(), sca.r_x.clone());
        let s_after_beams = num_traits::Float::max(sca.zeta, T::zero());

        // block 2: antenna placement at fixed beams and ratios
        let (pos_it, geo_new, channels_new) =
            optimize_positions(&geo, &channels, &sol, cfg, &rho)?;
        geo = geo_new;
        channels = channels_new;
        let s_after_positions = pos_it.s_min;

        // joint placement probes: the fixed-beam landscape peaks at the
        // point the beams were designed for, so box-wide moves are only
        // worthwhile with re-solved beams
        let s_after_explore = explore_positions(
            cfg, &mut geo, &mut channels, &mut sca, &rho, p_avail, epoch,
        )?;
        let sol = BeamformingSolution::new(sca.user_covariances.clone(), sca.r_x.clone());

        // block 3: extraction ratios under the residual compute budget;
        // the doubled guard keeps the incumbent strictly affordable next epoch
        let p_cs = hermitian_trace(&sol.r_x);
        let two = real::<T>(2.0);
        let p_cs_eff = num_traits::Float::min(p_cs + two * guard, p_t);
        let ratio_sol = optimize_ratios(p_cs_eff, cfg)?;
        rho = ratio_sol.rho.clone();
        p_comp = ratio_sol.p_comp;

        let report = metrics::evaluate(&channels, &sol, cfg, &rho)?;
        let margin = min_pair_margin(&sol.user_covariances, &sol.r_x, &channels, cfg, &rho);
        sca.zeta = margin;

        epochs.push(AoEpochRecord {
            epoch,
            s_min: report.s_min,
            margin,
            zeta: sca.zeta,
            s_after_beams,
            s_after_positions,
            s_after_explore,
            s_after_ratios: report.s_min,
            crb_normalized: report.crb_normalized,
            crb_value: report.crb_value,
            p_cs,
            p_comp,
            positions: geo.fa_positions.clone(),
            rho: rho.clone(),
            seconds: t0.elapsed().as_secs_f64(),
        });

        let delta = num_traits::Float::abs(report.s_min - s_prev);
        s_prev = report.s_min;
        if delta <= cfg.loops.ao_tol_bits {
            status = AoStatus::Converged;
            break;
        }
    }

    // rank-one recovery once, after convergence
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x52414e4b);
    let recovered = rank_one_recovery(
        &sca,
        &channels,
        cfg,
        &rho,
        cfg.loops.randomization_trials,
        &mut rng,
    )?;

    let relaxed = BeamformingSolution::new(sca.user_covariances.clone(), sca.r_x.clone());
    let trace = AoTrace {
        initial_s_min,
        epochs,
        status,
        relaxed_s_min: recovered.sdr_objective,
        recovered_s_min: recovered.objective,
        recovery_gap: recovered.gap,
    };
    Ok(AoOutcome {
        trace,
        relaxed,
        recovered: recovered.solution,
        geometry: geo,
        channels,
        rho,
    })
}
