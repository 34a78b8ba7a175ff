//! Experiment drivers: single runs, movable-region sweeps and
//! estimation-bound sweeps over array/target presets.

use crate::scenario_gen::{derive_seed, generate_scenario, randomize_positions};
use crate::HarnessError;
use iscsc_core::ao::{run_ao, run_ao_warm};
use iscsc_core::beamforming::ScaState;
use iscsc_core::config::SystemConfig;
use iscsc_core::Error as CoreError;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// What a spec asks the harness to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SingleRun,
    RegionSweep,
    CrbSweep,
    CrbValidate,
}

/// Placement baseline of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Full alternating optimization over the movable regions.
    Proposed,
    /// Positions drawn uniformly in the regions and frozen; beams and
    /// ratios still optimized.
    RandomFa,
    /// Conventional fixed grid.
    Fpa,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Proposed => "proposed",
            Baseline::RandomFa => "random-fa",
            Baseline::Fpa => "fpa",
        }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Sweep values: region areas in m^2 or normalized estimation bounds.
    pub values: Vec<f64>,
    pub baselines: Vec<Baseline>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
        if self.kind != ExperimentKind::SingleRun && self.kind != ExperimentKind::CrbValidate {
            if self.values.is_empty() {
                return Err(HarnessError::Config("sweep needs at least one value".into()));
            }
            if self.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(HarnessError::Config(
                    "sweep values must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    Infeasible,
    Error,
}

impl RowStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Infeasible => "infeasible",
            RowStatus::Error => "error",
        }
    }
}

/// One emitted result: a (scenario, baseline, sweep value, trial) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub baseline: String,
    pub sweep_value: f64,
    pub s_min_bits: f64,
    pub crb: f64,
    pub xi_norm: f64,
    pub p_cs_w: f64,
    pub p_comp_w: f64,
    pub epochs: usize,
    pub seconds: f64,
    pub status: RowStatus,
}

fn failure_row(
    scenario: String,
    baseline: Baseline,
    sweep_value: f64,
    err: &CoreError,
    seconds: f64,
) -> ResultRow {
    let status = match err {
        CoreError::Infeasible(_) => RowStatus::Infeasible,
        _ => RowStatus::Error,
    };
    ResultRow {
        scenario,
        baseline: baseline.name().to_string(),
        sweep_value,
        s_min_bits: 0.0,
        crb: 0.0,
        xi_norm: 0.0,
        p_cs_w: 0.0,
        p_comp_w: 0.0,
        epochs: 0,
        seconds,
        status,
    }
}

fn run_one(
    cfg: &SystemConfig<f64>,
    geo: &iscsc_core::model::ArrayGeometry<f64>,
    scenario: &iscsc_core::model::Scenario<f64>,
    scenario_id: String,
    baseline: Baseline,
    sweep_value: f64,
    warm: Option<ScaState<f64>>,
) -> (ResultRow, Option<iscsc_core::ao::AoOutcome<f64>>) {
    let t0 = Instant::now();
    let result = match warm {
        Some(state) => run_ao_warm(cfg, geo, scenario, Some(state)),
        None => run_ao(cfg, geo, scenario),
    };
    let seconds = t0.elapsed().as_secs_f64();
    match result {
        Ok(out) => {
            let last = out.trace.epochs.last();
            let row = ResultRow {
                scenario: scenario_id,
                baseline: baseline.name().to_string(),
                sweep_value,
                s_min_bits: out.trace.recovered_s_min,
                crb: last.map_or(0.0, |e| e.crb_value),
                xi_norm: cfg.xi_norm,
                p_cs_w: last.map_or(0.0, |e| e.p_cs),
                p_comp_w: last.map_or(0.0, |e| e.p_comp),
                epochs: out.trace.epochs.len(),
                seconds,
                status: RowStatus::Ok,
            };
            (row, Some(out))
        }
        Err(err) => (
            failure_row(scenario_id, baseline, sweep_value, &err, seconds),
            None,
        ),
    }
}

/// One run of the proposed method on a freshly generated scenario.
pub fn run_single(
    cfg: &SystemConfig<f64>,
    seed: u64,
) -> Result<(ResultRow, Option<iscsc_core::ao::AoOutcome<f64>>), HarnessError> {
    let (geo, scenario) = generate_scenario(cfg, seed)?;
    let (row, out) = run_one(
        cfg,
        &geo,
        &scenario,
        format!("seed{seed}"),
        Baseline::Proposed,
        cfg.region_area,
        None,
    );
    Ok((row, out))
}

/// Sweeps the movable-region area for every requested baseline.
///
/// The fixed-grid baseline always uses the area-independent antenna grid, so
/// its rows are constant across sweep values.
pub fn run_region_sweep(
    spec: &ExperimentSpec,
    base_cfg: &SystemConfig<f64>,
) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (point, &area) in spec.values.iter().enumerate() {
        let mut cfg = base_cfg.clone();
        cfg.region_area = area;
        // the conventional grid does not depend on the region size
        let mut fpa_cfg = base_cfg.clone();
        fpa_cfg.region_area = 0.0;

        for trial in 0..spec.trials {
            // one scenario per trial, shared by every sweep value and
            // baseline, so the comparison isolates the placement method
            let scenario_seed = derive_seed(spec.seed, 0, trial as u64);
            cfg.seed = scenario_seed;
            fpa_cfg.seed = scenario_seed;
            let (geo, scenario) = generate_scenario(&cfg, scenario_seed)?;
            let id = format!("trial{trial}");

            for &baseline in &spec.baselines {
                match baseline {
                    Baseline::Proposed => {
                        let (row, _) =
                            run_one(&cfg, &geo, &scenario, id.clone(), baseline, area, None);
                        rows.push(row);
                    }
                    Baseline::RandomFa => {
                        let pos_seed = derive_seed(spec.seed ^ 0x52, point as u64, trial as u64);
                        let geo_r = randomize_positions(&geo, pos_seed);
                        let (row, _) =
                            run_one(&cfg, &geo_r, &scenario, id.clone(), baseline, area, None);
                        rows.push(row);
                    }
                    Baseline::Fpa => {
                        let (geo_f, _) = generate_scenario(&fpa_cfg, scenario_seed)?;
                        let geo_f = geo_f.frozen();
                        let (row, _) =
                            run_one(&fpa_cfg, &geo_f, &scenario, id.clone(), baseline, area, None);
                        rows.push(row);
                    }
                }
            }
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Array/target presets of the estimation-bound sweep.
pub fn crb_sweep_presets() -> Vec<(&'static str, usize, usize, usize)> {
    // (label, n_tx, n_tz, targets)
    vec![("1t-9fa", 3, 3, 1), ("3t-9fa", 3, 3, 3), ("3t-15fa", 5, 3, 3)]
}

/// Sweeps the normalized estimation bound for each preset, warm-starting
/// every point from the previous (smaller, tighter) bound's solution.
pub fn run_crb_sweep(
    spec: &ExperimentSpec,
    base_cfg: &SystemConfig<f64>,
) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (label, n_tx, n_tz, targets) in crb_sweep_presets() {
        let mut cfg = base_cfg.clone();
        cfg.n_tx = n_tx;
        cfg.n_tz = n_tz;
        cfg.targets = targets;
        if cfg.frames <= cfg.n_t() {
            cfg.frames = 2 * cfg.n_t() + 2;
        }

        for trial in 0..spec.trials {
            let scenario_seed = derive_seed(spec.seed, 0xC0 + trial as u64, 0);
            cfg.seed = scenario_seed;
            let (geo, scenario) = generate_scenario(&cfg, scenario_seed)?;
            let mut geo_now = geo.clone();
            let mut warm: Option<ScaState<f64>> = None;

            for &xi in &spec.values {
                let mut cfg_point = cfg.clone();
                cfg_point.xi_norm = xi;
                let id = format!("{label}:trial{trial}");
                let (row, out) = run_one(
                    &cfg_point,
                    &geo_now,
                    &scenario,
                    id,
                    Baseline::Proposed,
                    xi,
                    warm.take(),
                );
                if let Some(out) = out {
                    geo_now = out.geometry.clone();
                    warm = Some(ScaState {
                        epoch: 1,
                        user_covariances: out.relaxed.user_covariances.clone(),
                        r_x: out.relaxed.r_x.clone(),
                        zeta: out.trace.relaxed_s_min,
                        converged: false,
                    });
                }
                rows.push(row);
            }
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (&a.baseline, &a.scenario)
            .cmp(&(&b.baseline, &b.scenario))
            .then(a.sweep_value.partial_cmp(&b.sweep_value).unwrap())
    });
}
