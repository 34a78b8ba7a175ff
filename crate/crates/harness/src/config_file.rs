//! JSON configuration files.
//!
//! File-level conventions differ from the internal ones: angles are given in
//! degrees, powers in dBm, lengths in meters. Every key is optional and
//! unknown keys are rejected.

use crate::HarnessError;
use iscsc_core::config::{dbm_to_watts, LoopOptions, SolverOptions, SystemConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub wavelength_m: Option<f64>,
    pub frames: Option<usize>,
    pub n_tx: Option<usize>,
    pub n_tz: Option<usize>,
    pub n_rx: Option<usize>,
    pub n_rz: Option<usize>,
    pub users: Option<usize>,
    pub targets: Option<usize>,
    pub scatterers_per_target: Option<usize>,
    pub noise_comm_dbm: Option<f64>,
    pub noise_radar_dbm: Option<f64>,
    pub power_budget_dbm: Option<f64>,
    pub iota: Option<f64>,
    pub nu_w_per_nat: Option<f64>,
    pub rho_lb: Option<f64>,
    /// Upper bound on the normalized estimation error `tr(R_x^{-1})`.
    pub xi_norm: Option<f64>,
    pub dx_m: Option<f64>,
    pub dz_m: Option<f64>,
    pub region_area_m2: Option<f64>,
    pub azimuth_deg: Option<(f64, f64)>,
    pub broadside_deg: Option<(f64, f64)>,
    pub distance_m: Option<(f64, f64)>,
    pub scatter_spread_deg: Option<f64>,
    pub convergence_bits: Option<f64>,
    pub ao_max_epochs: Option<usize>,
    pub sca_tol_bits: Option<f64>,
    pub sca_max_epochs: Option<usize>,
    pub position_tol_bits: Option<f64>,
    pub position_max_epochs: Option<usize>,
    pub exploration_probes: Option<usize>,
    pub randomization_trials: Option<usize>,
    pub solver_tol: Option<f64>,
    pub newton_max_steps: Option<usize>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Applies the file on top of the built-in defaults, converting units.
    pub fn to_system_config(&self) -> Result<SystemConfig<f64>, HarnessError> {
        let mut cfg = SystemConfig::<f64>::default();
        if let Some(v) = self.wavelength_m {
            cfg.wavelength = v;
        }
        if let Some(v) = self.frames {
            cfg.frames = v;
        }
        if let Some(v) = self.n_tx {
            cfg.n_tx = v;
        }
        if let Some(v) = self.n_tz {
            cfg.n_tz = v;
        }
        if let Some(v) = self.n_rx {
            cfg.n_rx = v;
        }
        if let Some(v) = self.n_rz {
            cfg.n_rz = v;
        }
        if let Some(v) = self.users {
            cfg.users = v;
        }
        if let Some(v) = self.targets {
            cfg.targets = v;
        }
        if let Some(v) = self.scatterers_per_target {
            cfg.scatterers = v;
        }
        if let Some(v) = self.noise_comm_dbm {
            cfg.sigma_c2 = dbm_to_watts(v);
        }
        if let Some(v) = self.noise_radar_dbm {
            cfg.sigma_r2 = dbm_to_watts(v);
        }
        if let Some(v) = self.power_budget_dbm {
            cfg.power_budget = dbm_to_watts(v);
        }
        if let Some(v) = self.iota {
            cfg.iota = v;
        }
        if let Some(v) = self.nu_w_per_nat {
            cfg.nu = v;
        }
        if let Some(v) = self.rho_lb {
            cfg.rho_lb = v;
        }
        if let Some(v) = self.xi_norm {
            cfg.xi_norm = v;
        }
        if let Some(v) = self.dx_m {
            cfg.d_x = v;
        }
        if let Some(v) = self.dz_m {
            cfg.d_z = v;
        }
        if let Some(v) = self.region_area_m2 {
            cfg.region_area = v;
        }
        if let Some((lo, hi)) = self.azimuth_deg {
            cfg.azimuth_range = (lo.to_radians(), hi.to_radians());
        }
        if let Some((lo, hi)) = self.broadside_deg {
            cfg.broadside_range = (lo.to_radians(), hi.to_radians());
        }
        if let Some(v) = self.distance_m {
            cfg.distance_range = v;
        }
        if let Some(v) = self.scatter_spread_deg {
            cfg.scatter_spread = v.to_radians();
        }
        let loops = LoopOptions::<f64> {
            sca_tol_bits: self.sca_tol_bits.unwrap_or(cfg.loops.sca_tol_bits),
            sca_max_epochs: self.sca_max_epochs.unwrap_or(cfg.loops.sca_max_epochs),
            position_tol_bits: self
                .position_tol_bits
                .unwrap_or(cfg.loops.position_tol_bits),
            position_max_epochs: self
                .position_max_epochs
                .unwrap_or(cfg.loops.position_max_epochs),
            curvature_max_doublings: cfg.loops.curvature_max_doublings,
            ao_tol_bits: self.convergence_bits.unwrap_or(cfg.loops.ao_tol_bits),
            ao_max_epochs: self.ao_max_epochs.unwrap_or(cfg.loops.ao_max_epochs),
            exploration_probes: self
                .exploration_probes
                .unwrap_or(cfg.loops.exploration_probes),
            randomization_trials: self
                .randomization_trials
                .unwrap_or(cfg.loops.randomization_trials),
        };
        cfg.loops = loops;
        let solver = SolverOptions::<f64> {
            tol: self.solver_tol.unwrap_or(cfg.solver.tol),
            newton_max: self.newton_max_steps.unwrap_or(cfg.solver.newton_max),
            ..cfg.solver.clone()
        };
        cfg.solver = solver;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let file: ConfigFile = serde_json::from_str("{}").unwrap();
        let cfg = file.to_system_config().unwrap();
        assert_eq!(cfg, SystemConfig::<f64>::default());
    }

    #[test]
    fn units_are_converted() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"power_budget_dbm": 20.0, "azimuth_deg": [-30.0, 30.0], "distance_m": [5.0, 9.0]}"#,
        )
        .unwrap();
        let cfg = file.to_system_config().unwrap();
        assert!((cfg.power_budget - 0.1).abs() < 1e-12);
        assert!((cfg.azimuth_range.1 - 30f64.to_radians()).abs() < 1e-15);
        assert_eq!(cfg.distance_range, (5.0, 9.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        let r: Result<ConfigFile, _> = serde_json::from_str(r#"{"powre_budget_dbm": 20.0}"#);
        assert!(r.is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"frames": 2, "n_tx": 5}"#).unwrap();
        assert!(file.to_system_config().is_err());
    }
}
