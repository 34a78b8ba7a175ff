//! Scenario constants and algorithm knobs.
//!
//! All quantities are stored in SI units (watts, meters, radians); conversion
//! from the dBm/degree conventions of configuration files happens at the I/O
//! boundary, not here.

use crate::error::{Error, Result};
use crate::{real, Real};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Interior-point kernel knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions<T> {
    /// Duality-gap surrogate at which the barrier loop stops.
    pub tol: T,
    /// Initial barrier parameter.
    pub t_init: T,
    /// Multiplicative barrier schedule.
    pub barrier_mult: T,
    /// Newton-step cap per barrier stage.
    pub newton_max: usize,
    /// Newton decrement threshold (on lambda^2 / 2).
    pub newton_tol: T,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: T,
    /// Backtracking shrink factor.
    pub armijo_shrink: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: real(1e-6),
            t_init: real(1.0),
            barrier_mult: real(10.0),
            newton_max: 200,
            newton_tol: real(1e-10),
            armijo_c: real(1e-4),
            armijo_shrink: real(0.5),
        }
    }
}

/// Iteration caps and stopping thresholds for the block optimizers and the
/// alternating loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopOptions<T> {
    /// Convergence threshold on the beamforming level variable, in bits.
    pub sca_tol_bits: T,
    pub sca_max_epochs: usize,
    /// Convergence threshold on the worst-case rate during position updates.
    pub position_tol_bits: T,
    pub position_max_epochs: usize,
    /// Doubling cap for the surrogate curvature backtracking.
    pub curvature_max_doublings: usize,
    /// Alternating-loop stopping threshold on the worst-case rate, in bits.
    pub ao_tol_bits: T,
    pub ao_max_epochs: usize,
    /// Seeded joint placement probes per epoch (re-solves beams at candidate
    /// positions and adopts them only on joint improvement). Zero disables
    /// probing.
    pub exploration_probes: usize,
    /// Gaussian randomization candidates per user.
    pub randomization_trials: usize,
}

impl<T: Real> Default for LoopOptions<T> {
    fn default() -> Self {
        Self {
            sca_tol_bits: real(1e-5),
            sca_max_epochs: 30,
            position_tol_bits: real(1e-5),
            position_max_epochs: 20,
            curvature_max_doublings: 20,
            ao_tol_bits: real(1e-3),
            ao_max_epochs: 50,
            exploration_probes: 3,
            randomization_trials: 200,
        }
    }
}

/// Full scenario description: array sizes, signal parameters, budgets,
/// placement ranges and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    /// Carrier wavelength in meters.
    pub wavelength: T,
    /// Transmission frames per coherent processing interval.
    pub frames: usize,
    pub n_tx: usize,
    pub n_tz: usize,
    pub n_rx: usize,
    pub n_rz: usize,
    /// Communication users.
    pub users: usize,
    /// Extended sensing targets.
    pub targets: usize,
    /// Scatterers per extended target.
    pub scatterers: usize,
    /// Communication noise power, watts.
    pub sigma_c2: T,
    /// Radar noise power, watts.
    pub sigma_r2: T,
    /// Total power budget, watts.
    pub power_budget: T,
    /// Word-to-bit conversion scalar of the semantic rate.
    pub iota: T,
    /// Compute power per nat of semantic extraction, watts.
    pub nu: T,
    /// Lower bound on the semantic extraction ratio.
    pub rho_lb: T,
    /// Upper bound on the normalized estimation error, i.e. on
    /// `tr(R_x^{-1})`.
    pub xi_norm: T,
    /// Receive-grid spacing along x, meters.
    pub d_x: T,
    /// Receive-grid spacing along z, meters.
    pub d_z: T,
    /// Area of each antenna's movable region, m^2.
    pub region_area: T,
    /// Azimuth placement range, radians.
    pub azimuth_range: (T, T),
    /// Broadside placement range, radians.
    pub broadside_range: (T, T),
    /// Node distance range, meters.
    pub distance_range: (T, T),
    /// Angular half-spread of a target's scatterer cluster, radians.
    pub scatter_spread: T,
    pub solver: SolverOptions<T>,
    pub loops: LoopOptions<T>,
    /// Base RNG seed; all randomness derives from it.
    pub seed: u64,
}

impl<T: Real> Default for SystemConfig<T> {
    fn default() -> Self {
        let lambda = SPEED_OF_LIGHT / 3.5e9;
        Self {
            wavelength: real(lambda),
            frames: 32,
            n_tx: 5,
            n_tz: 1,
            n_rx: 7,
            n_rz: 1,
            users: 5,
            targets: 2,
            scatterers: 3,
            sigma_c2: real(dbm_to_watts(-30.0)),
            sigma_r2: real(dbm_to_watts(-30.0)),
            power_budget: real(dbm_to_watts(25.0)),
            iota: real(1.0),
            nu: real(0.01),
            rho_lb: real(0.1),
            xi_norm: real(200.0),
            d_x: real(lambda / 2.0),
            d_z: real(lambda / 2.0),
            region_area: real(0.0025),
            azimuth_range: (real(-60f64.to_radians()), real(60f64.to_radians())),
            broadside_range: (real(60f64.to_radians()), real(120f64.to_radians())),
            distance_range: (real(30.0), real(100.0)),
            scatter_spread: real(5f64.to_radians()),
            solver: SolverOptions::default(),
            loops: LoopOptions::default(),
            seed: 0,
        }
    }
}

impl<T: Real> SystemConfig<T> {
    /// Transmit array size.
    pub fn n_t(&self) -> usize {
        self.n_tx * self.n_tz
    }

    /// Receive array size.
    pub fn n_r(&self) -> usize {
        self.n_rx * self.n_rz
    }

    /// Checks the structural invariants every scenario must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.frames <= self.n_t() {
            return Err(Error::InvalidConfig(format!(
                "frames ({}) must exceed the transmit array size ({})",
                self.frames,
                self.n_t()
            )));
        }
        let zero = T::zero();
        let one = T::one();
        if self.n_t() == 0 || self.n_r() == 0 || self.users == 0 {
            return Err(Error::InvalidConfig(
                "array sizes and user count must be positive".into(),
            ));
        }
        let positives: [(&str, T); 6] = [
            ("wavelength", self.wavelength),
            ("sigma_c2", self.sigma_c2),
            ("sigma_r2", self.sigma_r2),
            ("power_budget", self.power_budget),
            ("xi_norm", self.xi_norm),
            ("nu", self.nu),
        ];
        for (name, v) in positives {
            if v <= zero {
                return Err(Error::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        if self.rho_lb <= zero || self.rho_lb > one {
            return Err(Error::InvalidConfig("rho_lb must lie in (0, 1]".into()));
        }
        if self.region_area < zero {
            return Err(Error::InvalidConfig("region_area must be >= 0".into()));
        }
        Ok(())
    }
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

/// Watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SystemConfig::<f64>::default().validate().unwrap();
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(25.0) - 0.31622776601683794).abs() < 1e-15);
        assert!((dbm_to_watts(-30.0) - 1e-6).abs() < 1e-18);
        assert!((watts_to_dbm(1e-6) + 30.0).abs() < 1e-12);
    }

    #[test]
    fn frames_must_exceed_array_size() {
        let cfg = SystemConfig::<f64> {
            frames: 5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rho_lb_bounds_checked() {
        let cfg = SystemConfig::<f64> {
            rho_lb: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SystemConfig::<f64> {
            rho_lb: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
