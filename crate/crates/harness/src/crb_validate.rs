//! Monte Carlo validation of the estimation error bound: simulate echo
//! frames, fit the echo matrix by least squares and compare the empirical
//! mean-square error with the bound.

use crate::HarnessError;
use iscsc_core::config::SystemConfig;
use iscsc_core::metrics;
use iscsc_core::model::{build_channels, ArrayGeometry, Scenario};
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CMat = DMatrix<Complex<f64>>;

/// Outcome of one validation experiment.
#[derive(Debug, Clone)]
pub struct CrbValidation {
    pub trials: usize,
    pub empirical_mse: f64,
    pub crb_value: f64,
    /// `empirical_mse / crb_value`.
    pub ratio: f64,
    pub frames: usize,
    pub n_t: usize,
    pub n_r: usize,
}

/// Validates the bound with the identity transmit covariance.
pub fn validate_crb(
    cfg: &SystemConfig<f64>,
    trials: usize,
    seed: u64,
) -> Result<CrbValidation, HarnessError> {
    let n_t = cfg.n_t();
    let r_x = CMat::identity(n_t, n_t);
    validate_crb_with(cfg, &r_x, trials, seed)
}

/// Validates the bound for an arbitrary positive-definite transmit
/// covariance: draws probe frames with that exact sample covariance, adds
/// echo noise and fits the echo matrix by least squares over `trials`
/// noise realizations.
pub fn validate_crb_with(
    cfg: &SystemConfig<f64>,
    r_x: &CMat,
    trials: usize,
    seed: u64,
) -> Result<CrbValidation, HarnessError> {
    let n_t = cfg.n_t();
    let n_r = cfg.n_r();
    let frames = cfg.frames;
    if frames <= n_t {
        return Err(HarnessError::Config(format!(
            "frames ({frames}) must exceed the transmit array size ({n_t})"
        )));
    }
    let crb_value = metrics::crb(r_x, cfg).map_err(HarnessError::Core)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // probe frames with exact sample covariance F * R_x: orthonormal rows
    // from the QR of a Gaussian block, colored by the covariance square root
    let gauss = CMat::from_fn(frames, n_t, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let qr = gauss.qr();
    let q = qr.q(); // frames x n_t, orthonormal columns
    let root = hermitian_sqrt(r_x);
    let x = (root * q.adjoint()).map(|e| e * Complex::new((frames as f64).sqrt(), 0.0));

    let xxh = &x * x.adjoint();
    let svals = xxh.clone().symmetric_eigenvalues();
    let max_s = svals.iter().cloned().fold(f64::MIN, f64::max);
    let min_s = svals.iter().cloned().fold(f64::MAX, f64::min);
    if min_s <= 0.0 || max_s / min_s > 1e12 {
        return Err(HarnessError::Core(iscsc_core::Error::SingularDesign {
            cond: if min_s > 0.0 { max_s / min_s } else { f64::INFINITY },
        }));
    }

    let proj = x.adjoint()
        * xxh
            .try_inverse()
            .expect("well-conditioned by the check above");

    // real echo channel for the simulated frames
    let geo = ArrayGeometry::from_config(cfg).map_err(HarnessError::Core)?;
    let scenario = Scenario::draw(cfg, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x47));
    let channels = build_channels(cfg, &geo, &scenario).map_err(HarnessError::Core)?;
    let g = &channels.echo;
    let gx = g * &x;

    let noise_sd = (cfg.sigma_r2 / 2.0).sqrt();
    let mut acc = 0.0f64;
    let normal =
        rand_distr::Normal::new(0.0, 1.0).map_err(|e| HarnessError::Other(e.to_string()))?;
    for _ in 0..trials {
        let noise = CMat::from_fn(n_r, frames, |_, _| {
            Complex::new(noise_sd * rng.sample(normal), noise_sd * rng.sample(normal))
        });
        let z = &gx + noise;
        let g_hat = z * &proj;
        acc += (g_hat - g).norm_squared();
    }
    let empirical_mse = acc / trials as f64;

    Ok(CrbValidation {
        trials,
        empirical_mse,
        crb_value,
        ratio: empirical_mse / crb_value,
        frames,
        n_t,
        n_r,
    })
}

fn hermitian_sqrt(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut root = CMat::zeros(n, n);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let v = eig.eigenvectors.column(i);
            root += (v * v.adjoint()).map(|e| e * Complex::new(l.sqrt(), 0.0));
        }
    }
    root
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> SystemConfig<f64> {
        SystemConfig {
            n_tx: 5,
            n_rx: 7,
            frames: 32,
            sigma_r2: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_limit_has_zero_error() {
        let mut cfg = base_cfg();
        cfg.sigma_r2 = 1e-30;
        let v = validate_crb(&cfg, 50, 1).unwrap();
        assert!(v.empirical_mse < 1e-25);
    }

    #[test]
    fn identity_covariance_matches_bound() {
        let cfg = base_cfg();
        let v = validate_crb(&cfg, 2000, 2).unwrap();
        assert!((v.crb_value - 7.0 * 5.0 / 32.0).abs() < 1e-12);
        assert!(
            v.ratio > 0.95 && v.ratio < 1.05,
            "MSE/CRB = {} off",
            v.ratio
        );
    }

    #[test]
    fn doubling_frames_halves_both_sides() {
        let cfg = base_cfg();
        let v1 = validate_crb(&cfg, 2000, 3).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.frames = 64;
        let v2 = validate_crb(&cfg2, 2000, 3).unwrap();
        assert!((v2.crb_value / v1.crb_value - 0.5).abs() < 1e-12);
        let mse_ratio = v2.empirical_mse / v1.empirical_mse;
        assert!((mse_ratio - 0.5).abs() < 0.05, "mse ratio {mse_ratio}");
    }

    #[test]
    fn too_few_frames_rejected() {
        let mut cfg = base_cfg();
        cfg.frames = 4;
        // config validation also catches this; the validator double-checks
        assert!(validate_crb(&cfg, 10, 1).is_err());
    }
}
