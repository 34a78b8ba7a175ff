//! Steering vectors and channel construction.

use super::{ArrayGeometry, Scenario};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::{real, CMatrix, CVector, Cplx, Real};

/// Per-element phase response of an array of elements at `positions` toward
/// azimuth `theta` / broadside `phi`:
/// `exp(j 2pi/lambda (x cos(theta) sin(phi) + z cos(phi)))`.
fn steering<T: Real>(wavelength: T, theta: T, phi: T, positions: &[(T, T)]) -> CVector<T> {
    let k = real::<T>(2.0) * T::PI() / wavelength;
    let cx = num_traits::Float::cos(theta) * num_traits::Float::sin(phi);
    let cz = num_traits::Float::cos(phi);
    CVector::from_iterator(
        positions.len(),
        positions.iter().map(|&(x, z)| {
            let phase = k * (x * cx + z * cz);
            Cplx::new(num_traits::Float::cos(phase), num_traits::Float::sin(phase))
        }),
    )
}

/// Transmit steering vector over the fluid-antenna positions.
pub fn tx_steering_vector<T: Real>(
    theta: T,
    phi: T,
    wavelength: T,
    fa_positions: &[(T, T)],
) -> CVector<T> {
    steering(wavelength, theta, phi, fa_positions)
}

/// Receive steering vector over the fixed grid positions.
pub fn rx_steering_vector<T: Real>(
    theta: T,
    phi: T,
    wavelength: T,
    fpa_positions: &[(T, T)],
) -> CVector<T> {
    steering(wavelength, theta, phi, fpa_positions)
}

/// Channels of one instance: per-user vectors, per-target composite vectors
/// and the aggregate echo matrix, together with the underlying gains and
/// angles so everything can be re-derived at new antenna positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    /// Per-user channel, length `n_t`.
    pub users: Vec<CVector<T>>,
    /// Per-target composite channel (scatterer sum), length `n_t`.
    pub targets: Vec<CVector<T>>,
    /// Echo matrix, `n_r x n_t`.
    pub echo: CMatrix<T>,
    /// The draw the channels were built from.
    pub scenario: Scenario<T>,
    pub wavelength: T,
}

/// Builds all channels for a scenario at the geometry's current positions.
///
/// Every target must have at least one scatterer.
pub fn build_channels<T: Real>(
    cfg: &SystemConfig<T>,
    geo: &ArrayGeometry<T>,
    scenario: &Scenario<T>,
) -> Result<ChannelSet<T>> {
    if scenario.targets.iter().any(|t| t.scatterers.is_empty()) {
        return Err(Error::EmptyScatterers);
    }
    let n_t = geo.n_t();
    let n_r = geo.n_r();

    let users: Vec<CVector<T>> = scenario
        .users
        .iter()
        .map(|u| {
            tx_steering_vector(u.azimuth, u.broadside, cfg.wavelength, &geo.fa_positions)
                .map(|e| e * u.gain)
        })
        .collect();

    let mut targets = Vec::with_capacity(scenario.targets.len());
    let mut echo = CMatrix::zeros(n_r, n_t);
    for target in &scenario.targets {
        let mut h = CVector::zeros(n_t);
        for s in &target.scatterers {
            let a_t = tx_steering_vector(s.azimuth, s.broadside, cfg.wavelength, &geo.fa_positions);
            h += a_t.map(|e| e * s.forward_gain);
            let a_r =
                rx_steering_vector(s.azimuth, s.broadside, cfg.wavelength, &geo.fpa_positions);
            // echo += beta * a_r a_t^H
            echo += (a_r * a_t.adjoint()).map(|e| e * s.echo_gain);
        }
        targets.push(h);
    }

    Ok(ChannelSet {
        users,
        targets,
        echo,
        scenario: scenario.clone(),
        wavelength: cfg.wavelength,
    })
}

impl<T: Real> ChannelSet<T> {
    pub fn n_t(&self) -> usize {
        self.users
            .first()
            .map(|h| h.len())
            .or_else(|| self.targets.first().map(|h| h.len()))
            .unwrap_or(0)
    }

    /// Re-derives all steering-dependent quantities at new transmit
    /// positions, keeping the drawn gains and angles fixed.
    pub fn at_positions(&self, cfg: &SystemConfig<T>, geo: &ArrayGeometry<T>) -> Result<Self> {
        build_channels(cfg, geo, &self.scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Scatterer, TargetSpec, UserSpec};
    use approx::assert_relative_eq;
    use nalgebra::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LAMBDA: f64 = 0.0857;

    #[test]
    fn single_antenna_at_origin_has_zero_phase() {
        let a = tx_steering_vector(0.73, 1.21, LAMBDA, &[(0.0, 0.0)]);
        assert_relative_eq!(a[0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(a[0].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn half_wavelength_offset_gives_phase_pi() {
        // x = lambda/2, theta = 0, phi = pi/2: phase = pi
        let a = tx_steering_vector(
            0.0,
            std::f64::consts::FRAC_PI_2,
            LAMBDA,
            &[(LAMBDA / 2.0, 0.0)],
        );
        assert_relative_eq!(a[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(a[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_antenna_phases_match_direct_evaluation() {
        // independently evaluated: phase_1 = (pi/2) (cos(pi/4) sin(pi/3) + cos(pi/3))
        let th = std::f64::consts::FRAC_PI_4;
        let ph = std::f64::consts::PI / 3.0;
        let a = tx_steering_vector(th, ph, LAMBDA, &[(0.0, 0.0), (LAMBDA / 4.0, LAMBDA / 4.0)]);
        assert_relative_eq!(a[0].re, 1.0, epsilon = 1e-15);
        let expected = 1.7473105360188463f64; // (pi/2)(cos(pi/4)sin(pi/3)+cos(pi/3))
        assert_relative_eq!(a[1].arg(), expected, epsilon = 1e-12);
        assert_relative_eq!(a[1].re, -0.17559901943196912, epsilon = 1e-12);
        assert_relative_eq!(a[1].im, 0.9844617739529203, epsilon = 1e-12);
    }

    #[test]
    fn rx_grid_phases_match_direct_evaluation() {
        // 7-element lambda/2 grid, theta = pi/6, phi = pi/3: phase_m = 3 pi m / 4
        let positions: Vec<(f64, f64)> = (0..7).map(|m| (m as f64 * LAMBDA / 2.0, 0.0)).collect();
        let a = rx_steering_vector(
            std::f64::consts::FRAC_PI_6,
            std::f64::consts::PI / 3.0,
            LAMBDA,
            &positions,
        );
        for (m, e) in a.iter().enumerate() {
            let phase = 0.75 * std::f64::consts::PI * m as f64;
            assert_relative_eq!(e.re, phase.cos(), epsilon = 1e-12);
            assert_relative_eq!(e.im, phase.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn broadside_phi_makes_z_factor_unity() {
        // phi = pi/2 removes any z dependence
        let a = rx_steering_vector(
            0.4,
            std::f64::consts::FRAC_PI_2,
            LAMBDA,
            &[(0.0, 0.3), (0.0, 0.9)],
        );
        for e in a.iter() {
            assert_relative_eq!(e.re, 1.0, epsilon = 1e-12);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_elements_have_unit_modulus_and_norm() {
        let positions: Vec<(f64, f64)> = (0..6).map(|i| (i as f64 * 0.01, 0.013 * i as f64)).collect();
        let a = tx_steering_vector(0.3, 1.0, LAMBDA, &positions);
        for e in a.iter() {
            assert_relative_eq!(e.norm(), 1.0, epsilon = 1e-14);
        }
        assert_relative_eq!(a.norm_squared(), 6.0, epsilon = 1e-12);
    }

    fn degenerate_cfg() -> SystemConfig<f64> {
        SystemConfig {
            n_tx: 1,
            n_rx: 1,
            users: 1,
            targets: 1,
            scatterers: 1,
            frames: 4,
            ..Default::default()
        }
    }

    #[test]
    fn degenerate_echo_is_unit() {
        let cfg = degenerate_cfg();
        let geo = ArrayGeometry {
            fa_positions: vec![(0.0, 0.0)],
            fa_regions: vec![super::super::RegionBox::point(0.0, 0.0)],
            fpa_positions: vec![(0.0, 0.0)],
        };
        let scenario = Scenario {
            users: vec![UserSpec {
                azimuth: 0.2,
                broadside: 1.4,
                distance: 50.0,
                gain: Complex::new(1.0, 0.0),
            }],
            targets: vec![TargetSpec {
                azimuth: 0.5,
                broadside: 1.5,
                distance: 40.0,
                scatterers: vec![Scatterer {
                    azimuth: 0.5,
                    broadside: 1.5,
                    forward_gain: Complex::new(1.0, 0.0),
                    echo_gain: Complex::new(1.0, 0.0),
                }],
            }],
        };
        let ch = build_channels(&cfg, &geo, &scenario).unwrap();
        assert_eq!(ch.echo.shape(), (1, 1));
        assert_relative_eq!(ch.echo[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(ch.echo[(0, 0)].im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn empty_scatterers_rejected() {
        let cfg = degenerate_cfg();
        let geo = ArrayGeometry {
            fa_positions: vec![(0.0, 0.0)],
            fa_regions: vec![super::super::RegionBox::point(0.0, 0.0)],
            fpa_positions: vec![(0.0, 0.0)],
        };
        let scenario = Scenario::<f64> {
            users: vec![],
            targets: vec![TargetSpec {
                azimuth: 0.0,
                broadside: 1.5,
                distance: 40.0,
                scatterers: vec![],
            }],
        };
        assert!(matches!(
            build_channels(&cfg, &geo, &scenario),
            Err(Error::EmptyScatterers)
        ));
    }

    #[test]
    fn user_channel_norm_matches_gain() {
        let cfg = SystemConfig::<f64>::default();
        let geo = ArrayGeometry::from_config(&cfg).unwrap();
        let scenario = Scenario::draw(&cfg, &mut ChaCha8Rng::seed_from_u64(11));
        let ch = build_channels(&cfg, &geo, &scenario).unwrap();
        for (h, u) in ch.users.iter().zip(scenario.users.iter()) {
            let expect = u.gain.norm() * (cfg.n_t() as f64).sqrt();
            assert_relative_eq!(h.norm(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn echo_matches_double_sum_oracle() {
        let cfg = SystemConfig::<f64> {
            targets: 2,
            scatterers: 3,
            ..Default::default()
        };
        let geo = ArrayGeometry::from_config(&cfg).unwrap();
        let scenario = Scenario::draw(&cfg, &mut ChaCha8Rng::seed_from_u64(42));
        let ch = build_channels(&cfg, &geo, &scenario).unwrap();

        // entrywise brute-force accumulation straight from the definition
        let k = 2.0 * std::f64::consts::PI / cfg.wavelength;
        let mut oracle = CMatrix::<f64>::zeros(cfg.n_r(), cfg.n_t());
        for t in &scenario.targets {
            for s in &t.scatterers {
                let cx = s.azimuth.cos() * s.broadside.sin();
                let cz = s.broadside.cos();
                for (m, &(xr, zr)) in geo.fpa_positions.iter().enumerate() {
                    for (i, &(xt, zt)) in geo.fa_positions.iter().enumerate() {
                        let pr = k * (xr * cx + zr * cz);
                        let pt = k * (xt * cx + zt * cz);
                        let ar = Complex::new(pr.cos(), pr.sin());
                        let at = Complex::new(pt.cos(), pt.sin());
                        oracle[(m, i)] += s.echo_gain * ar * at.conj();
                    }
                }
            }
        }
        assert!((ch.echo.clone() - oracle).norm() < 1e-12);
    }

    #[test]
    fn echo_rank_bounded_by_scatterer_count() {
        let cfg = SystemConfig::<f64> {
            targets: 1,
            scatterers: 2,
            ..Default::default()
        };
        let geo = ArrayGeometry::from_config(&cfg).unwrap();
        let scenario = Scenario::draw(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let ch = build_channels(&cfg, &geo, &scenario).unwrap();
        let svals = ch.echo.clone().singular_values();
        let rank = svals.iter().filter(|s| **s > 1e-10 * svals[0]).count();
        assert!(rank <= 2);
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let cfg = SystemConfig::<f64>::default();
        let geo = ArrayGeometry::from_config(&cfg).unwrap();
        let scenario = Scenario::draw(&cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let a = build_channels(&cfg, &geo, &scenario).unwrap();
        let b = build_channels(&cfg, &geo, &scenario).unwrap();
        assert_eq!(a, b);
        let c = a.at_positions(&cfg, &geo).unwrap();
        assert_eq!(a, c);
    }
}
