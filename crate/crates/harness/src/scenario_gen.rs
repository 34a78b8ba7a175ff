//! Seeded scenario and geometry generation.

use iscsc_core::config::SystemConfig;
use iscsc_core::error::Result;
use iscsc_core::model::{ArrayGeometry, RegionBox, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mixes a base seed with sweep-point and trial indices into an independent
/// stream seed (splitmix64 finalizer).
pub fn derive_seed(base: u64, point: u64, trial: u64) -> u64 {
    let mut z = base
        .wrapping_add(point.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(trial.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds the array layout for the configuration and draws user/target
/// placements; deterministic per seed.
pub fn generate_scenario(
    cfg: &SystemConfig<f64>,
    seed: u64,
) -> Result<(ArrayGeometry<f64>, Scenario<f64>)> {
    let geo = ArrayGeometry::from_config(cfg)?;
    let scenario = Scenario::draw(cfg, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok((geo, scenario))
}

/// Freezes each antenna at a uniformly drawn point of its movable region
/// (the random-placement baseline: positions fixed, beams still optimized).
pub fn randomize_positions(geo: &ArrayGeometry<f64>, seed: u64) -> ArrayGeometry<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fa_positions: Vec<(f64, f64)> = geo
        .fa_regions
        .iter()
        .map(|r| {
            let x = if r.x_max > r.x_min {
                rng.gen_range(r.x_min..=r.x_max)
            } else {
                r.x_min
            };
            let z = if r.z_max > r.z_min {
                rng.gen_range(r.z_min..=r.z_max)
            } else {
                r.z_min
            };
            (x, z)
        })
        .collect();
    ArrayGeometry {
        fa_regions: fa_positions
            .iter()
            .map(|&(x, z)| RegionBox::point(x, z))
            .collect(),
        fa_positions,
        fpa_positions: geo.fpa_positions.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_is_deterministic_and_sized() {
        let cfg = SystemConfig::<f64>::default();
        let (geo, a) = generate_scenario(&cfg, 3).unwrap();
        let (_, b) = generate_scenario(&cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(geo.n_t(), 5);
        assert_eq!(a.users.len(), 5);
        assert_eq!(a.targets.len(), 2);
        let scatterers: usize = a.targets.iter().map(|t| t.scatterers.len()).sum();
        assert_eq!(scatterers, 6);
        for r in &geo.fa_regions {
            let area = (r.x_max - r.x_min) * (r.z_max - r.z_min);
            assert!((area - cfg.region_area).abs() < 1e-12);
        }
    }

    #[test]
    fn randomized_positions_stay_in_regions() {
        let cfg = SystemConfig::<f64>::default();
        let (geo, _) = generate_scenario(&cfg, 1).unwrap();
        let rand_geo = randomize_positions(&geo, 5);
        for (p, r) in rand_geo.fa_positions.iter().zip(&geo.fa_regions) {
            assert!(r.contains(p.0, p.1));
        }
        assert!(rand_geo.fa_regions.iter().all(|r| r.is_point()));
        assert_eq!(rand_geo, randomize_positions(&geo, 5));
        assert_ne!(
            rand_geo.fa_positions,
            randomize_positions(&geo, 6).fa_positions
        );
    }

    #[test]
    fn derived_seeds_differ() {
        let s = derive_seed(7, 0, 0);
        assert_ne!(s, derive_seed(7, 0, 1));
        assert_ne!(s, derive_seed(7, 1, 0));
        assert_eq!(s, derive_seed(7, 0, 0));
    }
}
