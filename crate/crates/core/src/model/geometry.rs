//! Transmit-array regions and receive-grid coordinates.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::{real, Real};

/// Axis-aligned rectangular region in the array plane, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBox<T> {
    pub x_min: T,
    pub x_max: T,
    pub z_min: T,
    pub z_max: T,
}

impl<T: Real> RegionBox<T> {
    pub fn point(x: T, z: T) -> Self {
        Self {
            x_min: x,
            x_max: x,
            z_min: z,
            z_max: z,
        }
    }

    pub fn square(center_x: T, center_z: T, side: T) -> Self {
        let h = side / real(2.0);
        Self {
            x_min: center_x - h,
            x_max: center_x + h,
            z_min: center_z - h,
            z_max: center_z + h,
        }
    }

    pub fn center(&self) -> (T, T) {
        let two = real(2.0);
        ((self.x_min + self.x_max) / two, (self.z_min + self.z_max) / two)
    }

    pub fn contains(&self, x: T, z: T) -> bool {
        x >= self.x_min && x <= self.x_max && z >= self.z_min && z <= self.z_max
    }

    pub fn clamp(&self, x: T, z: T) -> (T, T) {
        (
            nalgebra::clamp(x, self.x_min, self.x_max),
            nalgebra::clamp(z, self.z_min, self.z_max),
        )
    }

    /// True when the box has zero extent along both axes.
    pub fn is_point(&self) -> bool {
        self.x_max == self.x_min && self.z_max == self.z_min
    }

    fn interior_overlaps(&self, other: &Self) -> bool {
        self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.z_min < other.z_max
            && other.z_min < self.z_max
    }
}

/// Fluid-antenna positions with their movable regions, plus the fixed
/// receive grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T> {
    /// Current transmit-antenna coordinates (x_i, z_i).
    pub fa_positions: Vec<(T, T)>,
    /// Movable region of each transmit antenna.
    pub fa_regions: Vec<RegionBox<T>>,
    /// Fixed receive-antenna coordinates.
    pub fpa_positions: Vec<(T, T)>,
}

impl<T: Real> ArrayGeometry<T> {
    /// Builds the default layout for a configuration: transmit antennas at
    /// the centers of disjoint square regions on a grid, receive antennas on
    /// the fixed `(m d_x, m d_z)` grid.
    ///
    /// The region grid pitch is the larger of the nominal antenna spacing and
    /// the region side, so that boxes never overlap regardless of the
    /// configured area.
    pub fn from_config(cfg: &SystemConfig<T>) -> Result<Self> {
        let side = num_traits::Float::sqrt(cfg.region_area);
        let pitch_x = if side > cfg.d_x { side } else { cfg.d_x };
        let pitch_z = if side > cfg.d_z { side } else { cfg.d_z };

        let mut fa_positions = Vec::with_capacity(cfg.n_t());
        let mut fa_regions = Vec::with_capacity(cfg.n_t());
        for iz in 0..cfg.n_tz {
            for ix in 0..cfg.n_tx {
                let cx = T::from_usize(ix).unwrap() * pitch_x;
                let cz = T::from_usize(iz).unwrap() * pitch_z;
                fa_positions.push((cx, cz));
                fa_regions.push(RegionBox::square(cx, cz, side));
            }
        }

        let mut fpa_positions = Vec::with_capacity(cfg.n_r());
        for mz in 0..cfg.n_rz {
            for mx in 0..cfg.n_rx {
                fpa_positions.push((
                    T::from_usize(mx).unwrap() * cfg.d_x,
                    T::from_usize(mz).unwrap() * cfg.d_z,
                ));
            }
        }

        let geo = Self {
            fa_positions,
            fa_regions,
            fpa_positions,
        };
        geo.validate()?;
        Ok(geo)
    }

    /// Replaces every movable region by the single point the antenna sits at,
    /// turning the array into a conventional fixed-position one.
    pub fn frozen(&self) -> Self {
        Self {
            fa_positions: self.fa_positions.clone(),
            fa_regions: self
                .fa_positions
                .iter()
                .map(|&(x, z)| RegionBox::point(x, z))
                .collect(),
            fpa_positions: self.fpa_positions.clone(),
        }
    }

    pub fn n_t(&self) -> usize {
        self.fa_positions.len()
    }

    pub fn n_r(&self) -> usize {
        self.fpa_positions.len()
    }

    /// Checks that every antenna lies inside its region and that region
    /// interiors are pairwise disjoint.
    pub fn validate(&self) -> Result<()> {
        if self.fa_positions.len() != self.fa_regions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.fa_positions.len(),
                got: self.fa_regions.len(),
            });
        }
        for (i, (&(x, z), region)) in self
            .fa_positions
            .iter()
            .zip(self.fa_regions.iter())
            .enumerate()
        {
            if !region.contains(x, z) {
                return Err(Error::Domain(format!(
                    "antenna {i} at ({x:?}, {z:?}) lies outside its region"
                )));
            }
        }
        for i in 0..self.fa_regions.len() {
            for j in (i + 1)..self.fa_regions.len() {
                if self.fa_regions[i].interior_overlaps(&self.fa_regions[j]) {
                    return Err(Error::Domain(format!("regions {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    /// Flattens positions into `[x_0, z_0, x_1, z_1, ...]`.
    pub fn position_vector(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(2 * self.fa_positions.len());
        for &(x, z) in &self.fa_positions {
            v.push(x);
            v.push(z);
        }
        v
    }

    /// Rebuilds the geometry with positions taken from a flattened vector.
    pub fn with_position_vector(&self, u: &[T]) -> Result<Self> {
        if u.len() != 2 * self.fa_positions.len() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.fa_positions.len(),
                got: u.len(),
            });
        }
        let fa_positions: Vec<(T, T)> = u.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let geo = Self {
            fa_positions,
            fa_regions: self.fa_regions.clone(),
            fpa_positions: self.fpa_positions.clone(),
        };
        geo.validate()?;
        Ok(geo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SystemConfig<f64> {
        SystemConfig::default()
    }

    #[test]
    fn default_regions_have_configured_area() {
        let geo = ArrayGeometry::from_config(&cfg()).unwrap();
        assert_eq!(geo.n_t(), 5);
        assert_eq!(geo.n_r(), 7);
        for r in &geo.fa_regions {
            let area = (r.x_max - r.x_min) * (r.z_max - r.z_min);
            assert!((area - 0.0025).abs() < 1e-12);
        }
    }

    #[test]
    fn regions_disjoint_even_when_side_exceeds_spacing() {
        // side 0.05 m > lambda/2 ~ 0.0428 m: the pitch grows to keep regions apart
        let geo = ArrayGeometry::from_config(&cfg()).unwrap();
        geo.validate().unwrap();
        let (c0, _) = geo.fa_regions[0].center();
        let (c1, _) = geo.fa_regions[1].center();
        assert!(c1 - c0 >= 0.05 - 1e-12);
    }

    #[test]
    fn small_regions_sit_on_antenna_grid() {
        let mut c = cfg();
        c.region_area = 0.0004; // side 0.02 < lambda/2
        let geo = ArrayGeometry::from_config(&c).unwrap();
        let (c0, _) = geo.fa_regions[0].center();
        let (c1, _) = geo.fa_regions[1].center();
        assert!((c1 - c0 - c.d_x).abs() < 1e-12);
    }

    #[test]
    fn out_of_region_position_rejected() {
        let mut geo = ArrayGeometry::from_config(&cfg()).unwrap();
        geo.fa_positions[0].0 += 1.0;
        assert!(geo.validate().is_err());
    }

    #[test]
    fn frozen_geometry_is_all_points() {
        let geo = ArrayGeometry::from_config(&cfg()).unwrap().frozen();
        assert!(geo.fa_regions.iter().all(|r| r.is_point()));
        geo.validate().unwrap();
    }

    #[test]
    fn position_vector_round_trip() {
        let geo = ArrayGeometry::from_config(&cfg()).unwrap();
        let u = geo.position_vector();
        let geo2 = geo.with_position_vector(&u).unwrap();
        assert_eq!(geo, geo2);
    }
}
