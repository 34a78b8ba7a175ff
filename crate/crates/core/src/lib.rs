//! Simulation and optimization library for a fluid-antenna base station that
//! jointly senses extended targets, serves semantic-communication users and
//! budgets the compute power spent on semantic extraction.
//!
//! The crate is organized around the three coupled design blocks:
//!
//! * [`model`] — array geometry, steering vectors, user/target channels and
//!   transmit covariances;
//! * [`metrics`] — estimation error bound, SINRs, semantic/leakage/secrecy
//!   rates and the power split;
//! * [`solver`], [`beamforming`], [`positions`], [`ratios`], [`ao`] — a small
//!   dense interior-point kernel and the block optimizers driven by the
//!   alternating loop in [`ao::run_ao`].
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! concrete `f64` aliases at the crate root are what most callers want.

pub mod ao;
pub mod beamforming;
pub mod config;
pub mod error;
pub mod metrics;
pub mod model;
pub mod positions;
pub mod ratios;
pub mod solver;

pub use error::Error;

use nalgebra as na;

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
///
/// Combines the `num-traits` conversion/constant traits with nalgebra's
/// `RealField` so the same code drives both precisions.
pub trait Real:
    na::RealField
    + num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Default
    + Copy
{
}

impl<T> Real for T where
    T: na::RealField
        + num_traits::Float
        + num_traits::FloatConst
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + Default
        + Copy
{
}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal must be representable")
}

/// Complex number over the working scalar.
pub type Cplx<T> = na::Complex<T>;
/// Dense complex matrix.
pub type CMatrix<T> = na::DMatrix<na::Complex<T>>;
/// Dense complex column vector.
pub type CVector<T> = na::DVector<na::Complex<T>>;
/// Dense real matrix.
pub type RMatrix<T> = na::DMatrix<T>;
/// Dense real column vector.
pub type RVector<T> = na::DVector<T>;

pub type SystemConfig64 = config::SystemConfig<f64>;
pub type ArrayGeometry64 = model::ArrayGeometry<f64>;
pub type Scenario64 = model::Scenario<f64>;
pub type ChannelSet64 = model::ChannelSet<f64>;
pub type BeamformingSolution64 = model::BeamformingSolution<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;
pub type AoTrace64 = ao::AoTrace<f64>;

pub type SystemConfig32 = config::SystemConfig<f32>;
pub type ArrayGeometry32 = model::ArrayGeometry<f32>;
pub type ChannelSet32 = model::ChannelSet<f32>;
