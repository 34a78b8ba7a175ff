//! Physical scenario: array geometry, steering vectors, channels and
//! transmit covariances.

mod channel;
mod geometry;
mod scenario;
mod solution;

pub use channel::{build_channels, rx_steering_vector, tx_steering_vector, ChannelSet};
pub use geometry::{ArrayGeometry, RegionBox};
pub use scenario::{Scatterer, Scenario, TargetSpec, UserSpec};
pub use solution::{hermitian_trace, min_eigenvalue, transmit_covariance, BeamformingSolution};
