//! Intensity estimators: the Delaunay tessellation field estimator and two
//! fixed-bandwidth kernel estimators.

mod dtfe;
mod kernel;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use dtfe::{
    adaptive_kernel_g, dtfe_evaluate, dtfe_field, kernel_g_integral, total_mass, Correction,
    IntensityEstimate,
};
pub use kernel::{ball_window_volume, berman_diggle, kernel_k, Bandwidth};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("evaluation point lies outside the window")]
    OutsideWindow,
    #[error("point {0} is a ghost point")]
    GhostPoint(usize),
}
