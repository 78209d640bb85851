//! Poisson moment formulas for the estimators, evaluated in closed form or
//! by (nested) adaptive quadrature, and the exponential integrals they need.

mod identities;
mod kernel_moments;
mod moments1d;
mod nested;
pub mod special;

use thiserror::Error;

use crate::quadrature::QuadratureError;

pub use identities::{
    e1_exponential_integral_identity, e1_square_moment_quadrature, var1d_remainder_h,
};
pub use kernel_moments::{
    bd_moments_poisson, integrate_over_ball_window, kernelk_variance_poisson,
};
pub use moments1d::{
    dtfe_asymptotic_variance_1d, dtfe_mean_1d_poisson, dtfe_second_moment_1d_poisson,
    dtfe_second_moment_1d_poisson_with, dtfe_variance_1d, phi_plus_minus_cdfs, CrossTermRoute,
    Mean1d, PhiCdfs, SecondMoment1d,
};
pub use special::{
    exp_integral_e1, exp_integral_e1_scaled, exp_integral_e2, unit_ball_volume, E1_SQUARE_MOMENT,
    EULER_GAMMA,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadratureError),
}
