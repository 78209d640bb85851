//! File formats, configuration, Monte Carlo experiments and the command-line
//! front end for the `dtfe-core` estimators.

use dtfe_core::analytic::AnalyticError;
use dtfe_core::estimators::EstimatorError;
use dtfe_core::geometry::GeometryError;
use dtfe_core::pointprocess::ProcessError;
use thiserror::Error;

pub mod cli;
pub mod config;
pub mod io;
pub mod montecarlo;
pub mod verify;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    /// Bad configuration or input files are usage errors; everything else
    /// happened while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Input(_) => cli::EXIT_USAGE,
            _ => cli::EXIT_RUNTIME,
        }
    }
}
