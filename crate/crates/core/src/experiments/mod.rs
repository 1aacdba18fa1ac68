//! Run configuration, the erosion study, report files and the command-line driver.

mod cli;
mod config;
mod erosion;
mod report;
mod setup;

pub use cli::{cli_main, run_command, Command};
pub use config::{ConfigError, RunConfig};
pub use erosion::{
    cutoff_rayleigh_bound, run_erosion_study, BandRow, EnvelopeRow, ExponentFit, RayleighBounds, StabilityReport, StabilityRow,
};
pub use report::{write_decay_csv, write_hardy_csv, write_json, write_palpha_csv, write_stability_csv};
pub use setup::Discretization;

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::finsler::FinslerError;
use crate::geometry::GeometryError;
use crate::spectral::SpectralError;
use crate::verifier::VerifierError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Finsler(#[from] FinslerError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("{0}")]
    Unconverged(String),
}

impl ExperimentError {
    /// 2 for configuration problems, 3 for solver and i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Geometry(_) => 2,
            _ => 3,
        }
    }

    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            _ => match self {
                ExperimentError::Io(_) => "io",
                _ => "solver",
            },
        }
    }
}
