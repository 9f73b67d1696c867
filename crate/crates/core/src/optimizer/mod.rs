//! Entangled flux allocation: choose which link each channel pair serves and
//! how much total flux the source emits.

mod brute;
mod fitness;
mod ga;
mod network;

pub use brute::{brute_force_optimize, BruteForceOptions, BruteForceResult, MAX_COMPOSITIONS};
pub use fitness::{
    fitness, ideal_fitness, FitnessModel, FitnessReport, IdealFitness, LinkStatus, LinkTarget,
    PENALTY,
};
pub use ga::{
    best_of_runs, ga_optimize, BestOfRuns, GaConfig, GaResult, GenerationStats, STALL_TOL,
};
pub use network::{link_fluxes, Allocation, FluxMode, NetworkSpec};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::link::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("link {0:?} cannot be entangled at any flux")]
    Unentangleable(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("fidelity threshold unreachable on links {0:?}")]
    InfeasibleLinks(Vec<String>),
    #[error("{compositions} compositions exceed the enumeration cap of {cap}")]
    TooLarge { compositions: u128, cap: u128 },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
