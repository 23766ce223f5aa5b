use thiserror::Error;

/// Errors produced by builders, validators, solvers and the integrator.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration set could not be built from the given description.
    #[error("invalid configuration set: {0}")]
    InvalidConfigSet(String),

    /// A system specification or scenario failed validation.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A state vector is inconsistent with its configuration set.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An iterative solver failed to converge.
    #[error("solver failure: {0}")]
    Solver(String),

    /// The ODE integrator detected a step it cannot trust.
    #[error("integration failure: {0}")]
    Integration(String),

    /// A trajectory analysis was asked for something the data cannot support.
    #[error("analysis error: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
