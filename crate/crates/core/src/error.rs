use thiserror::Error;

use crate::synthesis::Feasibility;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Bloch vector norm {norm} exceeds 1")]
    BlochOutsideBall { norm: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("state has eigenvalue {eigenvalue:e} outside [0, 1]")]
    NotPositive { eigenvalue: f64 },

    #[error("state is rank deficient (eigenvalue {eigenvalue:e})")]
    RankDeficient { eigenvalue: f64 },

    #[error("matrix is not unitary (max deviation of U†U from identity {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("mixing parameter {0} is outside [0, 1]")]
    InvalidMixing(f64),

    #[error("temperature must be positive and finite, got kT = {0}")]
    InvalidTemperature(f64),

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("step sequence is empty")]
    EmptySequence,

    #[error("inputs are identical but outputs differ; no channel maps one state to two")]
    OneToMany,

    #[error("task is not feasible: {0}")]
    Infeasible(Feasibility),

    #[error("solved final thermal state is not positive (min eigenvalue {min_eigenvalue:e})")]
    FinalStepInfeasible { min_eigenvalue: f64 },

    #[error("expected {expected} intermediate thermal states, got {got}")]
    ScheduleLength { expected: usize, got: usize },

    #[error("endpoint state is singular (eigenvalue {eigenvalue:e}); supply a smoothing epsilon")]
    SingularEndpoint { eigenvalue: f64 },

    #[error("energy and entropy forms of the heat disagree by {0:e}")]
    AccountingMismatch(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
