//! Synthesis, simulation, optimization and thermodynamic bounds for
//! dual-purpose qubit operations: protocols of unitaries and partial
//! thermalizations that send each of two possible inputs to its own
//! prescribed output.

pub mod baseline;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod objective;
pub mod optimize;
pub mod qubit;
pub mod simplex;
pub mod synthesis;
pub mod thermo;

pub use channel::{
    apply_thermalization, apply_unitary, compose_pair, compose_sequence, conjugate_step,
    generalized_angle, normal_form, PartialThermalization, StepSequence, UnitaryGate,
};
pub use error::{Error, Result};
pub use qubit::{
    bloch_from_density, density_from_bloch, free_energy, gibbs_state, relative_entropy,
    state_hamiltonian, trace_distance, vn_entropy, BlochVector, DensityMatrix, Hamiltonian2,
    Temperature,
};
pub use optimize::{
    n_scan, optimize_protocol, optimize_protocol_with, InitPolicy, OptimizationConfig,
    OptimizationResult, SearchOptions,
};
pub use synthesis::{
    canonical_protocol, canonical_solve, expand_to_n_steps, feasibility_classify, run_protocol,
    CanonicalSolution, Feasibility, FieldSpec, Protocol, TaskSpec,
};
pub use thermo::{
    contact_time, entropy_production, protocol_ledger, step_heat, EnergyLedger, StepHeat,
};
pub use baseline::{single_input_reference, BaselineResult};
pub use bounds::{
    bound_chain_diagnostics, clausius_bound, final_bound, lag_bound, BoundReport, FinalBound,
};
