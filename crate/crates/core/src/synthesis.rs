//! Closed-form synthesis of the single-step protocol `U∘T` mapping
//! `ρ₁ ↦ η₁` and `ρ₂ ↦ η₂`, its feasibility classification, expansion to
//! N-step schedules, and protocol execution.
//!
//! Subtracting the two mapping conditions gives
//! `λU(ρ₁−ρ₂)U† = η₁−η₂`, so `λ` is the ratio of trace distances and `U`
//! rotates the Bloch direction of `ρ₁−ρ₂` onto that of `η₁−η₂`. That leaves
//! a rotation about the output axis undetermined; we take the rotation of
//! least angle. The thermal target then follows from either condition:
//! `τ = (U†η₁U − λρ₁)/(1−λ)`.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::channel::{compose_sequence, PartialThermalization, StepSequence, UnitaryGate};
use crate::error::{Error, Result};
use crate::linalg::{HermitianEigen, Mat2};
use crate::qubit::{trace_distance, BlochVector, DensityMatrix, Hamiltonian2, Temperature, EPS_PSD};

/// Bloch-vector differences at or below this length count as zero.
pub const EPS_DEGENERATE: f64 = 1e-12;

/// Bloch axis and scale of a Hamiltonian `E₀ n̂·σ`, kept exactly as given so
/// that serialization round trips bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub e0: f64,
    pub axis: BlochVector,
}

impl FieldSpec {
    pub fn sigma_z(e0: f64) -> Self {
        FieldSpec { e0, axis: BlochVector::new(0.0, 0.0, 1.0) }
    }

    pub fn hamiltonian(&self) -> Hamiltonian2 {
        Hamiltonian2::from_field(self.e0, self.axis)
    }

    /// Unit energy axis; the z axis when none is given.
    pub fn unit_axis(&self) -> BlochVector {
        self.axis.normalized().unwrap_or(BlochVector::new(0.0, 0.0, 1.0))
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::sigma_z(1.0)
    }
}

/// A state in a task file: a Bloch triple, or `{"matrix": [[[re, im], ..], ..]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateEncoding {
    Bloch(BlochVector),
    Matrix { matrix: Mat2 },
}

impl StateEncoding {
    pub fn decode(&self) -> Result<DensityMatrix> {
        match self {
            StateEncoding::Bloch(r) => DensityMatrix::from_bloch(*r),
            StateEncoding::Matrix { matrix } => DensityMatrix::from_matrix(*matrix),
        }
    }
}

/// Wire form of [`TaskSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub rho1: StateEncoding,
    pub rho2: StateEncoding,
    pub eta1: StateEncoding,
    pub eta2: StateEncoding,
    #[serde(default = "half")]
    pub p1: f64,
    #[serde(default)]
    pub h0: FieldSpec,
    #[serde(default = "one")]
    pub kt: f64,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

/// A dual-purpose task: inputs `ρ₁, ρ₂` with prior `p₁, 1−p₁`, required
/// outputs `η₁, η₂`, reference Hamiltonian `H₀` and bath temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaskFile", into = "TaskFile")]
pub struct TaskSpec {
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    eta1: DensityMatrix,
    eta2: DensityMatrix,
    p1: f64,
    h0: FieldSpec,
    temperature: Temperature,
}

impl TryFrom<TaskFile> for TaskSpec {
    type Error = Error;
    fn try_from(f: TaskFile) -> Result<Self> {
        TaskSpec::new(
            [f.rho1.decode()?, f.rho2.decode()?],
            [f.eta1.decode()?, f.eta2.decode()?],
            f.p1,
            f.h0,
            Temperature::new(f.kt)?,
        )
    }
}

impl From<TaskSpec> for TaskFile {
    fn from(t: TaskSpec) -> TaskFile {
        let enc = |d: DensityMatrix| StateEncoding::Bloch(d.bloch());
        TaskFile {
            rho1: enc(t.rho1),
            rho2: enc(t.rho2),
            eta1: enc(t.eta1),
            eta2: enc(t.eta2),
            p1: t.p1,
            h0: t.h0,
            kt: t.temperature.kt(),
        }
    }
}

impl TaskSpec {
    /// Fails with [`Error::OneToMany`] when the inputs coincide but the
    /// outputs do not.
    pub fn new(
        inputs: [DensityMatrix; 2],
        outputs: [DensityMatrix; 2],
        p1: f64,
        h0: FieldSpec,
        temperature: Temperature,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidProbability(p1));
        }
        if !(h0.e0.is_finite() && h0.axis.norm().is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite H0 field {h0:?}")));
        }
        let [rho1, rho2] = inputs;
        let [eta1, eta2] = outputs;
        let din = (rho1.bloch() - rho2.bloch()).norm();
        let dout = (eta1.bloch() - eta2.bloch()).norm();
        if din <= EPS_DEGENERATE && dout > EPS_DEGENERATE {
            return Err(Error::OneToMany);
        }
        Ok(TaskSpec { rho1, rho2, eta1, eta2, p1, h0, temperature })
    }

    /// Same task with `p₁ = ½` and `H₀ = σ_z`, `kT = 1`.
    pub fn with_defaults(inputs: [DensityMatrix; 2], outputs: [DensityMatrix; 2]) -> Result<Self> {
        Self::new(inputs, outputs, 0.5, FieldSpec::default(), Temperature::default())
    }

    pub fn from_bloch(r1: [f64; 3], r2: [f64; 3], s1: [f64; 3], s2: [f64; 3]) -> Result<Self> {
        let d = |a: [f64; 3]| DensityMatrix::from_bloch(a.into());
        Self::with_defaults([d(r1)?, d(r2)?], [d(s1)?, d(s2)?])
    }

    pub fn rho1(&self) -> &DensityMatrix {
        &self.rho1
    }

    pub fn rho2(&self) -> &DensityMatrix {
        &self.rho2
    }

    pub fn eta1(&self) -> &DensityMatrix {
        &self.eta1
    }

    pub fn eta2(&self) -> &DensityMatrix {
        &self.eta2
    }

    pub fn inputs(&self) -> [DensityMatrix; 2] {
        [self.rho1, self.rho2]
    }

    pub fn outputs(&self) -> [DensityMatrix; 2] {
        [self.eta1, self.eta2]
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn field(&self) -> FieldSpec {
        self.h0
    }

    pub fn h0(&self) -> Hamiltonian2 {
        self.h0.hamiltonian()
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn kt(&self) -> f64 {
        self.temperature.kt()
    }

    pub fn rho_bar(&self) -> DensityMatrix {
        self.rho1.mix(self.p1, &self.rho2)
    }

    pub fn eta_bar(&self) -> DensityMatrix {
        self.eta1.mix(self.p1, &self.eta2)
    }

    pub fn with_p1(&self, p1: f64) -> Result<Self> {
        Self::new(self.inputs(), self.outputs(), p1, self.h0, self.temperature)
    }

    pub fn with_temperature(&self, t: Temperature) -> Self {
        TaskSpec { temperature: t, ..*self }
    }

    pub fn with_field(&self, h0: FieldSpec) -> Self {
        TaskSpec { h0, ..*self }
    }

    /// The task with all four states (and `H₀`) rotated by `u`.
    pub fn rotated(&self, u: &UnitaryGate) -> Self {
        let axis = u.rotate(self.h0.axis);
        TaskSpec {
            rho1: u.apply(&self.rho1),
            rho2: u.apply(&self.rho2),
            eta1: u.apply(&self.eta1),
            eta2: u.apply(&self.eta2),
            h0: FieldSpec { e0: self.h0.e0, axis },
            ..*self
        }
    }

    /// `ρᵢ = ηᵢ` for both inputs.
    pub fn is_identity(&self) -> bool {
        (self.rho1.bloch() - self.eta1.bloch()).norm() <= EPS_DEGENERATE
            && (self.rho2.bloch() - self.eta2.bloch()).norm() <= EPS_DEGENERATE
    }

    /// `η₁ = η₂`.
    pub fn is_erasure(&self) -> bool {
        (self.eta1.bloch() - self.eta2.bloch()).norm() <= EPS_DEGENERATE
    }
}

/// Outcome of the feasibility check, with the offending value for the two
/// infeasible cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feasibility {
    /// `near_boundary` is set when `τ` has an eigenvalue in `[−EPS_PSD, 0)`;
    /// the work cost of such tasks diverges.
    Feasible { near_boundary: bool },
    LambdaExceedsOne { lambda: f64 },
    TauNotPositive { min_eigenvalue: f64 },
    /// `η₁ = η₂`: one full thermalization to `τ = η₁`.
    DegenerateErasure,
    /// Equal trace distances: a unitary alone does the job.
    DegenerateUnitary,
    IdentityTask,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Feasibility::LambdaExceedsOne { .. } | Feasibility::TauNotPositive { .. })
    }

    /// Tasks realized by a unitary alone.
    pub fn is_unitary(&self) -> bool {
        matches!(self, Feasibility::DegenerateUnitary | Feasibility::IdentityTask)
    }

    pub fn witness(&self) -> Option<f64> {
        match self {
            Feasibility::LambdaExceedsOne { lambda } => Some(*lambda),
            Feasibility::TauNotPositive { min_eigenvalue } => Some(*min_eigenvalue),
            _ => None,
        }
    }

    /// Stable short code used in CSV output.
    pub fn code(&self) -> &'static str {
        match self {
            Feasibility::Feasible { near_boundary: false } => "feasible",
            Feasibility::Feasible { near_boundary: true } => "feasible_boundary",
            Feasibility::LambdaExceedsOne { .. } => "lambda_exceeds_one",
            Feasibility::TauNotPositive { .. } => "tau_not_positive",
            Feasibility::DegenerateErasure => "erasure",
            Feasibility::DegenerateUnitary => "unitary",
            Feasibility::IdentityTask => "identity",
        }
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feasibility::Feasible { near_boundary: false } => write!(f, "feasible"),
            Feasibility::Feasible { near_boundary: true } => {
                write!(f, "feasible (thermal target on the Bloch sphere surface)")
            }
            Feasibility::LambdaExceedsOne { lambda } => {
                write!(f, "outputs are more distinguishable than inputs (lambda = {lambda})")
            }
            Feasibility::TauNotPositive { min_eigenvalue } => {
                write!(f, "thermal target is not positive (min eigenvalue = {min_eigenvalue})")
            }
            Feasibility::DegenerateErasure => write!(f, "erasure (identical outputs)"),
            Feasibility::DegenerateUnitary => write!(f, "unitary (no thermalization needed)"),
            Feasibility::IdentityTask => write!(f, "identity task"),
        }
    }
}

/// Spectral data `ρ₁−ρ₂ = p(|ψ₊⟩⟨ψ₊| − |ψ₋⟩⟨ψ₋|)` and
/// `η₁−η₂ = q(|φ₊⟩⟨φ₊| − |φ₋⟩⟨φ₋|)`, with `|φ±⟩ = U|ψ±⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    pub p: f64,
    pub psi_plus: [C64; 2],
    pub psi_minus: [C64; 2],
    pub q: f64,
    pub phi_plus: [C64; 2],
    pub phi_minus: [C64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSolution {
    pub lambda: f64,
    pub u: UnitaryGate,
    /// Bloch vector of the thermal target. May lie outside the unit ball
    /// when the task is infeasible; meaningless for unitary tasks.
    pub tau: BlochVector,
    pub feasibility: Feasibility,
    pub diagnostics: Option<SpectralDiagnostics>,
    /// Largest trace distance between `U T(ρᵢ)` and `ηᵢ`, when feasible.
    pub verification_error: Option<f64>,
}

impl CanonicalSolution {
    /// Smallest eigenvalue `(1 − |t|)/2` of the thermal target.
    pub fn tau_min_eigenvalue(&self) -> f64 {
        0.5 * (1.0 - self.tau.norm())
    }

    /// The thermal target as a state. Targets within tolerance of the
    /// sphere are projected onto it.
    pub fn tau_state(&self) -> Result<DensityMatrix> {
        let n = self.tau.norm();
        if 0.5 * (1.0 - n) < -EPS_PSD || !n.is_finite() {
            return Err(Error::NotPositive { eigenvalue: 0.5 * (1.0 - n) });
        }
        let r = if n > 1.0 { self.tau * (1.0 / n) } else { self.tau };
        Ok(DensityMatrix::from_bloch_unchecked(r))
    }

    pub fn step(&self) -> Result<PartialThermalization> {
        PartialThermalization::new(self.lambda.clamp(0.0, 1.0), self.tau_state()?)
    }
}

/// Solves for `(λ, U, τ)` and classifies the task.
pub fn canonical_solve(task: &TaskSpec) -> Result<CanonicalSolution> {
    let r1 = task.rho1.bloch();
    let r2 = task.rho2.bloch();
    let s1 = task.eta1.bloch();
    let s2 = task.eta2.bloch();
    let d = r1 - r2;
    let e = s1 - s2;

    if task.is_identity() {
        return Ok(CanonicalSolution {
            lambda: 1.0,
            u: UnitaryGate::identity(),
            tau: BlochVector::ZERO,
            feasibility: Feasibility::IdentityTask,
            diagnostics: diagnostics(d, e, &UnitaryGate::identity()),
            verification_error: Some(0.0),
        });
    }
    if task.is_erasure() {
        let mut sol = CanonicalSolution {
            lambda: 0.0,
            u: UnitaryGate::identity(),
            tau: s1,
            feasibility: Feasibility::DegenerateErasure,
            diagnostics: None,
            verification_error: None,
        };
        sol.verification_error = Some(verify(task, &sol));
        return Ok(sol);
    }
    if d.norm() <= EPS_DEGENERATE {
        return Err(Error::OneToMany);
    }

    let lambda = e.norm() / d.norm();
    let mut u = UnitaryGate::aligning(d, e);

    if lambda > 1.0 + EPS_PSD {
        return Ok(CanonicalSolution {
            lambda,
            u,
            tau: BlochVector::ZERO,
            feasibility: Feasibility::LambdaExceedsOne { lambda },
            diagnostics: diagnostics(d, e, &u),
            verification_error: None,
        });
    }

    if (lambda - 1.0).abs() <= EPS_PSD {
        // Pin the free rotation about the output axis so that ρ₁ lands on η₁.
        let axis = e.normalized().expect("nonzero output difference");
        let img = u.apply(&task.rho1).bloch();
        let a = img - axis * img.dot(&axis);
        let b = s1 - axis * s1.dot(&axis);
        if a.norm() > EPS_DEGENERATE && b.norm() > EPS_DEGENERATE {
            let phi = axis.dot(&a.cross(&b)).atan2(a.dot(&b));
            u = UnitaryGate::rotation(axis, phi).after(&u);
        }
        let err = trace_distance(&u.apply(&task.rho1), &task.eta1)
            .max(trace_distance(&u.apply(&task.rho2), &task.eta2));
        let feasibility = if err <= EPS_PSD {
            Feasibility::DegenerateUnitary
        } else {
            Feasibility::TauNotPositive { min_eigenvalue: f64::NEG_INFINITY }
        };
        return Ok(CanonicalSolution {
            lambda,
            u,
            tau: BlochVector::ZERO,
            feasibility,
            diagnostics: diagnostics(d, e, &u),
            verification_error: feasibility.is_feasible().then_some(err),
        });
    }

    let pulled = u.adjoint().apply(&task.eta1).bloch();
    let tau = (pulled - r1 * lambda) * (1.0 / (1.0 - lambda));
    let min_eig = 0.5 * (1.0 - tau.norm());
    let feasibility = if min_eig >= -EPS_PSD {
        Feasibility::Feasible { near_boundary: min_eig < 0.0 }
    } else {
        Feasibility::TauNotPositive { min_eigenvalue: min_eig }
    };
    let mut sol = CanonicalSolution {
        lambda,
        u,
        tau,
        feasibility,
        diagnostics: diagnostics(d, e, &u),
        verification_error: None,
    };
    if feasibility.is_feasible() {
        sol.verification_error = Some(verify(task, &sol));
    }
    Ok(sol)
}

fn diagnostics(d: BlochVector, e: BlochVector, u: &UnitaryGate) -> Option<SpectralDiagnostics> {
    if d.norm() <= EPS_DEGENERATE {
        return None;
    }
    let ed = HermitianEigen::from_pauli(0.0, (d * 0.5).as_array());
    let phi_plus = u.matrix().apply(&ed.vectors[0]);
    let phi_minus = u.matrix().apply(&ed.vectors[1]);
    Some(SpectralDiagnostics {
        p: ed.values[0],
        psi_plus: ed.vectors[0],
        psi_minus: ed.vectors[1],
        q: 0.5 * e.norm(),
        phi_plus,
        phi_minus,
    })
}

fn verify(task: &TaskSpec, sol: &CanonicalSolution) -> f64 {
    let Ok(step) = sol.step() else {
        return f64::INFINITY;
    };
    let out1 = sol.u.apply(&step.apply(&task.rho1));
    let out2 = sol.u.apply(&step.apply(&task.rho2));
    trace_distance(&out1, &task.eta1).max(trace_distance(&out2, &task.eta2))
}

pub fn feasibility_classify(task: &TaskSpec) -> Feasibility {
    canonical_solve(task)
        .map(|s| s.feasibility)
        .expect("TaskSpec construction rejects one-to-many tasks")
}

/// A feasible task's protocol `U T_N ⋯ T₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub task: TaskSpec,
    pub steps: StepSequence,
}

impl Protocol {
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.steps.lambdas()
    }

    pub fn taus(&self) -> Vec<DensityMatrix> {
        self.steps.steps.iter().map(|s| *s.tau()).collect()
    }

    pub fn closing(&self) -> &UnitaryGate {
        &self.steps.closing
    }

    /// Largest trace distance between the protocol's outputs and the task's.
    pub fn mapping_error(&self) -> f64 {
        let e1 = trace_distance(&self.steps.apply(&self.task.rho1), &self.task.eta1);
        let e2 = trace_distance(&self.steps.apply(&self.task.rho2), &self.task.eta2);
        e1.max(e2)
    }

    /// The unitary-only protocol of a unitary task.
    pub fn unitary(task: TaskSpec, u: UnitaryGate) -> Self {
        Protocol { task, steps: StepSequence::new(Vec::new(), u) }
    }
}

/// `N` steps with `λᵢ = λ^{1/N}`, free targets `τ₁..τ_{N−1}`, and `τ_N`
/// solved so the sequence composes to the canonical `(λ, τ)`.
pub fn expand_to_n_steps(
    task: &TaskSpec,
    canonical: &CanonicalSolution,
    n: usize,
    taus: &[DensityMatrix],
) -> Result<Protocol> {
    if n == 0 {
        return Err(Error::InvalidConfig("number of steps must be at least 1".into()));
    }
    if canonical.feasibility.is_unitary() {
        return Ok(Protocol::unitary(*task, canonical.u));
    }
    let mu = canonical.lambda.powf(1.0 / n as f64);
    expand_with_schedule(task, canonical, &vec![mu; n], taus)
}

/// Like [`expand_to_n_steps`] with an arbitrary schedule whose product is
/// the canonical `λ` and whose last entry is below 1.
pub fn expand_with_schedule(
    task: &TaskSpec,
    canonical: &CanonicalSolution,
    lambdas: &[f64],
    taus: &[DensityMatrix],
) -> Result<Protocol> {
    if !canonical.feasibility.is_feasible() {
        return Err(Error::Infeasible(canonical.feasibility));
    }
    if canonical.feasibility.is_unitary() {
        return Ok(Protocol::unitary(*task, canonical.u));
    }
    let Some((&last, head)) = lambdas.split_last() else {
        return Err(Error::EmptySequence);
    };
    if taus.len() != head.len() {
        return Err(Error::ScheduleLength { expected: head.len(), got: taus.len() });
    }
    let product: f64 = lambdas.iter().product();
    if !(last < 1.0) || (product - canonical.lambda).abs() > 1e-12 * canonical.lambda.max(1e-300) + 1e-15 {
        return Err(Error::InvalidConfig(format!(
            "schedule product {product} does not match lambda {} with final entry below 1",
            canonical.lambda
        )));
    }
    let mut steps = head
        .iter()
        .zip(taus)
        .map(|(&l, t)| PartialThermalization::new(l, *t))
        .collect::<Result<Vec<_>>>()?;

    let t_can = canonical.tau_state()?.bloch();
    let t_last = if steps.is_empty() {
        t_can
    } else {
        let prior = compose_sequence(&steps)?;
        let w = last * (1.0 - prior.lambda());
        (t_can * (1.0 - canonical.lambda) - prior.tau().bloch() * w) * (1.0 / (1.0 - last))
    };
    let n = t_last.norm();
    let min_eigenvalue = 0.5 * (1.0 - n);
    if !(min_eigenvalue >= -EPS_PSD) {
        return Err(Error::FinalStepInfeasible { min_eigenvalue });
    }
    let t_last = if n > 1.0 { t_last * (1.0 / n) } else { t_last };
    steps.push(PartialThermalization::new(last, DensityMatrix::from_bloch_unchecked(t_last))?);
    Ok(Protocol { task: *task, steps: StepSequence::new(steps, canonical.u) })
}

/// The canonical protocol itself (one step, or none for unitary tasks).
pub fn canonical_protocol(task: &TaskSpec) -> Result<(CanonicalSolution, Protocol)> {
    let sol = canonical_solve(task)?;
    let protocol = expand_to_n_steps(task, &sol, 1, &[])?;
    Ok((sol, protocol))
}

/// States along the protocol: the input, the state after each
/// thermalization, and the output after the closing unitary.
pub fn run_protocol(protocol: &Protocol, input: &DensityMatrix) -> Vec<DensityMatrix> {
    let mut out = Vec::with_capacity(protocol.n_steps() + 2);
    out.push(*input);
    let mut r = *input;
    for s in &protocol.steps.steps {
        r = s.apply(&r);
        out.push(r);
    }
    out.push(protocol.steps.closing.apply(&r));
    out
}
