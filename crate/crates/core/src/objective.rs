//! Closed-form Bloch-vector evaluation of the mean work of a uniform N-step
//! expansion. This is the optimizer's inner loop; the matrix route in
//! [`crate::thermo`] remains the reference and the two agree to rounding.
//!
//! For states with Bloch vectors `r` and `s`,
//! `tr[ρ ln σ] = ½ ln((1−|s|²)/4) + (r·ŝ) artanh|s|`, so the heat of a step
//! toward `τ` from the average state `ρ̄ᵢ` is
//! `kT(1−μ)[S(τ) + tr(ρ̄ᵢ ln τ)]`.

use crate::qubit::{entropy_of_radius, BlochVector, EPS_PSD};
use crate::synthesis::{CanonicalSolution, TaskSpec};
use crate::thermo::EPS_DIVERGENCE;

/// Penalty slope, in units of kT per unit of negative eigenvalue.
pub const PENALTY_KAPPA: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalStatus {
    Ok,
    /// The solved final target has this (negative) smallest eigenvalue.
    FinalInfeasible(f64),
    /// Some target is numerically singular.
    Divergent,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    /// Mean work when `status` is `Ok`; otherwise the penalized value.
    pub value: f64,
    pub status: EvalStatus,
}

/// `tr[ρ ln σ]` for Bloch vectors `r`, `s` with `|s| < 1`.
pub fn trace_rho_log_sigma(r: BlochVector, s: BlochVector) -> f64 {
    let n = s.norm();
    let base = 0.5 * ((1.0 - n * n) / 4.0).ln();
    if n == 0.0 {
        return base;
    }
    base + r.dot(&s) / n * n.atanh()
}

/// `R³ → open unit ball`, `v ↦ tanh(|v|) v̂`.
pub fn squash(v: [f64; 3]) -> BlochVector {
    let b = BlochVector::from(v);
    let n = b.norm();
    if n == 0.0 {
        b
    } else {
        b * (n.tanh() / n)
    }
}

/// Inverse of [`squash`], with the radius capped just below 1.
pub fn unsquash(t: BlochVector) -> [f64; 3] {
    let n = t.norm();
    if n == 0.0 {
        return [0.0; 3];
    }
    let capped = n.min(1.0 - 1e-12);
    (t * (capped.atanh() / n)).as_array()
}

#[derive(Debug, Clone)]
pub struct BlochObjective {
    n: usize,
    schedule: Vec<f64>,
    lambda: f64,
    tau_can: BlochVector,
    rho_bar: BlochVector,
    kt: f64,
    /// `tr[H₀(η̄ − ρ̄)]`, fixed by the task.
    boundary: f64,
    floor: f64,
}

impl BlochObjective {
    /// Uniform schedule `λᵢ = λ^{1/N}`.
    pub fn new(task: &TaskSpec, canonical: &CanonicalSolution, n: usize) -> Self {
        let n = n.max(1);
        let mu = canonical.lambda.powf(1.0 / n as f64);
        Self::with_schedule(task, canonical, vec![mu; n])
    }

    /// Arbitrary schedule whose product is the canonical `λ` and whose last
    /// entry is below 1.
    pub fn with_schedule(task: &TaskSpec, canonical: &CanonicalSolution, schedule: Vec<f64>) -> Self {
        let n = schedule.len().max(1);
        let schedule = if schedule.is_empty() { vec![canonical.lambda] } else { schedule };
        let lambda = canonical.lambda;
        let tau_can = canonical.tau_state().map(|t| t.bloch()).unwrap_or(canonical.tau);
        let field = task.h0().field();
        let boundary = field.dot(&(task.eta_bar().bloch() - task.rho_bar().bloch()));
        let mut obj = BlochObjective {
            n,
            schedule,
            lambda,
            tau_can,
            rho_bar: task.rho_bar().bloch(),
            kt: task.kt(),
            boundary,
            floor: 0.0,
        };
        obj.floor = obj.single_step_work();
        obj
    }

    pub fn n_steps(&self) -> usize {
        self.n
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn dimension(&self) -> usize {
        3 * (self.n - 1)
    }

    /// Mean work of the canonical single-step protocol; the penalty floor.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    fn single_step_work(&self) -> f64 {
        let w = 1.0 - self.lambda;
        let t = self.tau_can;
        if 0.5 * (1.0 - t.norm()) < EPS_DIVERGENCE {
            return f64::NEG_INFINITY;
        }
        self.kt * w * (entropy_of_radius(t.norm()) + trace_rho_log_sigma(self.rho_bar, t)) - self.boundary
    }

    /// `τ_N` from the free targets so the schedule composes to the canonical
    /// `(λ, τ)`.
    pub fn solve_last(&self, free: &[BlochVector]) -> BlochVector {
        if free.is_empty() {
            return self.tau_can;
        }
        let mut le = 1.0;
        let mut te = BlochVector::ZERO;
        for (t, &mu) in free.iter().zip(&self.schedule) {
            let next = le * mu;
            te = (te * (mu * (1.0 - le)) + *t * (1.0 - mu)) * (1.0 / (1.0 - next));
            le = next;
        }
        let last = self.schedule[self.n - 1];
        (self.tau_can * (1.0 - self.lambda) - te * (last * (1.0 - le))) * (1.0 / (1.0 - last))
    }

    pub fn evaluate_targets(&self, free: &[BlochVector]) -> Eval {
        let last = self.solve_last(free);
        let min_eig = 0.5 * (1.0 - last.norm());
        if !min_eig.is_finite() {
            return Eval { value: self.floor - PENALTY_KAPPA, status: EvalStatus::NonFinite };
        }
        if min_eig < -EPS_PSD {
            return Eval {
                value: self.floor - PENALTY_KAPPA * min_eig.abs(),
                status: EvalStatus::FinalInfeasible(min_eig),
            };
        }
        let divergent = Eval { value: self.floor - PENALTY_KAPPA * EPS_DIVERGENCE, status: EvalStatus::Divergent };
        let mut r = self.rho_bar;
        let mut sum = 0.0;
        for (t, &mu) in free.iter().chain(std::iter::once(&last)).zip(&self.schedule) {
            let n = t.norm();
            if 0.5 * (1.0 - n) < EPS_DIVERGENCE {
                return divergent;
            }
            let w = 1.0 - mu;
            sum += w * (entropy_of_radius(n) + trace_rho_log_sigma(r, *t));
            r = r * mu + *t * w;
        }
        let value = self.kt * sum - self.boundary;
        if !value.is_finite() {
            return Eval { value: self.floor - PENALTY_KAPPA, status: EvalStatus::NonFinite };
        }
        Eval { value, status: EvalStatus::Ok }
    }

    /// Targets from unconstrained parameters, three per free step.
    pub fn targets(&self, params: &[f64]) -> Vec<BlochVector> {
        params.chunks_exact(3).map(|c| squash([c[0], c[1], c[2]])).collect()
    }

    pub fn evaluate(&self, params: &[f64]) -> Eval {
        self.evaluate_targets(&self.targets(params))
    }

    /// Parameters with every free target at the canonical one.
    pub fn canonical_params(&self) -> Vec<f64> {
        let v = unsquash(self.tau_can);
        (0..self.n - 1).flat_map(|_| v).collect()
    }

    pub fn params_from_targets(&self, free: &[BlochVector]) -> Vec<f64> {
        free.iter().flat_map(|t| unsquash(*t)).collect()
    }
}
