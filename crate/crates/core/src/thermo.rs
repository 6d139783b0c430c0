//! Heat and work bookkeeping.
//!
//! A partial thermalization toward `τ` happens under the Hamiltonian
//! `H = −kT ln τ`; its heat is the resulting energy change. Quenches and the
//! closing unitary exchange only work, so the work done by the system is
//! always obtained from the first law as `W = Q − ΔU` with `ΔU` measured
//! against `H₀`.

use serde::{Deserialize, Serialize};

use crate::channel::PartialThermalization;
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::qubit::{free_energy, relative_entropy, vn_entropy, DensityMatrix, Temperature};
use crate::synthesis::{run_protocol, Protocol, TaskSpec};

/// Eigenvalues of `τ` are clamped here before taking logarithms.
pub const EIGEN_FLOOR: f64 = 1e-300;

/// Targets with an eigenvalue below this flag the heat as divergent.
pub const EPS_DIVERGENCE: f64 = 1e-12;

/// Allowed relative disagreement between the energy and entropy forms of
/// the mean work.
pub const ACCOUNTING_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepHeat {
    pub value: f64,
    /// `τ` is numerically singular; `value` is finite only because of
    /// eigenvalue clamping.
    pub divergent: bool,
}

/// `ln τ`, with eigenvalues clamped at [`EIGEN_FLOOR`], and the divergence flag.
fn log_target(tau: &DensityMatrix) -> (Mat2, bool) {
    let e = tau.eigen();
    let divergent = e.values[1] < EPS_DIVERGENCE;
    (e.map_spectrum(|p| p.max(EIGEN_FLOOR).ln()), divergent)
}

/// `Q = −kT(1−λ) tr[(τ−ρ) ln τ]`, the heat absorbed by state `ρ` during
/// `step`.
pub fn step_heat(rho: &DensityMatrix, step: &PartialThermalization, t: Temperature) -> StepHeat {
    let w = 1.0 - step.lambda();
    let (ln_tau, divergent) = log_target(step.tau());
    if w == 0.0 {
        return StepHeat { value: 0.0, divergent: false };
    }
    let diff = step.tau().matrix() - rho.matrix();
    let value = -t.kt() * w * (ln_tau * diff).trace().re;
    StepHeat { value, divergent }
}

/// Heat as the energy change `tr[H(ρ′−ρ)]` under the explicit step
/// Hamiltonian `H = −kT ln τ + c𝟙`.
pub fn step_heat_with_gauge(
    rho: &DensityMatrix,
    step: &PartialThermalization,
    t: Temperature,
    c: f64,
) -> StepHeat {
    let (ln_tau, divergent) = log_target(step.tau());
    let h = ln_tau.scale(-t.kt()) + Mat2::identity().scale(c);
    let after = step.apply(rho);
    let value = (h * after.matrix()).trace().re - (h * rho.matrix()).trace().re;
    StepHeat { value, divergent }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Heat absorbed at each step, for input 1 and input 2.
    pub per_step_heat: [Vec<f64>; 2],
    pub heat_per_input: [f64; 2],
    /// `tr[H₀(final − input)]` per input.
    pub delta_internal_per_input: [f64; 2],
    /// Work extracted per input.
    pub work_per_input: [f64; 2],
    pub mean_work: f64,
    pub mean_heat: f64,
    pub delta_internal: f64,
    /// `kT Σᵢ(1−λᵢ)[S(τᵢ)−S(ρ̄ᵢ)−S(ρ̄ᵢ‖τᵢ)] − tr[H₀(η̄−ρ̄)]`, evaluated
    /// independently of the per-input heats.
    pub mean_work_entropy_form: f64,
    /// Dimensionless, `(−ΔF̄ − W̄)/kT`.
    pub entropy_production: f64,
    pub divergent: bool,
}

impl EnergyLedger {
    pub const CSV_HEADER: [&'static str; 12] = [
        "n_steps",
        "work_1",
        "work_2",
        "mean_work",
        "mean_heat",
        "delta_internal",
        "entropy_production",
        "divergent",
        "heat_1",
        "heat_2",
        "step_heats_1",
        "step_heats_2",
    ];

    /// Flattened row matching [`Self::CSV_HEADER`]; per-step heats are
    /// `;`-joined.
    pub fn csv_row(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";");
        vec![
            self.per_step_heat[0].len().to_string(),
            format!("{:e}", self.work_per_input[0]),
            format!("{:e}", self.work_per_input[1]),
            format!("{:e}", self.mean_work),
            format!("{:e}", self.mean_heat),
            format!("{:e}", self.delta_internal),
            format!("{:e}", self.entropy_production),
            self.divergent.to_string(),
            format!("{:e}", self.heat_per_input[0]),
            format!("{:e}", self.heat_per_input[1]),
            join(&self.per_step_heat[0]),
            join(&self.per_step_heat[1]),
        ]
    }
}

/// Full ledger of a protocol, using `−kT ln τ` as each step's Hamiltonian.
pub fn protocol_ledger(protocol: &Protocol) -> Result<EnergyLedger> {
    let t = protocol.task.temperature();
    ledger_from_heats(protocol, |rho, step, _| step_heat(rho, step, t))
}

/// Ledger with every step Hamiltonian shifted by `shifts[i]·𝟙`, computed
/// through explicit energy differences. Missing shifts count as zero.
pub fn protocol_ledger_with_gauge(protocol: &Protocol, shifts: &[f64]) -> Result<EnergyLedger> {
    let t = protocol.task.temperature();
    ledger_from_heats(protocol, |rho, step, i| {
        step_heat_with_gauge(rho, step, t, shifts.get(i).copied().unwrap_or(0.0))
    })
}

fn ledger_from_heats(
    protocol: &Protocol,
    heat: impl Fn(&DensityMatrix, &PartialThermalization, usize) -> StepHeat,
) -> Result<EnergyLedger> {
    let task = &protocol.task;
    let kt = task.kt();
    let h0 = task.h0();
    let p = [task.p1(), task.p2()];
    let inputs = task.inputs();
    let mut divergent = false;

    let mut per_step_heat = [Vec::new(), Vec::new()];
    let mut heat_per_input = [0.0; 2];
    let mut delta_internal_per_input = [0.0; 2];
    let mut work_per_input = [0.0; 2];
    for k in 0..2 {
        let traj = run_protocol(protocol, &inputs[k]);
        for (i, step) in protocol.steps.steps.iter().enumerate() {
            let q = heat(&traj[i], step, i);
            divergent |= q.divergent;
            per_step_heat[k].push(q.value);
        }
        heat_per_input[k] = per_step_heat[k].iter().sum();
        let last = traj.last().expect("trajectory is never empty");
        delta_internal_per_input[k] = h0.energy(last) - h0.energy(&inputs[k]);
        work_per_input[k] = heat_per_input[k] - delta_internal_per_input[k];
    }

    let mean_work = p[0] * work_per_input[0] + p[1] * work_per_input[1];
    let mean_heat = p[0] * heat_per_input[0] + p[1] * heat_per_input[1];
    let delta_internal = p[0] * delta_internal_per_input[0] + p[1] * delta_internal_per_input[1];

    let rho_bar = task.rho_bar();
    let mut entropy_sum = 0.0;
    let mut scale = 0.0f64;
    let mut r = rho_bar;
    for step in &protocol.steps.steps {
        let w = 1.0 - step.lambda();
        if w > 0.0 {
            let term = vn_entropy(step.tau()) - vn_entropy(&r) - relative_entropy(&r, step.tau());
            entropy_sum += w * term;
            scale = scale.max((w * term).abs());
        }
        r = step.apply(&r);
    }
    let final_bar = protocol.steps.closing.apply(&r);
    let mean_work_entropy_form = kt * entropy_sum - (h0.energy(&final_bar) - h0.energy(&rho_bar));

    if !divergent {
        let gap = (mean_work - mean_work_entropy_form).abs();
        if !(gap <= ACCOUNTING_TOLERANCE * (1.0 + kt * scale)) {
            return Err(Error::AccountingMismatch(gap));
        }
    }

    let delta_free = free_energy(&final_bar, &h0, task.temperature())
        - free_energy(&rho_bar, &h0, task.temperature());
    Ok(EnergyLedger {
        per_step_heat,
        heat_per_input,
        delta_internal_per_input,
        work_per_input,
        mean_work,
        mean_heat,
        delta_internal,
        mean_work_entropy_form,
        entropy_production: (-delta_free - mean_work) / kt,
        divergent,
    })
}

/// `Σ = (−ΔF̄ − W̄)/kT` with `ΔF̄ = F(η̄) − F(ρ̄)` at `H₀`.
pub fn entropy_production(ledger: &EnergyLedger, task: &TaskSpec) -> f64 {
    (-delta_free_energy(task) - ledger.mean_work) / task.kt()
}

/// `F(η̄) − F(ρ̄)` at `H₀`.
pub fn delta_free_energy(task: &TaskSpec) -> f64 {
    let h0 = task.h0();
    free_energy(&task.eta_bar(), &h0, task.temperature())
        - free_energy(&task.rho_bar(), &h0, task.temperature())
}

/// Total thermal contact in units of the thermalization time,
/// `ln(‖ρ₁−ρ₂‖₁/‖η₁−η₂‖₁) = −ln λ`. Infinite for erasure tasks.
pub fn contact_time(task: &TaskSpec) -> f64 {
    let din = (task.rho1().bloch() - task.rho2().bloch()).norm();
    let dout = (task.eta1().bloch() - task.eta2().bloch()).norm();
    if task.is_identity() {
        return 0.0;
    }
    if task.is_erasure() {
        return f64::INFINITY;
    }
    (din / dout).ln()
}

/// `Σᵢ −ln λᵢ` over a protocol's steps.
pub fn protocol_contact_time(protocol: &Protocol) -> f64 {
    protocol.lambdas().iter().map(|l| -l.ln()).sum()
}
