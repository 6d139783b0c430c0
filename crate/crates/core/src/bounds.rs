//! Upper bounds on mean extracted work and the inequality chain that links
//! the per-step lag of the average state to the closed-form dissipation
//! bound.
//!
//! With `Δᵢ = ‖ρ̄ᵢ₊₁ − ρ̄ᵢ‖₁ = (1−λᵢ)‖τᵢ − ρ̄ᵢ‖₁` and `L = −ln Πλᵢ`, the chain
//! reads
//!
//! ```text
//! Σ ≥ Σ(1−λᵢ)S(ρ̄ᵢ‖τᵢ)                       lag
//!   ≥ ½ Σ Δᵢ²/(1−λᵢ)                        pinsker
//!   ≥ ½ √Σ(1−λᵢ)⁻² √Σ Δᵢ⁴                   cauchy_schwarz
//!   ≥ ½ N√N/L · √Σ Δᵢ⁴                      power_mean
//!   ≥ ½ ‖ρ̄_{N+1} − ρ̄₁‖²/L                   quartic
//!   = ½ ‖U†η̄U − ρ̄‖² / ln(‖ρ₁−ρ₂‖₁/‖η₁−η₂‖₁)  final
//! ```
//!
//! The second link does not hold in general: Cauchy–Schwarz bounds
//! `Σ Δᵢ²/(1−λᵢ)` from above by the product of norms, not from below. The
//! report evaluates it anyway and flags it, and also evaluates the
//! Engel-form route `pinsker ≥ ½(ΣΔᵢ)²/Σ(1−λᵢ) ≥ ½(ΣΔᵢ)²/L ≥ quartic`, which
//! does hold and yields the same endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{relative_entropy, trace_distance, vn_entropy, DensityMatrix};
use crate::synthesis::{canonical_solve, Feasibility, Protocol, TaskSpec};
use crate::thermo::protocol_ledger;

/// Slack allowed on each chain link, scaled by the magnitude of its sides.
pub const CHAIN_TOLERANCE: f64 = 1e-10;

/// `F(ρ̄) − F(η̄)` at `H₀`: the reversible (Clausius) limit on mean work.
pub fn clausius_bound(task: &TaskSpec) -> f64 {
    let h0 = task.h0();
    let (rb, eb) = (task.rho_bar(), task.eta_bar());
    h0.energy(&rb) - h0.energy(&eb) - task.kt() * (vn_entropy(&rb) - vn_entropy(&eb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationBranch {
    /// `0 < λ < 1`.
    Finite,
    /// Identical outputs: the denominator diverges.
    Erasure,
    /// `λ = 1`: a unitary suffices and nothing is dissipated.
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalBound {
    pub value: f64,
    pub clausius: f64,
    /// `½ ‖U†η̄U − ρ̄‖₁² / ln(‖ρ₁−ρ₂‖₁/‖η₁−η₂‖₁)`, in nats.
    pub dissipation: f64,
    pub branch: DissipationBranch,
}

/// Clausius bound less the unavoidable dissipation. `U` is the canonical
/// unitary of the task. Fails for tasks that need `λ > 1`.
pub fn final_bound(task: &TaskSpec) -> Result<FinalBound> {
    let clausius = clausius_bound(task);
    let sol = canonical_solve(task)?;
    let branch = match sol.feasibility {
        Feasibility::DegenerateErasure => DissipationBranch::Erasure,
        Feasibility::DegenerateUnitary | Feasibility::IdentityTask => DissipationBranch::Unitary,
        Feasibility::LambdaExceedsOne { .. } => return Err(Error::Infeasible(sol.feasibility)),
        _ if sol.lambda >= 1.0 => return Err(Error::Infeasible(sol.feasibility)),
        _ => DissipationBranch::Finite,
    };
    if branch != DissipationBranch::Finite {
        return Ok(FinalBound { value: clausius, clausius, dissipation: 0.0, branch });
    }
    let pulled = sol.u.adjoint().apply(&task.eta_bar());
    let d = trace_distance(&pulled, &task.rho_bar());
    let dissipation = 0.5 * d * d / (-sol.lambda.ln());
    Ok(FinalBound { value: clausius - task.kt() * dissipation, clausius, dissipation, branch })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagBound {
    /// `−ΔF̄ − kT Σ(1−λᵢ)S(ρ̄ᵢ‖τᵢ)`; `−∞` when a lag term is infinite.
    pub value: f64,
    /// `Σ(1−λᵢ)S(ρ̄ᵢ‖τᵢ)`, possibly `+∞`.
    pub lag_sum: f64,
    /// `S(ρ̄ᵢ‖τᵢ)` per step.
    pub terms: Vec<f64>,
    /// `δᵢ = ‖ρ̄ᵢ − τᵢ‖₁` per step.
    pub distances: Vec<f64>,
}

/// Average-state trajectory `ρ̄₁, …, ρ̄_{N+1}` (before the closing unitary).
fn average_trajectory(protocol: &Protocol) -> Vec<DensityMatrix> {
    let mut out = Vec::with_capacity(protocol.n_steps() + 1);
    let mut r = protocol.task.rho_bar();
    out.push(r);
    for s in &protocol.steps.steps {
        r = s.apply(&r);
        out.push(r);
    }
    out
}

fn delta_free_energy_along(protocol: &Protocol, traj: &[DensityMatrix]) -> f64 {
    let task = &protocol.task;
    let h0 = task.h0();
    let t = task.temperature();
    let last = protocol.steps.closing.apply(traj.last().expect("nonempty"));
    crate::qubit::free_energy(&last, &h0, t) - crate::qubit::free_energy(&traj[0], &h0, t)
}

pub fn lag_bound(protocol: &Protocol) -> LagBound {
    let traj = average_trajectory(protocol);
    let mut terms = Vec::with_capacity(protocol.n_steps());
    let mut distances = Vec::with_capacity(protocol.n_steps());
    let mut lag_sum = 0.0;
    for (step, r) in protocol.steps.steps.iter().zip(&traj) {
        let s = relative_entropy(r, step.tau());
        terms.push(s);
        distances.push(trace_distance(r, step.tau()));
        let w = 1.0 - step.lambda();
        if w > 0.0 {
            lag_sum += w * s;
        }
    }
    let value = if lag_sum.is_finite() {
        -delta_free_energy_along(protocol, &traj) - protocol.task.kt() * lag_sum
    } else {
        f64::NEG_INFINITY
    };
    LagBound { value, lag_sum, terms, distances }
}

/// Members of the dissipation chain, all in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub sigma: f64,
    pub lag_sum: f64,
    pub pinsker_rhs: f64,
    /// `½ Σ Δᵢ²/(1−λᵢ)`, the same quantity as `pinsker_rhs` written through
    /// the trajectory increments.
    pub pinsker_increment_form: f64,
    pub cauchy_schwarz_rhs: f64,
    pub power_mean_rhs: f64,
    pub quartic_rhs: f64,
    pub final_rhs: f64,
    /// `½ (ΣΔᵢ)² / Σ(1−λᵢ)`
    pub engel_rhs: f64,
    /// `½ (ΣΔᵢ)² / L`
    pub engel_contact_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    /// The link asserts `lhs ≥ rhs`.
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ChainLink {
    fn geq(name: &str, lhs: f64, rhs: f64) -> Self {
        ChainLink { name: name.to_string(), lhs, rhs, holds: geq_within(lhs, rhs, CHAIN_TOLERANCE) }
    }

    fn eq(name: &str, lhs: f64, rhs: f64) -> Self {
        let holds = geq_within(lhs, rhs, CHAIN_TOLERANCE) && geq_within(rhs, lhs, CHAIN_TOLERANCE);
        ChainLink { name: name.to_string(), lhs, rhs, holds }
    }
}

fn geq_within(lhs: f64, rhs: f64, tol: f64) -> bool {
    if lhs == rhs || lhs == f64::INFINITY || rhs == f64::NEG_INFINITY {
        return true;
    }
    lhs - rhs >= -tol * (1.0 + lhs.abs().max(rhs.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub clausius: f64,
    pub final_bound: f64,
    pub lag_bound: f64,
    /// `S(ρ̄ᵢ‖τᵢ)` per step.
    pub lag_terms: Vec<f64>,
    /// `‖ρ̄ᵢ − τᵢ‖₁` per step.
    pub lag_distances: Vec<f64>,
    pub chain: BoundChain,
    /// The quartic chain in derivation order, followed by its sub-steps and the Engel route.
    pub links: Vec<ChainLink>,
    /// `S(ρ̄ᵢ‖τᵢ) ≥ ½‖τᵢ − ρ̄ᵢ‖₁²` at every step.
    pub pinsker_pointwise: bool,
}

impl BoundReport {
    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.pinsker_pointwise && self.links.iter().all(|l| l.holds)
    }

    /// Links that fail.
    pub fn violations(&self) -> Vec<&ChainLink> {
        self.links.iter().filter(|l| !l.holds).collect()
    }
}

/// Link names, in report order.
pub mod links {
    pub const SIGMA_LAG: &str = "sigma >= lag";
    pub const LAG_PINSKER: &str = "lag >= pinsker";
    pub const PINSKER_FORMS: &str = "pinsker == increment form";
    pub const A1: &str = "A1 pinsker >= cauchy_schwarz";
    pub const A2: &str = "A2 cauchy_schwarz >= power_mean";
    pub const A2_RMS: &str = "A2a mean(1-l) >= rms^-1";
    pub const A2_AM_GM: &str = "A2b 1 - geomean(l) >= mean(1-l)";
    pub const A2_LOG: &str = "A2c -ln(prod l)/N >= 1 - geomean(l)";
    pub const A3: &str = "A3 power_mean >= quartic";
    pub const A3_SQUARES: &str = "A3a sqrt(sum d^4) >= sum d^2 / sqrt(N)";
    pub const A3_SUM: &str = "A3b sum d^2 / sqrt(N) >= (sum d)^2 / (N sqrt N)";
    pub const A3_TRIANGLE: &str = "A3c (sum d)^2 >= |end - start|^2";
    pub const A5: &str = "A5 quartic == final";
    pub const ENGEL: &str = "E1 pinsker >= engel";
    pub const ENGEL_CONTACT: &str = "E2 engel >= engel_contact";
    pub const ENGEL_QUARTIC: &str = "E3 engel_contact >= quartic";
}

/// Evaluates every member of the chain along `protocol`.
pub fn bound_chain_diagnostics(protocol: &Protocol) -> Result<BoundReport> {
    let task = &protocol.task;
    let clausius = clausius_bound(task);
    let fb = final_bound(task)?;
    let lag = lag_bound(protocol);
    let ledger = protocol_ledger(protocol)?;
    let traj = average_trajectory(protocol);
    let steps = &protocol.steps.steps;
    let n = steps.len() as f64;

    let mut pinsker = 0.0;
    let mut increment_form = 0.0;
    let mut inv_sq = 0.0;
    let mut d_sum = 0.0;
    let mut d_sq = 0.0;
    let mut d_quad = 0.0;
    let mut one_minus = 0.0;
    let mut lambda_sum = 0.0;
    let mut log_prod = 0.0;
    let mut pointwise = true;
    for (i, step) in steps.iter().enumerate() {
        let w = 1.0 - step.lambda();
        let delta = lag.distances[i];
        pointwise &= geq_within(lag.terms[i], 0.5 * delta * delta, CHAIN_TOLERANCE);
        pinsker += 0.5 * w * delta * delta;
        let inc = trace_distance(&traj[i + 1], &traj[i]);
        increment_form += if w > 0.0 { 0.5 * inc * inc / w } else { 0.0 };
        inv_sq += 1.0 / (w * w);
        d_sum += inc;
        d_sq += inc * inc;
        d_quad += inc.powi(4);
        one_minus += w;
        lambda_sum += step.lambda();
        log_prod += step.lambda().ln();
    }
    let contact = -log_prod;
    let span = match traj.as_slice() {
        [first, .., last] => trace_distance(last, first),
        _ => 0.0,
    };
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };

    let chain = BoundChain {
        sigma: ledger.entropy_production,
        lag_sum: lag.lag_sum,
        pinsker_rhs: pinsker,
        pinsker_increment_form: increment_form,
        cauchy_schwarz_rhs: 0.5 * inv_sq.sqrt() * d_quad.sqrt(),
        power_mean_rhs: 0.5 * ratio(n * n.sqrt() * d_quad.sqrt(), contact),
        quartic_rhs: 0.5 * ratio(span * span, contact),
        final_rhs: fb.dissipation,
        engel_rhs: 0.5 * ratio(d_sum * d_sum, one_minus),
        engel_contact_rhs: 0.5 * ratio(d_sum * d_sum, contact),
    };

    let mut links = vec![
        ChainLink::geq(links::SIGMA_LAG, chain.sigma, chain.lag_sum),
        ChainLink::geq(links::LAG_PINSKER, chain.lag_sum, chain.pinsker_rhs),
        ChainLink::eq(links::PINSKER_FORMS, chain.pinsker_rhs, chain.pinsker_increment_form),
        ChainLink::geq(links::A1, chain.pinsker_rhs, chain.cauchy_schwarz_rhs),
        ChainLink::geq(links::A2, chain.cauchy_schwarz_rhs, chain.power_mean_rhs),
    ];
    if !steps.is_empty() {
        let mean = one_minus / n;
        let rms_inv = (inv_sq / n).powf(-0.5);
        let geo = (log_prod / n).exp();
        links.extend([
            ChainLink::geq(links::A2_RMS, mean, rms_inv),
            ChainLink::geq(links::A2_AM_GM, 1.0 - geo, 1.0 - lambda_sum / n),
            ChainLink::geq(links::A2_LOG, contact / n, 1.0 - geo),
            ChainLink::geq(links::A3_SQUARES, d_quad.sqrt(), d_sq / n.sqrt()),
            ChainLink::geq(links::A3_SUM, d_sq / n.sqrt(), d_sum * d_sum / (n * n.sqrt())),
            ChainLink::geq(links::A3_TRIANGLE, d_sum * d_sum, span * span),
        ]);
    }
    links.extend([
        ChainLink::geq(links::A3, chain.power_mean_rhs, chain.quartic_rhs),
        ChainLink::eq(links::A5, chain.quartic_rhs, chain.final_rhs),
        ChainLink::geq(links::ENGEL, chain.pinsker_rhs, chain.engel_rhs),
        ChainLink::geq(links::ENGEL_CONTACT, chain.engel_rhs, chain.engel_contact_rhs),
        ChainLink::geq(links::ENGEL_QUARTIC, chain.engel_contact_rhs, chain.quartic_rhs),
    ]);

    Ok(BoundReport {
        clausius,
        final_bound: fb.value,
        lag_bound: lag.value,
        lag_terms: lag.terms,
        lag_distances: lag.distances,
        chain,
        links,
        pinsker_pointwise: pointwise,
    })
}
