#![allow(dead_code)]

use dualq_core::{
    canonical_solve, BlochVector, CanonicalSolution, DensityMatrix, FieldSpec, PartialThermalization,
    Temperature, TaskSpec, UnitaryGate,
};
use proptest::prelude::*;

pub fn direction() -> impl Strategy<Value = BlochVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| {
        BlochVector::new(x, y, z).normalized().unwrap_or(BlochVector::new(0.0, 0.0, 1.0))
    })
}

pub fn bloch(max_radius: f64) -> impl Strategy<Value = BlochVector> {
    (direction(), 0.0..=max_radius).prop_map(|(d, r)| d * r)
}

pub fn state(max_radius: f64) -> impl Strategy<Value = DensityMatrix> {
    bloch(max_radius).prop_map(|b| DensityMatrix::from_bloch(b).unwrap())
}

pub fn unitary() -> impl Strategy<Value = UnitaryGate> {
    (direction(), -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(a, t)| UnitaryGate::rotation(a, t))
}

pub fn step() -> impl Strategy<Value = PartialThermalization> {
    (0.0..=1.0f64, state(0.95)).prop_map(|(l, t)| PartialThermalization::new(l, t).unwrap())
}

pub fn field() -> impl Strategy<Value = FieldSpec> {
    (-2.0..2.0f64, direction()).prop_map(|(e0, axis)| FieldSpec { e0, axis })
}

/// Feasible task built from a known single-step realization `U∘T` with
/// `U` the minimal rotation, so the canonical solve recovers `(λ, τ)`.
pub fn feasible_task() -> impl Strategy<Value = TaskSpec> {
    (state(0.9), state(0.9), 0.02..0.95f64, bloch(0.9), direction(), 0.05..0.95f64, field(), 0.3..3.0f64)
        .prop_filter("distinct inputs", |(r1, r2, ..)| (r1.bloch() - r2.bloch()).norm() > 1e-3)
        .prop_map(|(r1, r2, lambda, tau, out_dir, p1, h0, kt)| {
            let u = UnitaryGate::aligning(r1.bloch() - r2.bloch(), out_dir);
            let t = PartialThermalization::new(lambda, DensityMatrix::from_bloch(tau).unwrap()).unwrap();
            let e1 = u.apply(&t.apply(&r1));
            let e2 = u.apply(&t.apply(&r2));
            TaskSpec::new([r1, r2], [e1, e2], p1, h0, Temperature::new(kt).unwrap()).unwrap()
        })
}

/// Any task with distinct inputs and outputs, feasible or not.
pub fn any_task() -> impl Strategy<Value = TaskSpec> {
    (state(0.95), state(0.95), state(0.95), state(0.95), 0.05..0.95f64, field())
        .prop_filter("distinct states", |(r1, r2, e1, e2, ..)| {
            (r1.bloch() - r2.bloch()).norm() > 1e-3 && (e1.bloch() - e2.bloch()).norm() > 1e-3
        })
        .prop_map(|(r1, r2, e1, e2, p1, h0)| {
            TaskSpec::new([r1, r2], [e1, e2], p1, h0, Temperature::default()).unwrap()
        })
}

pub fn solve(task: &TaskSpec) -> CanonicalSolution {
    canonical_solve(task).unwrap()
}
