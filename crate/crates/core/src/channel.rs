//! The two primitive operations (unitary-with-quench and partial
//! thermalization) and the calculus that reduces any alternating sequence of
//! them to consecutive thermalizations followed by one unitary.
//!
//! Quenches are implicit: a quench is the bookkeeping boundary between two
//! consecutive steps with different thermal targets, and its immediate
//! effect on the state is the identity.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::qubit::{BlochVector, DensityMatrix};

/// Tolerance on `U†U = 𝟙`.
pub const EPS_UNITARY: f64 = 1e-12;

/// `ρ ↦ λρ + (1−λ)τ`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialThermalization {
    lambda: f64,
    tau: DensityMatrix,
}

impl PartialThermalization {
    pub fn new(lambda: f64, tau: DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidMixing(lambda));
        }
        Ok(PartialThermalization { lambda, tau })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> &DensityMatrix {
        &self.tau
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        rho.mix(self.lambda, &self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat2", into = "Mat2")]
pub struct UnitaryGate {
    m: Mat2,
    /// Bloch rotation of `ρ ↦ UρU†`, cached.
    r: [[f64; 3]; 3],
}

impl TryFrom<Mat2> for UnitaryGate {
    type Error = Error;
    fn try_from(m: Mat2) -> Result<Self> {
        UnitaryGate::new(m)
    }
}

impl From<UnitaryGate> for Mat2 {
    fn from(u: UnitaryGate) -> Mat2 {
        u.m
    }
}

impl UnitaryGate {
    pub fn new(m: Mat2) -> Result<Self> {
        let deviation = (m.adjoint() * m).max_abs_diff(&Mat2::identity());
        if deviation > EPS_UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self::wrap(m))
    }

    fn wrap(m: Mat2) -> Self {
        let paulis = Mat2::paulis();
        let mut r = [[0.0; 3]; 3];
        for (j, pj) in paulis.iter().enumerate() {
            let img = pj.conjugate_by(&m);
            for (i, pi) in paulis.iter().enumerate() {
                r[i][j] = 0.5 * (*pi * img).trace().re;
            }
        }
        UnitaryGate { m, r }
    }

    pub fn identity() -> Self {
        Self::wrap(Mat2::identity())
    }

    pub fn pauli_x() -> Self {
        Self::wrap(Mat2::pauli_x())
    }

    /// `exp(−iθ n̂·σ/2)`: a right-handed Bloch rotation by `angle` about
    /// `axis`. A zero axis gives the identity.
    pub fn rotation(axis: BlochVector, angle: f64) -> Self {
        let Some(n) = axis.normalized() else {
            return Self::identity();
        };
        let (s, c) = (0.5 * angle).sin_cos();
        Self::wrap(Mat2::identity().scale(c) + n.sigma().scale_c(C64::new(0.0, -s)))
    }

    /// The rotation of smallest angle taking direction `from` onto direction
    /// `to`. For antiparallel inputs the half-turn axis is the normalized
    /// `from × e_k`, with `e_k` the basis vector along the smallest component
    /// of `from`.
    pub fn aligning(from: BlochVector, to: BlochVector) -> Self {
        let (Some(a), Some(b)) = (from.normalized(), to.normalized()) else {
            return Self::identity();
        };
        let w = 1.0 + a.dot(&b);
        let v = a.cross(&b);
        if w <= 1e-12 {
            let ax = a.as_array().map(f64::abs);
            let k = if ax[0] <= ax[1] && ax[0] <= ax[2] {
                0
            } else if ax[1] <= ax[2] {
                1
            } else {
                2
            };
            let mut e = [0.0; 3];
            e[k] = 1.0;
            return Self::rotation(a.cross(&e.into()), std::f64::consts::PI);
        }
        // Unit quaternion (w, v) / |(w, v)| maps a onto b.
        let n = (w * w + v.norm_sqr()).sqrt();
        let m = Mat2::identity().scale(w / n) + v.sigma().scale_c(C64::new(0.0, -1.0 / n));
        Self::wrap(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        let r = &self.r;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = r[j][i];
            }
        }
        UnitaryGate { m: self.m.adjoint(), r: t }
    }

    /// `self · first`, i.e. apply `first`, then `self`.
    pub fn after(&self, first: &UnitaryGate) -> Self {
        Self::wrap(self.m * first.m)
    }

    /// `UρU†`
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_bloch_unchecked(self.rotate(rho.bloch()))
    }

    /// `R r`
    pub fn rotate(&self, v: BlochVector) -> BlochVector {
        let r = &self.r;
        BlochVector::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    /// Bloch rotation `R` with `UρU†` ↔ `R r`.
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        self.r
    }

    /// Distance from `other` up to a global phase.
    pub fn distance_up_to_phase(&self, other: &UnitaryGate) -> f64 {
        let ip = (self.m.adjoint() * other.m).trace();
        let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
        self.m.scale_c(phase).max_abs_diff(&other.m)
    }
}

/// `UT_N⋯T₁`: N consecutive thermalizations, then one closing unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSequence {
    pub steps: Vec<PartialThermalization>,
    pub closing: UnitaryGate,
}

impl StepSequence {
    pub fn new(steps: Vec<PartialThermalization>, closing: UnitaryGate) -> Self {
        StepSequence { steps, closing }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.lambda).collect()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let pre = self.steps.iter().fold(*rho, |r, s| s.apply(&r));
        self.closing.apply(&pre)
    }
}

pub fn apply_thermalization(rho: &DensityMatrix, step: &PartialThermalization) -> DensityMatrix {
    step.apply(rho)
}

pub fn apply_unitary(rho: &DensityMatrix, u: &UnitaryGate) -> DensityMatrix {
    u.apply(rho)
}

/// The step `(λ, U†τU)` equivalent to applying `U`, then `step`, then `U⁻¹`.
pub fn conjugate_step(step: &PartialThermalization, u: &UnitaryGate) -> PartialThermalization {
    PartialThermalization {
        lambda: step.lambda,
        tau: u.adjoint().apply(&step.tau),
    }
}

/// Single step equivalent to `first` followed by `second`.
///
/// When both mixing parameters are 1 the effective target is arbitrary and
/// `second`'s target is returned.
pub fn compose_pair(
    first: &PartialThermalization,
    second: &PartialThermalization,
) -> PartialThermalization {
    let lambda = second.lambda * first.lambda;
    let rest = 1.0 - lambda;
    if rest <= 0.0 {
        return PartialThermalization { lambda: 1.0, tau: second.tau };
    }
    let w1 = second.lambda * (1.0 - first.lambda) / rest;
    let w2 = (1.0 - second.lambda) / rest;
    let r = first.tau.bloch() * w1 + second.tau.bloch() * w2;
    PartialThermalization {
        lambda,
        tau: DensityMatrix::from_bloch_unchecked(r),
    }
}

/// Left fold of [`compose_pair`] over the sequence, in application order.
pub fn compose_sequence(steps: &[PartialThermalization]) -> Result<PartialThermalization> {
    let (head, tail) = steps.split_first().ok_or(Error::EmptySequence)?;
    Ok(tail.iter().fold(*head, |acc, s| compose_pair(&acc, s)))
}

/// Rewrites `T_N U_N ⋯ T₁ U₁` (given in application order as `(Uᵢ, Tᵢ)`
/// pairs) as `U′ T′_N ⋯ T′₁` with `U′ᵢ = Uᵢ⋯U₁`, `T′ᵢ = U′ᵢ⁻¹ Tᵢ U′ᵢ` and
/// `U′ = U′_N`.
pub fn normal_form(alternating: &[(UnitaryGate, PartialThermalization)]) -> StepSequence {
    let mut acc = UnitaryGate::identity();
    let mut steps = Vec::with_capacity(alternating.len());
    for (u, t) in alternating {
        acc = u.after(&acc);
        steps.push(conjugate_step(t, &acc));
    }
    StepSequence { steps, closing: acc }
}

/// Applies an alternating sequence directly, without reduction.
pub fn apply_alternating(
    alternating: &[(UnitaryGate, PartialThermalization)],
    rho: &DensityMatrix,
) -> DensityMatrix {
    alternating
        .iter()
        .fold(*rho, |r, (u, t)| t.apply(&u.apply(&r)))
}

/// Hilbert–Schmidt-normalized angle between `ρ₁−ρ₂` and `ρ₁−ρ₃`:
/// `tr[(ρ₁−ρ₂)(ρ₁−ρ₃)] / (tr[(ρ₁−ρ₂)²] tr[(ρ₁−ρ₃)²])^½`. Preserved by any
/// unitary or partial thermalization applied to all three states. `None`
/// when either difference vanishes.
pub fn generalized_angle(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rho3: &DensityMatrix,
) -> Option<f64> {
    let a = rho1.matrix() - rho2.matrix();
    let b = rho1.matrix() - rho3.matrix();
    let aa = (a * a).trace().re;
    let bb = (b * b).trace().re;
    if aa <= 0.0 || bb <= 0.0 {
        return None;
    }
    Some((a * b).trace().re / (aa * bb).sqrt())
}
