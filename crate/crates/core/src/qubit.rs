//! Qubit states, Hamiltonians and the information-theoretic functionals on
//! them.
//!
//! Energies carry whatever unit `kT` is expressed in; entropies are in nats.
//! A [`DensityMatrix`] is stored through its Bloch vector, which fixes unit
//! trace and Hermiticity by construction and makes the Bloch round trip
//! exact. Its four complex entries are available through
//! [`DensityMatrix::matrix`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianEigen, Mat2};

/// Tolerance on state positivity. Iterates of the optimizer drift by
/// O(1e-12), so validation accepts eigenvalues down to `-EPS_PSD`.
pub const EPS_PSD: f64 = 1e-9;

/// Tolerance on Hermiticity and trace of matrix-encoded inputs.
pub const EPS_MATRIX: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &BlochVector) -> BlochVector {
        BlochVector::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<BlochVector> {
        let n = self.norm();
        (n > 0.0).then(|| *self * (1.0 / n))
    }

    /// Matrix `r·σ`.
    pub fn sigma(&self) -> Mat2 {
        Mat2::new(
            C64::new(self.z, 0.0),
            C64::new(self.x, -self.y),
            C64::new(self.x, self.y),
            C64::new(-self.z, 0.0),
        )
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(a: [f64; 3]) -> Self {
        BlochVector::new(a[0], a[1], a[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(b: BlochVector) -> Self {
        b.as_array()
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, s: f64) -> BlochVector {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        self * -1.0
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

/// A qubit density operator `½(𝟙 + r·σ)` with `|r| ≤ 1 + EPS_PSD`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlochVector", into = "BlochVector")]
pub struct DensityMatrix {
    r: BlochVector,
}

impl TryFrom<BlochVector> for DensityMatrix {
    type Error = Error;
    fn try_from(r: BlochVector) -> Result<Self> {
        DensityMatrix::from_bloch(r)
    }
}

impl From<DensityMatrix> for BlochVector {
    fn from(d: DensityMatrix) -> BlochVector {
        d.r
    }
}

impl DensityMatrix {
    pub fn from_bloch(r: BlochVector) -> Result<Self> {
        let norm = r.norm();
        if !norm.is_finite() || norm > 1.0 + EPS_PSD {
            return Err(Error::BlochOutsideBall { norm });
        }
        Ok(DensityMatrix { r })
    }

    /// Skips validation. Callers guarantee `|r| ≤ 1 + EPS_PSD`, typically
    /// because `r` is a convex combination or rotation of valid states.
    pub(crate) fn from_bloch_unchecked(r: BlochVector) -> Self {
        debug_assert!(r.norm() <= 1.0 + 1e-6, "unchecked state outside ball: {r:?}");
        DensityMatrix { r }
    }

    pub fn from_matrix(m: Mat2) -> Result<Self> {
        let deviation = m.hermiticity_defect();
        if deviation > EPS_MATRIX {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > EPS_MATRIX {
            return Err(Error::TraceNotOne { trace });
        }
        let e = m.hermitian_eigen();
        for ev in e.values {
            if ev < -EPS_PSD || ev > 1.0 + EPS_PSD {
                return Err(Error::NotPositive { eigenvalue: ev });
            }
        }
        let (_, n) = m.pauli_coefficients();
        Ok(DensityMatrix {
            r: BlochVector::new(2.0 * n[0], 2.0 * n[1], 2.0 * n[2]),
        })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix { r: BlochVector::ZERO }
    }

    /// `diag(p, 1-p)` in the computational basis.
    pub fn diagonal(p: f64) -> Result<Self> {
        Self::from_bloch(BlochVector::new(0.0, 0.0, 2.0 * p - 1.0))
    }

    pub fn bloch(&self) -> BlochVector {
        self.r
    }

    pub fn matrix(&self) -> Mat2 {
        let r = self.r;
        Mat2::new(
            C64::new(0.5 * (1.0 + r.z), 0.0),
            C64::new(0.5 * r.x, -0.5 * r.y),
            C64::new(0.5 * r.x, 0.5 * r.y),
            C64::new(0.5 * (1.0 - r.z), 0.0),
        )
    }

    /// Purity radius `|r|`.
    pub fn radius(&self) -> f64 {
        self.r.norm()
    }

    /// Descending eigenvalues, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = self.matrix().hermitian_eigen();
        [e.values[0].clamp(0.0, 1.0), e.values[1].clamp(0.0, 1.0)]
    }

    pub fn eigen(&self) -> HermitianEigen {
        let mut e = self.matrix().hermitian_eigen();
        for v in &mut e.values {
            *v = v.clamp(0.0, 1.0);
        }
        e
    }

    /// `a·self + (1-a)·other` for `a ∈ [0, 1]`.
    pub fn mix(&self, a: f64, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_bloch_unchecked(self.r * a + other.r * (1.0 - a))
    }

    pub fn expectation(&self, op: &Mat2) -> f64 {
        (*op * self.matrix()).trace().re
    }
}

/// A Hermitian 2×2 Hamiltonian `c·𝟙 + f·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian2 {
    offset: f64,
    field: BlochVector,
}

impl Hamiltonian2 {
    pub fn zero() -> Self {
        Hamiltonian2 { offset: 0.0, field: BlochVector::ZERO }
    }

    pub fn from_matrix(m: Mat2) -> Result<Self> {
        let deviation = m.hermiticity_defect();
        if deviation > EPS_MATRIX {
            return Err(Error::NotHermitian { deviation });
        }
        let (c, n) = m.pauli_coefficients();
        Ok(Hamiltonian2 { offset: c, field: n.into() })
    }

    /// `E₀ (n̂·σ)` with `n̂ = axis / |axis|`. A zero axis gives `H = 0`.
    pub fn from_field(e0: f64, axis: BlochVector) -> Self {
        let field = axis.normalized().map_or(BlochVector::ZERO, |a| a * e0);
        Hamiltonian2 { offset: 0.0, field }
    }

    pub fn from_pauli(offset: f64, field: BlochVector) -> Self {
        Hamiltonian2 { offset, field }
    }

    pub fn sigma_z(e0: f64) -> Self {
        Self::from_field(e0, BlochVector::new(0.0, 0.0, 1.0))
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn field(&self) -> BlochVector {
        self.field
    }

    /// Energy-eigenbasis axis, if the Hamiltonian is not a multiple of 𝟙.
    pub fn axis(&self) -> Option<BlochVector> {
        self.field.normalized()
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::identity().scale(self.offset) + self.field.sigma()
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::from_pauli(self.offset, self.field.as_array())
    }

    pub fn shifted(&self, c: f64) -> Self {
        Hamiltonian2 { offset: self.offset + c, field: self.field }
    }

    /// `tr[Hρ]`
    pub fn energy(&self, rho: &DensityMatrix) -> f64 {
        self.offset + self.field.dot(&rho.bloch())
    }

    pub fn interpolate(&self, other: &Hamiltonian2, s: f64) -> Hamiltonian2 {
        Hamiltonian2 {
            offset: (1.0 - s) * self.offset + s * other.offset,
            field: self.field * (1.0 - s) + other.field * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(kt: f64) -> Result<Self> {
        if kt > 0.0 && kt.is_finite() {
            Ok(Temperature(kt))
        } else {
            Err(Error::InvalidTemperature(kt))
        }
    }

    pub fn kt(&self) -> f64 {
        self.0
    }
}

impl Default for Temperature {
    fn default() -> Self {
        Temperature(1.0)
    }
}

impl TryFrom<f64> for Temperature {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Temperature::new(v)
    }
}

impl From<Temperature> for f64 {
    fn from(t: Temperature) -> f64 {
        t.0
    }
}

pub fn density_from_bloch(r: BlochVector) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(r)
}

pub fn bloch_from_density(rho: &DensityMatrix) -> BlochVector {
    rho.bloch()
}

/// `‖ρ − σ‖₁`, the sum of absolute eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let e = (rho.matrix() - sigma.matrix()).hermitian_eigen();
    e.values[0].abs() + e.values[1].abs()
}

fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Von Neumann entropy in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    let [a, b] = rho.eigenvalues();
    (-(xlnx(a) + xlnx(b))).max(0.0)
}

/// `S(ρ‖σ) = tr[ρ ln ρ − ρ ln σ]`, evaluated in σ's eigenbasis. Returns
/// `+∞` when ρ has weight outside the support of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let es = sigma.eigen();
    let m = rho.matrix();
    let mut cross = 0.0;
    for k in 0..2 {
        let v = es.vectors[k];
        let w = (v[0].conj() * (m.get(0, 0) * v[0] + m.get(0, 1) * v[1])
            + v[1].conj() * (m.get(1, 0) * v[0] + m.get(1, 1) * v[1]))
            .re;
        let s = es.values[k];
        if s <= 0.0 {
            if w > 1e-14 {
                return f64::INFINITY;
            }
            continue;
        }
        cross += w * s.ln();
    }
    let [a, b] = rho.eigenvalues();
    (xlnx(a) + xlnx(b) - cross).max(0.0)
}

/// `τ = exp(−H/kT) / Z`.
pub fn gibbs_state(h: &Hamiltonian2, t: Temperature) -> DensityMatrix {
    let e = h.eigen();
    let emin = e.values[1];
    let w = [(-(e.values[0] - emin) / t.kt()).exp(), 1.0];
    let z = w[0] + w[1];
    let m = e.projector(0).scale(w[0] / z) + e.projector(1).scale(w[1] / z);
    let (_, n) = m.pauli_coefficients();
    DensityMatrix::from_bloch_unchecked(BlochVector::new(2.0 * n[0], 2.0 * n[1], 2.0 * n[2]))
}

/// `H = −kT ln τ`, the Hamiltonian whose Gibbs state is τ, in the gauge
/// `Z = 1`.
pub fn state_hamiltonian(tau: &DensityMatrix, t: Temperature) -> Result<Hamiltonian2> {
    let e = tau.eigen();
    let smallest = e.values[1];
    if smallest <= EPS_PSD {
        return Err(Error::RankDeficient { eigenvalue: smallest });
    }
    Hamiltonian2::from_matrix(e.map_spectrum(|p| -t.kt() * p.ln()))
}

/// `F(ρ) = tr[Hρ] − kT S(ρ)`.
pub fn free_energy(rho: &DensityMatrix, h: &Hamiltonian2, t: Temperature) -> f64 {
    h.energy(rho) - t.kt() * vn_entropy(rho)
}

/// Binary entropy of the eigenvalues `(1 ± r)/2` of a state with Bloch
/// radius `r`.
pub fn entropy_of_radius(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    -(xlnx(0.5 * (1.0 + r)) + xlnx(0.5 * (1.0 - r)))
}
