//! Dense 2×2 complex matrices and an exact Hermitian eigensolver.
//!
//! Eigenvalues are returned in descending order. Eigenvectors follow a fixed
//! phase convention: the first component with nonzero modulus is real and
//! positive. An exactly degenerate matrix (a multiple of the identity) gets
//! the computational basis.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn pauli_x() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn pauli_y() -> Self {
        Mat2([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn pauli_z() -> Self {
        Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    pub fn paulis() -> [Mat2; 3] {
        [Self::pauli_x(), Self::pauli_y(), Self::pauli_z()]
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[C64; 2], v: &[C64; 2]) -> Self {
        Mat2([
            [u[0] * v[0].conj(), u[0] * v[1].conj()],
            [u[1] * v[0].conj(), u[1] * v[1].conj()],
        ])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let m = &self.0;
        Mat2([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    pub fn apply(&self, v: &[C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let d = *self - *other;
        d.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `UMU†`
    pub fn conjugate_by(&self, u: &Mat2) -> Mat2 {
        *u * *self * u.adjoint()
    }

    /// Coefficients `(c, n)` of the Pauli expansion `M = c·𝟙 + n·σ` of the
    /// Hermitian part.
    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let c = 0.5 * (m[0][0].re + m[1][1].re);
        let off = 0.5 * (m[0][1] + m[1][0].conj());
        (c, [off.re, -off.im, 0.5 * (m[0][0].re - m[1][1].re)])
    }

    /// Eigendecomposition of the Hermitian part of this matrix.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let (c, n) = self.pauli_coefficients();
        HermitianEigen::from_pauli(c, n)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigen {
    /// Descending.
    pub values: [f64; 2],
    /// `vectors[k]` belongs to `values[k]`.
    pub vectors: [[C64; 2]; 2],
}

impl HermitianEigen {
    /// Decomposes `c·𝟙 + n·σ`.
    pub fn from_pauli(c: f64, n: [f64; 3]) -> Self {
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if r == 0.0 {
            return HermitianEigen {
                values: [c, c],
                vectors: [[ONE, ZERO], [ZERO, ONE]],
            };
        }
        let (nx, ny, nz) = (n[0] / r, n[1] / r, n[2] / r);
        let plus = if nz >= 0.0 {
            [C64::new(1.0 + nz, 0.0), C64::new(nx, ny)]
        } else {
            [C64::new(nx, -ny), C64::new(1.0 - nz, 0.0)]
        };
        let minus = if nz >= 0.0 {
            [C64::new(nx, -ny), C64::new(-(1.0 + nz), 0.0)]
        } else {
            [C64::new(1.0 - nz, 0.0), C64::new(-nx, -ny)]
        };
        HermitianEigen {
            values: [c + r, c - r],
            vectors: [fix_phase(normalize(plus)), fix_phase(normalize(minus))],
        }
    }

    /// Spectral projector onto eigenvector `k`.
    pub fn projector(&self, k: usize) -> Mat2 {
        Mat2::outer(&self.vectors[k], &self.vectors[k])
    }

    /// `Σₖ f(λₖ)|k⟩⟨k|`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        self.projector(0).scale(f(self.values[0])) + self.projector(1).scale(f(self.values[1]))
    }
}

fn normalize(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Rotates the global phase so the first nonzero component is real positive.
pub fn fix_phase(v: [C64; 2]) -> [C64; 2] {
    let lead = if v[0].norm() > 0.0 { v[0] } else { v[1] };
    let n = lead.norm();
    if n == 0.0 {
        return v;
    }
    let phase = lead.conj() / n;
    let mut out = [v[0] * phase, v[1] * phase];
    // Remove the rounding residue on the now-real entry.
    let k = if v[0].norm() > 0.0 { 0 } else { 1 };
    out[k] = C64::new(out[k].norm(), 0.0);
    out
}
