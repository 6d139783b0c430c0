use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use dualq_core::{BlochVector, DensityMatrix, FieldSpec, Result, TaskSpec, Temperature};

/// Output of dephasing `r` by `gamma` in the eigenbasis of `h0`: the
/// component along the field axis is kept and the rest scaled by `1−γ`.
pub fn dephase(r: BlochVector, gamma: f64, h0: &FieldSpec) -> BlochVector {
    let n = h0.unit_axis();
    let along = n * r.dot(&n);
    along + (r - along) * (1.0 - gamma)
}

/// The task `ρᵢ ↦ (1−γ)ρᵢ + γ·diag(ρᵢ)`, with the diagonal taken in the
/// eigenbasis of `h0`.
pub fn dephasing_task(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    gamma: f64,
    p1: f64,
    h0: FieldSpec,
    t: Temperature,
) -> Result<TaskSpec> {
    let out = |r: &DensityMatrix| DensityMatrix::from_bloch(dephase(r.bloch(), gamma, &h0));
    TaskSpec::new([*rho1, *rho2], [out(rho1)?, out(rho2)?], p1, h0, t)
}

/// How input states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Uniform over the volume of the Bloch ball: all mixed states.
    #[default]
    BallUniform,
    /// Uniform over the surface: pure states only.
    SphereUniform,
}

impl Sampling {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DensityMatrix {
        let dir = loop {
            let v = BlochVector::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
            if let Some(d) = v.normalized() {
                break d;
            }
        };
        let radius = match self {
            Sampling::BallUniform => rng.random::<f64>().cbrt(),
            Sampling::SphereUniform => 1.0,
        };
        DensityMatrix::from_bloch(dir * radius).expect("sampled inside the ball")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dm(x: f64, y: f64, z: f64) -> DensityMatrix {
        DensityMatrix::from_bloch(BlochVector::new(x, y, z)).unwrap()
    }

    #[test]
    fn dephasing_examples() {
        let r1 = dm(0.735, 0.273, -0.286);
        let r2 = dm(-0.496, -0.470, -0.294);
        let h0 = FieldSpec::default();
        let t = Temperature::default();
        let id = dephasing_task(&r1, &r2, 0.0, 0.5, h0, t).unwrap();
        assert_eq!(id.eta1(), &r1);
        assert!(id.is_identity());
        let full = dephasing_task(&r1, &r2, 1.0, 0.5, h0, t).unwrap();
        assert_eq!(full.eta1().bloch(), BlochVector::new(0.0, 0.0, -0.286));
        assert_eq!(full.eta2().bloch(), BlochVector::new(0.0, 0.0, -0.294));
    }

    #[test]
    fn dephasing_along_tilted_field() {
        let h0 = FieldSpec { e0: 2.0, axis: BlochVector::new(1.0, 0.0, 1.0) };
        let r = BlochVector::new(0.3, 0.4, -0.1);
        let d = dephase(r, 1.0, &h0);
        assert!(d.cross(&h0.axis).norm() < 1e-15);
        assert!((d.dot(&h0.unit_axis()) - r.dot(&h0.unit_axis())).abs() < 1e-15);
        let half = dephase(r, 0.5, &h0);
        assert!((half - (r + d) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn sampling_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let radii: Vec<f64> = (0..n).map(|_| Sampling::BallUniform.sample(&mut rng).radius()).collect();
        // Radius of a uniform ball point has CDF r³, so P(r < ½) = ⅛.
        let inner = radii.iter().filter(|r| **r < 0.5).count() as f64 / n as f64;
        assert!((inner - 0.125).abs() < 0.01, "{inner}");
        let mean_z: f64 = (0..n).map(|_| Sampling::SphereUniform.sample(&mut rng).bloch().z).sum::<f64>() / n as f64;
        assert!(mean_z.abs() < 0.02);
        assert!((Sampling::SphereUniform.sample(&mut rng).radius() - 1.0).abs() < 1e-12);
    }
}
