//! Reversible work extraction from a single known input: quench `H₀ → H_ρ`,
//! drag the Hamiltonian from `H_ρ` to `H_η` through `N` full
//! thermalizations, quench `H_η → H₀`. The realized work approaches the
//! free-energy drop `F(ρ) − F(η)` as `N` grows, with a gap of order `1/N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{
    free_energy, gibbs_state, state_hamiltonian, BlochVector, DensityMatrix, Hamiltonian2, Temperature, EPS_PSD,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub n_steps: usize,
    /// Work extracted by the discretized protocol.
    pub work: f64,
    /// `F(ρ) − F(η)` with respect to `H₀`.
    pub limit: f64,
    /// `limit − work`, never negative.
    pub gap: f64,
    /// `gap / kT`
    pub entropy_production: f64,
}

/// `(1 − ε)ρ + ε𝟙/2`
pub fn smooth(rho: &DensityMatrix, eps: f64) -> DensityMatrix {
    rho.mix(1.0 - eps, &DensityMatrix::maximally_mixed())
}

/// Runs the `N`-step staircase from `rho` to `eta`. Endpoints with an
/// eigenvalue at or below 1e-9 need `eps`; when `eps` is given both
/// endpoints are smoothed with it and the limit refers to the smoothed
/// states.
pub fn single_input_reference(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    h0: &Hamiltonian2,
    t: Temperature,
    n: usize,
    eps: Option<f64>,
) -> Result<BaselineResult> {
    if n == 0 {
        return Err(Error::InvalidConfig("number of steps must be at least 1".into()));
    }
    let (rho, eta) = match eps {
        Some(e) if e > 0.0 && e < 1.0 => (smooth(rho, e), smooth(eta, e)),
        Some(e) => return Err(Error::InvalidConfig(format!("smoothing epsilon {e} is outside (0, 1)"))),
        None => (*rho, *eta),
    };
    for s in [&rho, &eta] {
        let low = s.eigenvalues()[1];
        if low <= EPS_PSD {
            return Err(Error::SingularEndpoint { eigenvalue: low });
        }
    }
    let h_rho = state_hamiltonian(&rho, t)?;
    let h_eta = state_hamiltonian(&eta, t)?;

    let mut work = h0.energy(&rho) - h_rho.energy(&rho);
    let mut state = rho;
    let mut h = h_rho;
    for k in 1..=n {
        let next = if k == n { h_eta } else { h_rho.interpolate(&h_eta, k as f64 / n as f64) };
        work += h.energy(&state) - next.energy(&state);
        state = if k == n { eta } else { gibbs_state(&next, t) };
        h = next;
    }
    work += h_eta.energy(&eta) - h0.energy(&eta);

    let limit = free_energy(&rho, h0, t) - free_energy(&eta, h0, t);
    let gap = (limit - work).max(0.0);
    Ok(BaselineResult { n_steps: n, work, limit, gap, entropy_production: gap / t.kt() })
}

/// The state with Bloch vector `r` dephased along `axis`.
pub fn dephased(r: BlochVector, axis: BlochVector) -> Result<DensityMatrix> {
    let a = axis.normalized().unwrap_or(BlochVector::new(0.0, 0.0, 1.0));
    DensityMatrix::from_bloch(a * r.dot(&a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::vn_entropy;

    fn dm(x: f64, y: f64, z: f64) -> DensityMatrix {
        DensityMatrix::from_bloch(BlochVector::new(x, y, z)).unwrap()
    }

    #[test]
    fn identical_endpoints() {
        let r = dm(0.2, -0.3, 0.4);
        let b = single_input_reference(&r, &r, &Hamiltonian2::sigma_z(0.7), Temperature::default(), 5, None).unwrap();
        assert!(b.work.abs() < 1e-14 && b.limit.abs() < 1e-14);
    }

    #[test]
    fn dephasing_has_positive_limit() {
        let r = dm(0.735, 0.273, -0.286);
        let eta = dephased(r.bloch(), BlochVector::new(0.0, 0.0, 1.0)).unwrap();
        let t = Temperature::new(1.3).unwrap();
        let b = single_input_reference(&r, &eta, &Hamiltonian2::sigma_z(1.0), t, 200, None).unwrap();
        let oracle = t.kt() * (vn_entropy(&eta) - vn_entropy(&r));
        assert!(oracle > 0.0);
        assert!((b.limit - oracle).abs() < 1e-12);
        assert!(b.work <= b.limit && b.work > 0.0);
    }

    #[test]
    fn gap_halves_when_steps_double() {
        let r = dm(0.5, 0.1, -0.6);
        let eta = dm(-0.3, 0.4, 0.2);
        let h0 = Hamiltonian2::from_field(0.9, BlochVector::new(1.0, 0.0, 1.0));
        let t = Temperature::default();
        let gaps: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| single_input_reference(&r, &eta, &h0, t, n, None).unwrap().gap)
            .collect();
        for w in gaps.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 0.5).abs() < 0.1, "{gaps:?}");
        }
    }

    #[test]
    fn singular_endpoint_needs_smoothing() {
        let pure = dm(0.0, 0.0, 1.0);
        let mixed = dm(0.0, 0.0, 0.2);
        let h0 = Hamiltonian2::sigma_z(1.0);
        let t = Temperature::default();
        assert!(matches!(
            single_input_reference(&pure, &mixed, &h0, t, 10, None),
            Err(Error::SingularEndpoint { .. })
        ));
        let b = single_input_reference(&pure, &mixed, &h0, t, 10, Some(1e-6)).unwrap();
        assert!(b.limit.is_finite() && b.work.is_finite());
        assert!(single_input_reference(&pure, &mixed, &h0, t, 10, Some(1.5)).is_err());
    }
}
