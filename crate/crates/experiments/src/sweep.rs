//! One-parameter and planar scans over dephasing tasks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dualq_core::optimize::n_scan;
use dualq_core::{
    canonical_solve, clausius_bound, final_bound, optimize_protocol, protocol_ledger, BlochVector, DensityMatrix,
    FieldSpec, OptimizationConfig, Protocol, TaskSpec, Temperature,
};

use crate::tasks::dephasing_task;
use crate::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Gamma,
    NScan,
    Heatmap,
}

impl SweepKind {
    pub fn axes(&self) -> &'static [&'static str] {
        match self {
            SweepKind::Gamma => &["gamma"],
            SweepKind::NScan => &["n_steps"],
            SweepKind::Heatmap => &["u", "v"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    /// Values along [`SweepKind::axes`].
    pub coords: Vec<f64>,
    pub task: TaskSpec,
    pub feasibility: String,
    /// Offending `λ` or eigenvalue of infeasible tasks.
    pub witness: Option<f64>,
    pub clausius: f64,
    pub final_bound: Option<f64>,
    pub single_step_work: Option<f64>,
    pub optimized_work: Option<f64>,
    /// The optimized protocol, for replay.
    pub protocol: Option<Protocol>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Point with the largest optimized work.
    pub fn argmax(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.optimized_work.is_some())
            .max_by(|a, b| a.optimized_work.unwrap().total_cmp(&b.optimized_work.unwrap()))
    }

    /// Indices of feasible points whose optimized work falls outside
    /// `[single step, final bound]` by more than `slack`.
    pub fn ordering_violations(&self, slack: f64) -> Vec<usize> {
        self.points
            .iter()
            .filter(|p| match (p.single_step_work, p.optimized_work, p.final_bound) {
                (Some(s), Some(w), Some(f)) => w < s - slack || w > f + slack || f > p.clausius + slack,
                _ => false,
            })
            .map(|p| p.index)
            .collect()
    }
}

/// Evaluates one task: bounds, canonical work and (when feasible) the
/// optimized work.
pub fn evaluate_point(index: usize, coords: Vec<f64>, task: TaskSpec, config: &OptimizationConfig) -> Result<SweepPoint> {
    let sol = canonical_solve(&task)?;
    let mut point = SweepPoint {
        index,
        coords,
        task,
        feasibility: sol.feasibility.code().to_string(),
        witness: sol.feasibility.witness(),
        clausius: clausius_bound(&task),
        final_bound: None,
        single_step_work: None,
        optimized_work: None,
        protocol: None,
        evaluations: 0,
    };
    if !sol.feasibility.is_feasible() {
        return Ok(point);
    }
    point.final_bound = Some(final_bound(&task)?.value);
    let (_, single) = dualq_core::canonical_protocol(&task)?;
    point.single_step_work = Some(protocol_ledger(&single)?.mean_work);
    let r = optimize_protocol(&task, config)?;
    point.optimized_work = Some(r.mean_work);
    point.evaluations = r.evaluations;
    point.protocol = Some(r.protocol);
    Ok(point)
}

/// Inputs and environment shared by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSetup {
    pub rho1: BlochVector,
    pub rho2: BlochVector,
    pub p1: f64,
    pub h0: FieldSpec,
    pub kt: f64,
}

impl SweepSetup {
    fn states(&self) -> Result<(DensityMatrix, DensityMatrix, Temperature)> {
        Ok((DensityMatrix::from_bloch(self.rho1)?, DensityMatrix::from_bloch(self.rho2)?, Temperature::new(self.kt)?))
    }
}

/// Optimized and single-step work, Clausius and final bounds per `γ`.
pub fn gamma_sweep(setup: &SweepSetup, gammas: &[f64], config: &OptimizationConfig) -> Result<SweepResult> {
    config.validate()?;
    let (r1, r2, t) = setup.states()?;
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(ExperimentError::Config(format!("gamma {g} is outside [0, 1]")));
    }
    let points = gammas
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let task = dephasing_task(&r1, &r2, g, setup.p1, setup.h0, t)?;
            evaluate_point(i, vec![g], task, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { kind: SweepKind::Gamma, points })
}

/// Optimized work against the number of steps for one task, each `N`
/// warm-started from the previous one.
pub fn n_sweep(task: &TaskSpec, ns: &[usize], config: &OptimizationConfig) -> Result<SweepResult> {
    config.validate()?;
    let sol = canonical_solve(task)?;
    if !sol.feasibility.is_feasible() {
        return Err(dualq_core::Error::Infeasible(sol.feasibility).into());
    }
    let fb = final_bound(task)?.value;
    let clausius = clausius_bound(task);
    let (_, single) = dualq_core::canonical_protocol(task)?;
    let w1 = protocol_ledger(&single)?.mean_work;
    let results = n_scan(task, ns, config)?;
    let points = results
        .into_iter()
        .zip(ns)
        .enumerate()
        .map(|(i, (r, &n))| SweepPoint {
            index: i,
            coords: vec![n as f64],
            task: *task,
            feasibility: sol.feasibility.code().to_string(),
            witness: None,
            clausius,
            final_bound: Some(fb),
            single_step_work: Some(w1),
            optimized_work: Some(r.mean_work),
            protocol: Some(r.protocol),
            evaluations: r.evaluations,
        })
        .collect();
    Ok(SweepResult { kind: SweepKind::NScan, points })
}

/// `resolution × resolution` grid over the disk spanned by the field axis
/// and the part of `ρ₁` orthogonal to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
}

/// The in-plane unit vectors `(û, n̂)`: `n̂` along the field, `û` along the
/// orthogonal part of `ρ₁` (the x axis, or y, when that part vanishes).
pub fn heatmap_plane(rho1: BlochVector, h0: &FieldSpec) -> (BlochVector, BlochVector) {
    let n = h0.unit_axis();
    let perp = rho1 - n * rho1.dot(&n);
    let u = perp.normalized().unwrap_or_else(|| {
        let x = BlochVector::new(1.0, 0.0, 0.0);
        let trial = x - n * x.dot(&n);
        trial.normalized().unwrap_or(BlochVector::new(0.0, 1.0, 0.0))
    });
    (u, n)
}

/// Default heatmap input: a fixed mixed state rotated into the x–z plane.
pub fn default_heatmap_rho1() -> BlochVector {
    BlochVector::new((0.249f64 * 0.249 + 0.183 * 0.183).sqrt(), 0.0, 0.494)
}

/// Fully dephasing tasks with `ρ₂` on a planar grid. Points outside the
/// disk, or equal to `ρ₁`, are skipped.
pub fn work_heatmap(setup: &SweepSetup, grid: GridSpec, config: &OptimizationConfig) -> Result<SweepResult> {
    config.validate()?;
    if grid.resolution < 2 {
        return Err(ExperimentError::Config("grid resolution must be at least 2".into()));
    }
    let r1 = DensityMatrix::from_bloch(setup.rho1)?;
    let t = Temperature::new(setup.kt)?;
    let (u, n) = heatmap_plane(setup.rho1, &setup.h0);
    let m = grid.resolution;
    let step = 2.0 / (m - 1) as f64;
    let coords: Vec<(f64, f64)> = (0..m)
        .flat_map(|j| (0..m).map(move |i| (-1.0 + i as f64 * step, -1.0 + j as f64 * step)))
        .filter(|(a, b)| a * a + b * b <= 1.0)
        .filter(|(a, b)| (u * *a + n * *b - setup.rho1).norm() > dualq_core::synthesis::EPS_DEGENERATE)
        .collect();
    let points = coords
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let r2 = DensityMatrix::from_bloch(u * a + n * b)?;
            let task = dephasing_task(&r1, &r2, 1.0, setup.p1, setup.h0, t)?;
            evaluate_point(i, vec![a, b], task, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { kind: SweepKind::Heatmap, points })
}

/// Largest disagreement between each point's optimized work and the
/// ledger of its stored protocol.
pub fn replay_error(result: &SweepResult) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in &result.points {
        if let (Some(w), Some(proto)) = (p.optimized_work, &p.protocol) {
            worst = worst.max((protocol_ledger(proto)?.mean_work - w).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3b() -> SweepSetup {
        SweepSetup {
            rho1: BlochVector::new(0.249, 0.183, 0.494),
            rho2: BlochVector::new(-0.044, -0.640, 0.508),
            p1: 0.5,
            h0: FieldSpec::default(),
            kt: 1.0,
        }
    }

    fn quick(n: usize) -> OptimizationConfig {
        OptimizationConfig { n_steps: n, max_evals: 5_000, ..Default::default() }
    }

    #[test]
    fn zero_gamma_is_free() {
        let r = gamma_sweep(&fig3b(), &[0.0], &quick(3)).unwrap();
        let p = &r.points[0];
        assert_eq!(p.feasibility, "identity");
        assert_eq!(p.optimized_work, Some(0.0));
        assert_eq!(p.single_step_work, Some(0.0));
        assert!(p.clausius.abs() < 1e-15);
        assert_eq!(p.final_bound, Some(p.clausius));
    }

    #[test]
    fn gamma_window_ordering() {
        let gammas: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let r = gamma_sweep(&fig3b(), &gammas, &quick(4)).unwrap();
        assert_eq!(r.points.len(), 11);
        assert!(r.ordering_violations(1e-8).is_empty());
        assert!(replay_error(&r).unwrap() < 1e-9);
        assert!(r.points.iter().all(|p| p.index == (p.coords[0] * 10.0).round() as usize));
    }

    #[test]
    fn bad_gamma_rejected() {
        assert!(gamma_sweep(&fig3b(), &[1.5], &quick(2)).is_err());
    }

    #[test]
    fn heatmap_regimes() {
        let setup = SweepSetup { rho1: default_heatmap_rho1(), ..fig3b() };
        let r = work_heatmap(&setup, GridSpec { resolution: 21 }, &quick(4)).unwrap();
        let infeasible: Vec<_> = r.points.iter().filter(|p| p.optimized_work.is_none()).collect();
        assert!(!infeasible.is_empty());
        assert!(infeasible.iter().all(|p| p.feasibility == "tau_not_positive"));
        assert!(r.points.iter().any(|p| p.optimized_work.is_some_and(|w| w < 0.0)));
        assert!(r.points.iter().all(|p| p.coords[0].powi(2) + p.coords[1].powi(2) <= 1.0));
        let (u, n) = heatmap_plane(setup.rho1, &setup.h0);
        for p in &r.points {
            let expect = u * p.coords[0] + n * p.coords[1];
            assert!((p.task.rho2().bloch() - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn plane_contains_rho1() {
        let h0 = FieldSpec { e0: 1.0, axis: BlochVector::new(0.0, 1.0, 1.0) };
        let r = BlochVector::new(0.2, -0.1, 0.4);
        let (u, n) = heatmap_plane(r, &h0);
        assert!(u.dot(&n).abs() < 1e-15);
        let back = u * r.dot(&u) + n * r.dot(&n);
        assert!((back - r).norm() < 1e-15);
        let (u, _) = heatmap_plane(BlochVector::new(0.0, 0.0, 0.3), &FieldSpec::default());
        assert_eq!(u, BlochVector::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn n_sweep_matches_scan() {
        let task = TaskSpec::from_bloch([0.735, 0.273, -0.286], [-0.496, -0.470, -0.294], [0.0, 0.0, -0.286], [0.0, 0.0, -0.294])
            .unwrap();
        let r = n_sweep(&task, &[1, 2, 3], &quick(1)).unwrap();
        assert_eq!(r.points.len(), 3);
        assert_eq!(r.points[0].optimized_work, r.points[0].single_step_work);
        assert!(r.points[2].optimized_work > r.points[0].optimized_work);
        assert!(replay_error(&r).unwrap() < 1e-9);
    }
}
