//! How often is a random dual-purpose dephasing task feasible, and how often
//! does its best protocol yield work?

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dualq_core::optimize::{optimize_protocol_with, SearchOptions};
use dualq_core::synthesis::EPS_DEGENERATE;
use dualq_core::{
    canonical_protocol, final_bound, protocol_ledger, DensityMatrix, FieldSpec, OptimizationConfig, Temperature,
};

use crate::tasks::{dephasing_task, Sampling};
use crate::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub n_samples: usize,
    pub sampling: Sampling,
    pub seed: u64,
    pub p1: f64,
    pub gamma: f64,
    /// Steps of the protocols used to decide whether work can be extracted.
    pub optimize_n: usize,
    /// Classify work for at most this many feasible pairs (the first ones
    /// drawn); `None` classifies all of them.
    pub work_samples: Option<usize>,
    pub max_evals: usize,
    pub h0: FieldSpec,
    pub kt: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            n_samples: 100_000,
            sampling: Sampling::BallUniform,
            seed: 0,
            p1: 0.5,
            gamma: 1.0,
            optimize_n: 20,
            work_samples: Some(1_000),
            max_evals: 100_000,
            h0: FieldSpec::default(),
            kt: 1.0,
        }
    }
}

impl CensusConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p1) || !(0.0..=1.0).contains(&self.gamma) {
            return bad("p1 and gamma must lie in [0, 1]");
        }
        if self.optimize_n == 0 {
            return bad("optimize_n must be at least 1");
        }
        Temperature::new(self.kt)?;
        Ok(())
    }
}

/// A fraction with its binomial standard error; both are zero when there
/// were no trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: usize,
    pub trials: usize,
    pub value: f64,
    pub std_err: f64,
}

impl Proportion {
    pub fn new(hits: usize, trials: usize) -> Self {
        if trials == 0 {
            return Proportion { hits, trials, value: 0.0, std_err: 0.0 };
        }
        let p = hits as f64 / trials as f64;
        Proportion { hits, trials, value: p, std_err: (p * (1.0 - p) / trials as f64).sqrt() }
    }
}

/// How a feasible pair's work sign was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkVerdict {
    /// The final bound is not positive, so no protocol yields work.
    BoundNonPositive,
    /// The canonical single step already yields work.
    SingleStep,
    /// The optimizer found a positive-work protocol.
    Optimized,
    /// The optimizer's best protocol still costs work.
    NotFound,
}

impl WorkVerdict {
    pub fn positive(&self) -> bool {
        matches!(self, WorkVerdict::SingleStep | WorkVerdict::Optimized)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub config: CensusConfig,
    pub feasible: Proportion,
    /// Among classified feasible pairs.
    pub positive_work: Proportion,
    /// Samples per feasibility code.
    pub counts: BTreeMap<String, usize>,
    /// Classified pairs per verdict.
    pub verdicts: BTreeMap<String, usize>,
    /// Draws discarded because the two inputs coincided.
    pub rejected: usize,
}

/// Draws the input pairs. Pairs closer than the degeneracy tolerance are
/// redrawn; the count of redraws is returned alongside.
pub fn sample_pairs(config: &CensusConfig) -> (Vec<[DensityMatrix; 2]>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rejected = 0;
    let mut out = Vec::with_capacity(config.n_samples);
    while out.len() < config.n_samples {
        let a = config.sampling.sample(&mut rng);
        let b = config.sampling.sample(&mut rng);
        if (a.bloch() - b.bloch()).norm() <= EPS_DEGENERATE {
            rejected += 1;
            continue;
        }
        out.push([a, b]);
    }
    (out, rejected)
}

/// Settles whether the best `optimize_n`-step protocol of a feasible task
/// yields work, stopping as soon as any protocol does.
pub fn classify_work(task: &dualq_core::TaskSpec, optimize_n: usize, max_evals: usize) -> Result<WorkVerdict> {
    if final_bound(task)?.value <= 0.0 {
        return Ok(WorkVerdict::BoundNonPositive);
    }
    let (_, p) = canonical_protocol(task)?;
    if protocol_ledger(&p)?.mean_work > 0.0 {
        return Ok(WorkVerdict::SingleStep);
    }
    let cfg = OptimizationConfig { n_steps: optimize_n, max_evals, ..Default::default() };
    let opts = SearchOptions { warm_start: None, stop_above: Some(0.0) };
    let r = optimize_protocol_with(task, &cfg, &opts)?;
    Ok(if r.mean_work > 0.0 { WorkVerdict::Optimized } else { WorkVerdict::NotFound })
}

pub fn feasibility_census(config: &CensusConfig) -> Result<CensusResult> {
    config.validate()?;
    let t = Temperature::new(config.kt)?;
    let (pairs, rejected) = sample_pairs(config);
    let tasks = pairs
        .par_iter()
        .map(|[a, b]| dephasing_task(a, b, config.gamma, config.p1, config.h0, t))
        .collect::<dualq_core::Result<Vec<_>>>()?;
    let solutions = tasks
        .par_iter()
        .map(dualq_core::canonical_solve)
        .collect::<dualq_core::Result<Vec<_>>>()?;

    let mut counts = BTreeMap::new();
    for s in &solutions {
        *counts.entry(s.feasibility.code().to_string()).or_insert(0) += 1;
    }
    let feasible: Vec<usize> = (0..tasks.len()).filter(|&i| solutions[i].feasibility.is_feasible()).collect();
    let limit = config.work_samples.unwrap_or(feasible.len()).min(feasible.len());
    let verdicts = feasible[..limit]
        .par_iter()
        .map(|&i| classify_work(&tasks[i], config.optimize_n, config.max_evals))
        .collect::<Result<Vec<_>>>()?;

    let mut verdict_counts = BTreeMap::new();
    for v in &verdicts {
        let key = serde_json::to_value(v)?.as_str().unwrap_or_default().to_string();
        *verdict_counts.entry(key).or_insert(0) += 1;
    }
    Ok(CensusResult {
        config: *config,
        feasible: Proportion::new(feasible.len(), tasks.len()),
        positive_work: Proportion::new(verdicts.iter().filter(|v| v.positive()).count(), verdicts.len()),
        counts,
        verdicts: verdict_counts,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_errors() {
        let p = Proportion::new(25, 100);
        assert_eq!(p.value, 0.25);
        assert!((p.std_err - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(Proportion::new(0, 0).value, 0.0);
    }

    #[test]
    fn small_census_is_deterministic() {
        let cfg = CensusConfig { n_samples: 400, work_samples: Some(20), optimize_n: 4, max_evals: 4_000, ..Default::default() };
        let a = feasibility_census(&cfg).unwrap();
        let b = feasibility_census(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<usize>(), 400);
        assert_eq!(a.positive_work.trials, 20);
        assert_eq!(a.verdicts.values().sum::<usize>(), 20);
        let c = feasibility_census(&CensusConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.feasible.hits, c.feasible.hits);
    }

    #[test]
    fn full_dephasing_never_exceeds_unit_lambda() {
        let cfg = CensusConfig { n_samples: 2_000, work_samples: Some(0), ..Default::default() };
        let r = feasibility_census(&cfg).unwrap();
        assert!(!r.counts.contains_key("lambda_exceeds_one"));
    }

    #[test]
    fn verdicts_agree_with_optimizer() {
        let (pairs, _) = sample_pairs(&CensusConfig { n_samples: 200, seed: 3, ..Default::default() });
        let t = Temperature::default();
        let mut seen = 0;
        for [a, b] in pairs {
            let task = dephasing_task(&a, &b, 1.0, 0.5, FieldSpec::default(), t).unwrap();
            if !dualq_core::canonical_solve(&task).unwrap().feasibility.is_feasible() {
                continue;
            }
            let v = classify_work(&task, 3, 5_000).unwrap();
            let cfg = OptimizationConfig { n_steps: 3, max_evals: 5_000, ..Default::default() };
            let w = dualq_core::optimize_protocol(&task, &cfg).unwrap().mean_work;
            if v == WorkVerdict::BoundNonPositive {
                assert!(w <= 0.0);
            }
            if w > 0.0 {
                assert!(v.positive());
            }
            seen += 1;
        }
        assert!(seen > 50);
    }
}
