use std::io::Write;

use anyhow::{bail, Context};
use serde::Serialize;

use dualq_core::thermo::contact_time;
use dualq_core::{
    bound_chain_diagnostics, canonical_protocol, canonical_solve, clausius_bound, final_bound, optimize_protocol,
    protocol_ledger, single_input_reference, BoundReport, EnergyLedger, FieldSpec, OptimizationConfig,
    OptimizationResult, Protocol, TaskSpec, Temperature,
};
use dualq_experiments::{
    default_heatmap_rho1, feasibility_census, gamma_sweep, n_sweep, save_json, save_sweep, work_heatmap,
    write_sweep_csv, CensusConfig, GridSpec, Manifest, SweepResult, SweepSetup,
};

use crate::{load_task, parse_grid, sampling, Cli, Command, Format};

#[derive(Serialize)]
struct Resolved<'a> {
    cli: &'a Cli,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimization: Option<OptimizationConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    census: Option<CensusConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    task: Option<TaskSpec>,
}

fn echo(r: &Resolved) -> anyhow::Result<()> {
    eprintln!("config: {}", serde_json::to_string(r)?);
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    feasibility: String,
    detail: String,
    witness: Option<f64>,
    lambda: f64,
    tau: [f64; 3],
    tau_min_eigenvalue: f64,
    /// Bloch rotation of the closing unitary, row major.
    unitary_rotation: [[f64; 3]; 3],
    verification_error: Option<f64>,
    /// Absent for infeasible tasks and for erasure, whose contact is unbounded.
    contact_time: Option<f64>,
    protocol: Option<Protocol>,
    mean_work: Option<f64>,
}

#[derive(Serialize)]
struct OptimizeReport {
    result: OptimizationResult,
    ledger: EnergyLedger,
    clausius: f64,
    final_bound: f64,
}

#[derive(Serialize)]
struct BaselineReport {
    n_steps: usize,
    work: f64,
    limit: f64,
    gap: f64,
    entropy_production: f64,
}

/// Writes `value` to stdout (or `--out`) in the requested format; `csv`
/// renders the given rows.
fn emit<T: Serialize>(cli: &Cli, stem: &str, value: &T, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<()> {
    if let Some(dir) = &cli.common.out {
        let manifest = Manifest::new(stem, cli.common.seed, serde_json::to_value(cli)?);
        let path = save_json(value, dir, stem, manifest)?;
        if cli.common.format == Format::Csv {
            let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
            w.write_record(header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        println!("{}", path.display());
        return Ok(());
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.common.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(value)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_sweep(cli: &Cli, stem: &str, result: &SweepResult) -> anyhow::Result<()> {
    if let Some(dir) = &cli.common.out {
        let manifest = Manifest::new(stem, cli.common.seed, serde_json::to_value(cli)?);
        println!("{}", save_sweep(result, dir, stem, manifest)?.display());
        return Ok(());
    }
    match cli.common.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(result)?),
        Format::Csv => write_sweep_csv(result, std::io::stdout().lock())?,
    }
    Ok(())
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn run(cli: &Cli) -> anyhow::Result<u8> {
    let c = &cli.common;
    match &cli.command {
        Command::Solve { task } => {
            let task = load_task(task, c.kt)?;
            echo(&Resolved { cli, optimization: None, census: None, task: Some(task) })?;
            let sol = canonical_solve(&task)?;
            let feasible = sol.feasibility.is_feasible();
            let (protocol, mean_work) = if feasible {
                let (_, p) = canonical_protocol(&task)?;
                let w = protocol_ledger(&p)?.mean_work;
                (Some(p), Some(w))
            } else {
                (None, None)
            };
            let report = SolveReport {
                feasibility: sol.feasibility.code().to_string(),
                detail: sol.feasibility.to_string(),
                witness: sol.feasibility.witness(),
                lambda: sol.lambda,
                tau: sol.tau.as_array(),
                tau_min_eigenvalue: sol.tau_min_eigenvalue(),
                unitary_rotation: sol.u.rotation_matrix(),
                verification_error: sol.verification_error,
                contact_time: Some(contact_time(&task)).filter(|t| feasible && t.is_finite()),
                protocol,
                mean_work,
            };
            let header = ["feasibility", "witness", "lambda", "tau_x", "tau_y", "tau_z", "tau_min_eigenvalue", "contact_time", "verification_error", "mean_work"];
            let row = vec![
                report.feasibility.clone(),
                opt(report.witness),
                num(report.lambda),
                num(report.tau[0]),
                num(report.tau[1]),
                num(report.tau[2]),
                num(report.tau_min_eigenvalue),
                opt(report.contact_time),
                opt(report.verification_error),
                opt(report.mean_work),
            ];
            emit(cli, "solve", &report, &header, vec![row])?;
            Ok(if feasible { 0 } else { 2 })
        }
        Command::Optimize { task, search } => {
            let task = load_task(task, c.kt)?;
            let cfg = search.config(c.seed);
            echo(&Resolved { cli, optimization: Some(cfg), census: None, task: Some(task) })?;
            let result = optimize_protocol(&task, &cfg)?;
            let ledger = protocol_ledger(&result.protocol)?;
            let report = OptimizeReport {
                ledger: ledger.clone(),
                clausius: clausius_bound(&task),
                final_bound: final_bound(&task)?.value,
                result,
            };
            let mut header: Vec<&str> = EnergyLedger::CSV_HEADER.to_vec();
            header.extend(["clausius", "final_bound", "evaluations", "converged"]);
            let mut row = ledger.csv_row();
            row.extend([
                num(report.clausius),
                num(report.final_bound),
                report.result.evaluations.to_string(),
                report.result.converged.to_string(),
            ]);
            emit(cli, "optimize", &report, &header, vec![row])?;
            Ok(0)
        }
        Command::Bounds { task, n, max_evals } => {
            let task = load_task(task, c.kt)?;
            let cfg = OptimizationConfig { n_steps: *n, max_evals: *max_evals, seed: c.seed, ..Default::default() };
            echo(&Resolved { cli, optimization: Some(cfg), census: None, task: Some(task) })?;
            let protocol = if *n > 1 { optimize_protocol(&task, &cfg)?.protocol } else { canonical_protocol(&task)?.1 };
            if protocol.steps.is_empty() {
                bail!("task is realized by a unitary alone; there is no thermalization to bound");
            }
            let report: BoundReport = bound_chain_diagnostics(&protocol)?;
            let mut rows = vec![
                vec!["clausius".into(), num(report.clausius), String::new(), String::new()],
                vec!["final_bound".into(), num(report.final_bound), String::new(), String::new()],
                vec!["lag_bound".into(), num(report.lag_bound), String::new(), String::new()],
                vec!["pinsker_pointwise".into(), String::new(), String::new(), report.pinsker_pointwise.to_string()],
            ];
            rows.extend(report.links.iter().map(|l| vec![l.name.clone(), num(l.lhs), num(l.rhs), l.holds.to_string()]));
            emit(cli, "bounds", &report, &["name", "lhs", "rhs", "holds"], rows)?;
            Ok(0)
        }
        Command::Nscan { task, search } => {
            let task = load_task(task, c.kt)?;
            let cfg = search.config(c.seed);
            echo(&Resolved { cli, optimization: Some(cfg), census: None, task: Some(task) })?;
            let ns: Vec<usize> = (1..=search.n).collect();
            let result = n_sweep(&task, &ns, &cfg)?;
            emit_sweep(cli, "nscan", &result)?;
            Ok(0)
        }
        Command::GammaSweep { task, gamma_grid, search } => {
            let task = load_task(task, c.kt)?;
            let gammas = parse_grid(gamma_grid)?;
            let cfg = search.config(c.seed);
            echo(&Resolved { cli, optimization: Some(cfg), census: None, task: Some(task) })?;
            let setup = SweepSetup {
                rho1: task.rho1().bloch(),
                rho2: task.rho2().bloch(),
                p1: task.p1(),
                h0: task.field(),
                kt: task.kt(),
            };
            let result = gamma_sweep(&setup, &gammas, &cfg)?;
            emit_sweep(cli, "gamma_sweep", &result)?;
            Ok(0)
        }
        Command::Heatmap { task, grid, search } => {
            let setup = match task {
                Some(path) => {
                    let t = load_task(path, c.kt)?;
                    SweepSetup { rho1: t.rho1().bloch(), rho2: t.rho2().bloch(), p1: t.p1(), h0: t.field(), kt: t.kt() }
                }
                None => SweepSetup {
                    rho1: default_heatmap_rho1(),
                    rho2: default_heatmap_rho1(),
                    p1: 0.5,
                    h0: FieldSpec::default(),
                    kt: Temperature::new(c.kt.unwrap_or(1.0)).context("--kt")?.kt(),
                },
            };
            let cfg = search.config(c.seed);
            echo(&Resolved { cli, optimization: Some(cfg), census: None, task: None })?;
            let result = work_heatmap(&setup, GridSpec { resolution: *grid }, &cfg)?;
            emit_sweep(cli, "heatmap", &result)?;
            Ok(0)
        }
        Command::Census { samples, sampling: s, work_samples, p1, gamma, n, max_evals } => {
            let cfg = CensusConfig {
                n_samples: *samples,
                sampling: sampling(*s),
                seed: c.seed,
                p1: *p1,
                gamma: *gamma,
                optimize_n: *n,
                work_samples: Some(*work_samples),
                max_evals: *max_evals,
                h0: FieldSpec::default(),
                kt: c.kt.unwrap_or(1.0),
            };
            echo(&Resolved { cli, optimization: None, census: Some(cfg), task: None })?;
            let r = feasibility_census(&cfg)?;
            let header = ["samples", "feasible", "feasible_fraction", "feasible_std_err", "classified", "positive_work", "positive_fraction", "positive_std_err", "rejected"];
            let row = vec![
                r.feasible.trials.to_string(),
                r.feasible.hits.to_string(),
                num(r.feasible.value),
                num(r.feasible.std_err),
                r.positive_work.trials.to_string(),
                r.positive_work.hits.to_string(),
                num(r.positive_work.value),
                num(r.positive_work.std_err),
                r.rejected.to_string(),
            ];
            emit(cli, "census", &r, &header, vec![row])?;
            Ok(0)
        }
        Command::Baseline { task, n, eps } => {
            let task = load_task(task, c.kt)?;
            echo(&Resolved { cli, optimization: None, census: None, task: Some(task) })?;
            let b = single_input_reference(task.rho1(), task.eta1(), &task.h0(), task.temperature(), *n, *eps)?;
            let report = BaselineReport {
                n_steps: b.n_steps,
                work: b.work,
                limit: b.limit,
                gap: b.gap,
                entropy_production: b.entropy_production,
            };
            let header = ["n_steps", "work", "limit", "gap", "entropy_production"];
            let row = vec![b.n_steps.to_string(), num(b.work), num(b.limit), num(b.gap), num(b.entropy_production)];
            emit(cli, "baseline", &report, &header, vec![row])?;
            Ok(0)
        }
    }
}
