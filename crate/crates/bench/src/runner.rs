//! Runs every (instance, algorithm) pair of an experiment and aggregates the
//! results.

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tgp_core::matrix::derive_seed;
use tgp_core::{generate_instance, solve, ManifoldPoint, Objective, ProblemInstance, SolverConfig, Status, TraceRow};

use crate::algorithms::AlgorithmId;
use crate::config::ExperimentConfig;

/// Threshold for NGlobal and for better/worse comparisons.
pub const QUALITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub algorithm: String,
    pub instance_index: usize,
    pub instance_seed: u64,
    pub status: Status,
    pub n_iter: usize,
    pub wall_ms: f64,
    pub f_final: f64,
    pub gradnorm_final: f64,
}

impl RunSummary {
    pub fn run_id(&self) -> String {
        format!("{}_{:05}", self.algorithm, self.instance_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub algorithm: String,
    /// Algorithm the better/worse counts refer to.
    pub baseline: String,
    pub n_iter_mean: f64,
    pub time_mean_s: f64,
    /// Runs ending below f* + 1e-4; absent when f* is unknown.
    pub n_global: Option<usize>,
    pub n_better: usize,
    pub n_worse: usize,
    pub n_super: i64,
    /// Runs that stopped on the iteration or time budget, or failed.
    pub n_fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub experiment: String,
    pub instances: usize,
    pub rows: Vec<MetricsRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
    /// Trace of `runs[i]`.
    #[serde(skip)]
    pub traces: Vec<Vec<TraceRow>>,
    pub metrics: MetricsTable,
}

/// Generated instance with its seed.
pub struct Instance {
    pub index: usize,
    pub seed: u64,
    pub problem: ProblemInstance,
    pub x0: ManifoldPoint,
}

/// Instance i uses seed `derive_seed(master, i)` for its data, its start
/// point and its shift matrix S, so every algorithm sees the same triple.
pub fn generate_instances(c: &ExperimentConfig) -> anyhow::Result<Vec<Instance>> {
    let family = c.experiment.family().with_context(|| format!("{} has no instance family", c.experiment.as_str()))?;
    (0..c.instances)
        .map(|index| {
            let seed = derive_seed(c.seed, index as u64);
            let (problem, x0) = generate_instance(family, c.instance_params(), seed)?;
            Ok(Instance { index, seed, problem, x0 })
        })
        .collect()
}

/// One solve per (instance, named configuration), in instance-major order.
pub fn run_batch(
    experiment: &str,
    instances: &[Instance],
    algorithms: &[(String, SolverConfig)],
) -> anyhow::Result<Vec<(RunSummary, Vec<TraceRow>)>> {
    let jobs: Vec<(usize, usize)> =
        (0..instances.len()).flat_map(|i| (0..algorithms.len()).map(move |j| (i, j))).collect();
    jobs.par_iter()
        .map(|&(i, j)| {
            let inst = &instances[i];
            let (name, cfg) = &algorithms[j];
            let rec = solve(&inst.problem, &inst.x0, cfg, inst.seed)
                .with_context(|| format!("{name} on instance {}", inst.index))?;
            let summary = RunSummary {
                experiment: experiment.to_string(),
                algorithm: name.clone(),
                instance_index: inst.index,
                instance_seed: inst.seed,
                status: rec.status,
                n_iter: rec.n_iter(),
                wall_ms: rec.wall_time * 1e3,
                f_final: rec.f_final(),
                gradnorm_final: rec.gradnorm_final(),
            };
            Ok((summary, rec.rows))
        })
        .collect()
}

/// Aggregates per algorithm, in the order of `algorithms`. `baseline_of`
/// names the comparison algorithm for each row.
pub fn compute_metrics(
    experiment: &str,
    runs: &[RunSummary],
    algorithms: &[String],
    fstar: &[Option<f64>],
    baseline_of: impl Fn(&str) -> String,
) -> MetricsTable {
    let instances = fstar.len();
    let finals = |name: &str| -> Vec<Option<&RunSummary>> {
        let mut v = vec![None; instances];
        for r in runs.iter().filter(|r| r.algorithm == name) {
            v[r.instance_index] = Some(r);
        }
        v
    };
    let rows = algorithms
        .iter()
        .map(|name| {
            let mine = finals(name);
            let baseline = baseline_of(name);
            let base = finals(&baseline);
            let done: Vec<&RunSummary> = mine.iter().flatten().copied().collect();
            let count = done.len().max(1) as f64;
            let n_global = fstar.iter().all(Option::is_some).then(|| {
                mine.iter()
                    .zip(fstar)
                    .filter(|(r, f)| matches!((r, f), (Some(r), Some(f)) if r.f_final < f + QUALITY_TOL))
                    .count()
            });
            let (mut n_better, mut n_worse) = (0, 0);
            for (m, b) in mine.iter().zip(&base) {
                if let (Some(m), Some(b)) = (m, b) {
                    if m.f_final < b.f_final - QUALITY_TOL {
                        n_better += 1;
                    } else if m.f_final > b.f_final + QUALITY_TOL {
                        n_worse += 1;
                    }
                }
            }
            MetricsRow {
                algorithm: name.clone(),
                baseline,
                n_iter_mean: done.iter().map(|r| r.n_iter as f64).sum::<f64>() / count,
                time_mean_s: done.iter().map(|r| r.wall_ms * 1e-3).sum::<f64>() / count,
                n_global,
                n_better,
                n_worse,
                n_super: n_better as i64 - n_worse as i64,
                n_fail: done.iter().filter(|r| r.status != Status::Converged).count(),
            }
        })
        .collect();
    MetricsTable { experiment: experiment.to_string(), instances, rows }
}

pub fn run_experiment(c: &ExperimentConfig) -> anyhow::Result<ExperimentResult> {
    c.validate()?;
    let instances = generate_instances(c)?;
    let ids = c.algorithms.iter().map(|n| AlgorithmId::parse(n)).collect::<anyhow::Result<Vec<_>>>()?;
    let baseline = AlgorithmId::parse(&c.baseline)?;
    let mut roster: Vec<AlgorithmId> = ids.clone();
    if !roster.contains(&baseline) {
        roster.insert(0, baseline);
    }
    let tangent_baseline = ids.iter().any(|a| a.is_tangent_variant()) && !roster.contains(&AlgorithmId::TgpAE);
    if tangent_baseline {
        roster.push(AlgorithmId::TgpAE);
    }
    let named: Vec<(String, SolverConfig)> =
        roster.iter().map(|a| (a.name().to_string(), a.solver_config(c))).collect();
    let experiment = c.experiment.as_str();
    let (runs, traces): (Vec<_>, Vec<_>) = run_batch(experiment, &instances, &named)?.into_iter().unzip();
    let fstar: Vec<Option<f64>> = instances.iter().map(|i| i.problem.known_fstar()).collect();
    let names: Vec<String> = roster.iter().map(|a| a.name().to_string()).collect();
    let metrics = compute_metrics(experiment, &runs, &names, &fstar, |name| match AlgorithmId::parse(name) {
        Ok(a) if a.is_tangent_variant() => AlgorithmId::TgpAE.name().to_string(),
        _ => baseline.name().to_string(),
    });
    Ok(ExperimentResult { config: c.clone(), runs, traces, metrics })
}
