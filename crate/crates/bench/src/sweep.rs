//! One-parameter sweeps over a shared instance batch.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use tgp_core::{DirectionSpec, Objective, SolverConfig};

use crate::algorithms::AlgorithmId;
use crate::config::ExperimentConfig;
use crate::report::fmt_f64;
use crate::runner::{compute_metrics, generate_instances, run_batch, MetricsRow, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum SweepParam {
    /// Weight of the normal shift in TGP-A-R and TGP-A-E.
    A,
    /// ρ of TGP-A-DE.
    Rho,
}

/// Parses `start:step:stop` into start + i·step for i = 0, 1, … up to stop.
pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("grid entry {p:?}")))
        .collect::<anyhow::Result<_>>()?;
    let [start, step, stop] = parts[..] else { bail!("grid must be start:step:stop, got {s:?}") };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        bail!("grid {s:?} is empty or malformed");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub metrics: MetricsRow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Baseline rows (a = 0 counterparts or TGP-A-E).
    pub baselines: Vec<MetricsRow>,
    pub runs: Vec<RunSummary>,
}

fn label(alg: &str, param: SweepParam, v: f64) -> String {
    let p = match param {
        SweepParam::A => "a",
        SweepParam::Rho => "rho",
    };
    format!("{alg}[{p}={v}]")
}

pub fn sweep_parameter(c: &ExperimentConfig, param: SweepParam, grid: &[f64]) -> anyhow::Result<SweepResult> {
    if grid.is_empty() {
        bail!("empty grid");
    }
    c.validate()?;
    let instances = generate_instances(c)?;
    let mut named: Vec<(String, SolverConfig)> = Vec::new();
    let mut entries: Vec<(f64, String, String)> = Vec::new();
    let with_direction = |id: AlgorithmId, d: DirectionSpec| SolverConfig { direction: d, ..id.solver_config(c) };
    let baselines: Vec<(String, SolverConfig)> = match param {
        SweepParam::A => {
            vec![("RGD".into(), AlgorithmId::Rgd.solver_config(c)), ("EGP".into(), AlgorithmId::Egp.solver_config(c))]
        }
        SweepParam::Rho => vec![("TGP-A-E".into(), AlgorithmId::TgpAE.solver_config(c))],
    };
    named.extend(baselines.iter().cloned());
    for &v in grid {
        match param {
            SweepParam::A => {
                let r = label("TGP-A-R", param, v);
                named.push((r.clone(), with_direction(AlgorithmId::TgpAR, DirectionSpec::TgpR { a: v })));
                entries.push((v, r, "RGD".into()));
                let e = label("TGP-A-E", param, v);
                named.push((e.clone(), with_direction(AlgorithmId::TgpAE, DirectionSpec::TgpE { a: v })));
                entries.push((v, e, "EGP".into()));
            }
            SweepParam::Rho => {
                let d = label("TGP-A-DE", param, v);
                named.push((d.clone(), with_direction(AlgorithmId::TgpADe, DirectionSpec::TgpDe { rho: v, a: c.a_e })));
                entries.push((v, d, "TGP-A-E".into()));
            }
        }
    }
    let runs: Vec<RunSummary> =
        run_batch(c.experiment.as_str(), &instances, &named)?.into_iter().map(|(s, _)| s).collect();
    let fstar: Vec<Option<f64>> = instances.iter().map(|i| i.problem.known_fstar()).collect();
    let names: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let base_of = |name: &str| {
        entries.iter().find(|(_, n, _)| n == name).map(|(_, _, b)| b.clone()).unwrap_or_else(|| name.to_string())
    };
    let table = compute_metrics(c.experiment.as_str(), &runs, &names, &fstar, base_of);
    let (base_rows, grid_rows) = table.rows.split_at(baselines.len());
    let rows =
        entries.iter().zip(grid_rows).map(|((v, _, _), m)| SweepRow { param, value: *v, metrics: m.clone() }).collect();
    Ok(SweepResult { rows, baselines: base_rows.to_vec(), runs })
}

pub const SWEEP_HEADER: [&str; 11] = [
    "param",
    "value",
    "algorithm",
    "baseline",
    "n_iter_mean",
    "time_mean_s",
    "n_global",
    "n_better",
    "n_worse",
    "n_super",
    "n_fail",
];

pub fn sweep_csv(result: &SweepResult) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    let param_name = |p: SweepParam| match p {
        SweepParam::A => "a",
        SweepParam::Rho => "rho",
    };
    let base_param = result.rows.first().map_or(SweepParam::A, |r| r.param);
    let base_iter = result.baselines.iter().map(|m| (param_name(base_param), None, m));
    let grid_iter = result.rows.iter().map(|r| (param_name(r.param), Some(r.value), &r.metrics));
    for (p, v, m) in base_iter.chain(grid_iter) {
        let alg = m.algorithm.split('[').next().unwrap_or(&m.algorithm);
        w.write_record([
            p.to_string(),
            v.map(fmt_f64).unwrap_or_else(|| "baseline".into()),
            alg.to_string(),
            m.baseline.clone(),
            fmt_f64(m.n_iter_mean),
            fmt_f64(m.time_mean_s),
            m.n_global.map(|n| n.to_string()).unwrap_or_default(),
            m.n_better.to_string(),
            m.n_worse.to_string(),
            m.n_super.to_string(),
            m.n_fail.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentId;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:0.2:12").unwrap();
        assert_eq!(g.len(), 61);
        assert_eq!(g[0], 0.0);
        assert!((g[60] - 12.0).abs() < 1e-12);
        assert_eq!(parse_grid("1:1:1").unwrap(), vec![1.0]);
        for bad in ["1:0:2", "2:1:1", "a:b:c", "1:2"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn zero_weight_matches_baselines() {
        let mut c = ExperimentConfig::defaults(ExperimentId::QpInhomoCase1);
        c.instances = 6;
        let res = sweep_parameter(&c, SweepParam::A, &[0.0, 1.1]).unwrap();
        for row in res.rows.iter().filter(|r| r.value == 0.0) {
            assert_eq!((row.metrics.n_better, row.metrics.n_worse), (0, 0));
            let base = res.baselines.iter().find(|b| b.algorithm == row.metrics.baseline).unwrap();
            assert_eq!(row.metrics.n_iter_mean, base.n_iter_mean);
        }
        for row in &res.rows {
            assert!(row.metrics.n_better <= 6 && row.metrics.n_worse <= 6);
        }
        let text = sweep_csv(&res).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 + 4);
    }

    #[test]
    fn quarter_rho_matches_euclidean_variant() {
        let mut c = ExperimentConfig::defaults(ExperimentId::JamdS);
        c.instances = 5;
        let res = sweep_parameter(&c, SweepParam::Rho, &[0.25]).unwrap();
        let m = &res.rows[0].metrics;
        assert_eq!((m.n_better, m.n_worse), (0, 0));
        assert_eq!(m.n_iter_mean, res.baselines[0].n_iter_mean);
    }
}
