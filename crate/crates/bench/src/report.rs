//! CSV and JSON output.
//!
//! runs.csv: experiment, algorithm, instance_seed, status, n_iter, wall_ms,
//! f_final, gradnorm_final.
//! metrics.csv: algorithm, baseline, n_iter_mean, time_mean_s, n_global,
//! n_better, n_worse, n_super, n_fail.
//! traces/<run-id>.csv: k, f, gradnorm, tau, backtracks, c, exhausted.
//!
//! Floats are written with 17 significant digits.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tgp_core::TraceRow;

use crate::runner::{ExperimentResult, MetricsTable, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub const RUNS_HEADER: [&str; 8] =
    ["experiment", "algorithm", "instance_seed", "status", "n_iter", "wall_ms", "f_final", "gradnorm_final"];
pub const METRICS_HEADER: [&str; 9] =
    ["algorithm", "baseline", "n_iter_mean", "time_mean_s", "n_global", "n_better", "n_worse", "n_super", "n_fail"];
pub const TRACE_HEADER: [&str; 7] = ["k", "f", "gradnorm", "tau", "backtracks", "c", "exhausted"];

pub fn runs_csv(runs: &[RunSummary]) -> anyhow::Result<String> {
    csv_string(
        &RUNS_HEADER,
        runs.iter().map(|r| {
            vec![
                r.experiment.clone(),
                r.algorithm.clone(),
                r.instance_seed.to_string(),
                r.status.as_str().to_string(),
                r.n_iter.to_string(),
                fmt_f64(r.wall_ms),
                fmt_f64(r.f_final),
                fmt_f64(r.gradnorm_final),
            ]
        }),
    )
}

pub fn metrics_csv(t: &MetricsTable) -> anyhow::Result<String> {
    csv_string(
        &METRICS_HEADER,
        t.rows.iter().map(|r| {
            vec![
                r.algorithm.clone(),
                r.baseline.clone(),
                fmt_f64(r.n_iter_mean),
                fmt_f64(r.time_mean_s),
                r.n_global.map(|n| n.to_string()).unwrap_or_default(),
                r.n_better.to_string(),
                r.n_worse.to_string(),
                r.n_super.to_string(),
                r.n_fail.to_string(),
            ]
        }),
    )
}

pub fn trace_csv(rows: &[TraceRow]) -> anyhow::Result<String> {
    csv_string(
        &TRACE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                fmt_f64(r.f),
                fmt_f64(r.gradnorm),
                fmt_f64(r.tau),
                r.backtracks.to_string(),
                r.c.map(fmt_f64).unwrap_or_default(),
                r.exhausted.to_string(),
            ]
        }),
    )
}

/// Everything a JSON report holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub metrics: MetricsTable,
    pub runs: Vec<RunSummary>,
}

pub fn write_report(result: &ExperimentResult, out_dir: &Path, format: Format) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir.join("traces")).with_context(|| format!("creating {}", out_dir.display()))?;
    match format {
        Format::Csv => {
            fs::write(out_dir.join("runs.csv"), runs_csv(&result.runs)?)?;
            fs::write(out_dir.join("metrics.csv"), metrics_csv(&result.metrics)?)?;
            for (run, trace) in result.runs.iter().zip(&result.traces) {
                fs::write(out_dir.join("traces").join(format!("{}.csv", run.run_id())), trace_csv(trace)?)?;
            }
        }
        Format::Json => {
            let report = JsonReport { metrics: result.metrics.clone(), runs: result.runs.clone() };
            fs::write(out_dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            fs::write(out_dir.join("metrics.json"), serde_json::to_string_pretty(&result.metrics)?)?;
            for (run, trace) in result.runs.iter().zip(&result.traces) {
                fs::write(
                    out_dir.join("traces").join(format!("{}.json", run.run_id())),
                    serde_json::to_string(trace)?,
                )?;
            }
        }
    }
    Ok(())
}

pub fn read_metrics_json(path: &Path) -> anyhow::Result<MetricsTable> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::MetricsRow;

    #[test]
    fn empty_results_give_header_only() {
        assert_eq!(runs_csv(&[]).unwrap().trim_end(), RUNS_HEADER.join(","));
        let t = MetricsTable { experiment: "x".into(), instances: 0, rows: vec![] };
        assert_eq!(metrics_csv(&t).unwrap().trim_end(), METRICS_HEADER.join(","));
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn metrics_json_round_trip() {
        let t = MetricsTable {
            experiment: "qp".into(),
            instances: 3,
            rows: vec![MetricsRow {
                algorithm: "RGD".into(),
                baseline: "RGD".into(),
                n_iter_mean: 1.0 / 3.0,
                time_mean_s: 2.5e-7,
                n_global: Some(3),
                n_better: 0,
                n_worse: 0,
                n_super: 0,
                n_fail: 1,
            }],
        };
        let back: MetricsTable = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
