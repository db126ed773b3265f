//! Trajectory data for the small sphere and circle scenarios.

use serde::{Deserialize, Serialize};
use tgp_core::scenarios::{circle_demo, eigen_demo_rgd, eigen_demo_scaled};
use tgp_core::{DirectionSpec, ManifoldPoint, Matrix, ProblemInstance, RunRecord, SolverConfig, StepsizeMode};

use crate::report::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub scenario: String,
    pub algorithm: String,
    pub k: usize,
    pub f: f64,
    pub gradnorm: f64,
    pub x: Vec<f64>,
}

fn rows_of(scenario: &str, algorithm: &str, rec: &RunRecord) -> Vec<DemoRow> {
    let points = rec.points.as_ref().expect("traced run");
    rec.rows
        .iter()
        .zip(points)
        .map(|(r, p)| DemoRow {
            scenario: scenario.into(),
            algorithm: algorithm.into(),
            k: r.k,
            f: r.f,
            gradnorm: r.gradnorm,
            x: p.as_slice().to_vec(),
        })
        .collect()
}

fn fixed_run(diag: &[f64], x0: &[f64], direction: DirectionSpec, tau: f64, iters: usize) -> anyhow::Result<RunRecord> {
    let p = ProblemInstance::eigenvalue(Matrix::from_diag(diag))?;
    let x0 = ManifoldPoint::new(p.manifold, Matrix::column_vector(x0)?)?;
    let cfg = SolverConfig {
        record_points: true,
        max_iter: iters,
        max_time: None,
        ..SolverConfig::new(direction, StepsizeMode::Fixed { tau })
    };
    Ok(tgp_core::solve(&p, &x0, &cfg, 0)?)
}

/// All eigenvalue-demo trajectories:
/// - `eigen_trap`: RGD and the rank-one scaled direction on diag(4, 2, −2);
/// - `egp_contraction`: EGP with τ = 0.2 on diag(3, 3, 2);
/// - `shifted_power`: shifted power steps with s = 4 on diag(3, 3, 2);
/// - `circle`: RGD and grad + 2x on the circle quadratic.
pub fn eigenvalue_demo() -> anyhow::Result<Vec<DemoRow>> {
    let mut out = Vec::new();
    out.extend(rows_of("eigen_trap", "RGD", &eigen_demo_rgd()?));
    out.extend(rows_of("eigen_trap", "TGP-A-Eigen", &eigen_demo_scaled(0.05)?));
    let s = 1.0 / 3f64.sqrt();
    out.extend(rows_of(
        "egp_contraction",
        "EGP",
        &fixed_run(&[3.0, 3.0, 2.0], &[s, s, s], DirectionSpec::Egp, 0.2, 40)?,
    ));
    out.extend(rows_of(
        "shifted_power",
        "ShiftedPM",
        &fixed_run(&[3.0, 3.0, 2.0], &[s, s, s], DirectionSpec::ShiftedPm { s: 4.0 }, 1.0, 40)?,
    ));
    out.extend(rows_of("circle", "RGD", &circle_demo(0.0)?));
    out.extend(rows_of("circle", "TGP-A-R", &circle_demo(2.0)?));
    Ok(out)
}

/// Ratio |x₁/x₃| between consecutive iterates, the per-step contraction of
/// the component along the top eigenvector relative to the bottom one.
pub fn contraction_ratios(rows: &[DemoRow]) -> Vec<f64> {
    rows.windows(2)
        .filter(|w| w[0].algorithm == w[1].algorithm && w[0].scenario == w[1].scenario)
        .map(|w| (w[1].x[0] / w[1].x[2]).abs() / (w[0].x[0] / w[0].x[2]).abs())
        .collect()
}

pub fn demo_csv(rows: &[DemoRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "algorithm", "k", "f", "gradnorm", "x1", "x2", "x3"])?;
    for r in rows {
        let mut rec = vec![r.scenario.clone(), r.algorithm.clone(), r.k.to_string(), fmt_f64(r.f), fmt_f64(r.gradnorm)];
        for i in 0..3 {
            rec.push(r.x.get(i).map(|v| fmt_f64(*v)).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_contents() {
        let rows = eigenvalue_demo().unwrap();
        let trap: Vec<_> = rows.iter().filter(|r| r.scenario == "eigen_trap" && r.algorithm == "RGD").collect();
        assert!(trap.iter().all(|r| r.x[2] == 0.0));
        let egp: Vec<DemoRow> = rows.iter().filter(|r| r.scenario == "egp_contraction").cloned().collect();
        for q in contraction_ratios(&egp) {
            assert!((q - 2.0 / 3.0).abs() < 1e-8);
        }
        let pm: Vec<DemoRow> = rows.iter().filter(|r| r.scenario == "shifted_power").cloned().collect();
        for q in contraction_ratios(&pm) {
            assert!((q - 0.5).abs() < 1e-8, "{q}");
        }
        let text = demo_csv(&rows).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
    }
}
