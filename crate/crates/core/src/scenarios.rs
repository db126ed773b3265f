//! Small fixed scenarios on the sphere and the circle, shared by the CLI demo
//! and the browser page.

use crate::direction::{DirectionSpec, SPolicy};
use crate::error::Result;
use crate::manifold::ManifoldPoint;
use crate::matrix::Matrix;
use crate::problem::ProblemInstance;
use crate::solver::{solve, RunRecord, SolverConfig, StepsizeMode};
use crate::stepsize::ArmijoParams;

/// Eigenvalue problem with A = diag(4, 2, −2) started at (√3/2, ½, 0).
pub fn eigen_demo_problem() -> Result<(ProblemInstance, ManifoldPoint)> {
    let p = ProblemInstance::eigenvalue(Matrix::from_diag(&[4.0, 2.0, -2.0]))?;
    let x0 = ManifoldPoint::new(p.manifold, Matrix::column_vector(&[3f64.sqrt() / 2.0, 0.5, 0.0])?)?;
    Ok((p, x0))
}

/// Armijo run with every iterate recorded.
pub fn traced_run(p: &ProblemInstance, x0: &ManifoldPoint, direction: DirectionSpec, trial0: f64) -> Result<RunRecord> {
    let cfg = SolverConfig {
        s_policy: SPolicy::Identity,
        record_points: true,
        max_time: None,
        ..SolverConfig::new(direction, StepsizeMode::Armijo(ArmijoParams::default().with_trial0(trial0)))
    };
    solve(p, x0, &cfg, 0)
}

/// RGD on the eigen demo; stays on the great circle x₃ = 0.
pub fn eigen_demo_rgd() -> Result<RunRecord> {
    let (p, x0) = eigen_demo_problem()?;
    traced_run(&p, &x0, DirectionSpec::Rgd, 1.0)
}

/// Rank-one scaled direction with trial step 0.5 on the eigen demo; leaves
/// the great circle and reaches (0, 0, 1).
pub fn eigen_demo_scaled(f_scale: f64) -> Result<RunRecord> {
    let (p, x0) = eigen_demo_problem()?;
    traced_run(&p, &x0, DirectionSpec::TgpAEigen { f_scale }, 0.5)
}

/// ½(x − x*)ᵀA(x − x*) on the circle with A = diag(5, 2), x* = (0, 1),
/// started at (−1/√2, −1/√2).
pub fn circle_demo_problem() -> Result<(ProblemInstance, ManifoldPoint)> {
    let p = ProblemInstance::qp_inhomo(Matrix::from_diag(&[5.0, 2.0]), Matrix::column_vector(&[0.0, 1.0])?)?;
    let h = 0.5f64.sqrt();
    let x0 = ManifoldPoint::new(p.manifold, Matrix::column_vector(&[-h, -h])?)?;
    Ok((p, x0))
}

/// grad f + a·x with Armijo steps from trial 1 on the circle demo; a = 0 is RGD.
pub fn circle_demo(a: f64) -> Result<RunRecord> {
    let (p, x0) = circle_demo_problem()?;
    traced_run(&p, &x0, DirectionSpec::TgpR { a }, 1.0)
}

/// Iterates of a record flattened row by row.
pub fn flatten_points(record: &RunRecord) -> Vec<f64> {
    record.points.iter().flatten().flat_map(|m| m.as_slice().iter().copied()).collect()
}
