//! The iteration X_{k+1} = P(X_k − τ_k H_k) with stopping rules and a
//! per-iteration trace.

use serde::{Deserialize, Serialize};

use crate::direction::{build_direction, sample_s, DirectionSpec, SPolicy};
use crate::error::{Result, TgpError};
use crate::manifold::{feasibility_error, riemannian_gradient, ManifoldPoint, FEAS_TOL};
use crate::matrix::Matrix;
use crate::problem::Objective;
use crate::stepsize::{
    adapt_trial, armijo_search, fixed_step, nonmonotone_search, ArmijoParams, EtaSchedule, NonmonotoneState,
    StepsizeOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepsizeMode {
    Armijo(ArmijoParams),
    Nonmonotone { params: ArmijoParams, eta: EtaSchedule },
    Fixed { tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub direction: DirectionSpec,
    pub stepsize: StepsizeMode,
    pub s_policy: SPolicy,
    pub tol_gradnorm: f64,
    pub max_iter: usize,
    /// Wall-clock budget in seconds; ignored on targets without a clock.
    pub max_time: Option<f64>,
    /// Keep every iterate in the record.
    pub record_points: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            direction: DirectionSpec::Rgd,
            stepsize: StepsizeMode::Armijo(ArmijoParams::default()),
            s_policy: SPolicy::default(),
            tol_gradnorm: 1e-4,
            max_iter: 10_000,
            max_time: Some(5.0),
            record_points: false,
        }
    }
}

impl SolverConfig {
    pub fn new(direction: DirectionSpec, stepsize: StepsizeMode) -> Self {
        SolverConfig { direction, stepsize, ..SolverConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gradnorm >= 0.0) {
            return Err(TgpError::InvalidParameter(format!("tol_gradnorm {}", self.tol_gradnorm)));
        }
        if let Some(t) = self.max_time {
            if !(t > 0.0) {
                return Err(TgpError::InvalidParameter(format!("max_time {t}")));
            }
        }
        match self.stepsize {
            StepsizeMode::Armijo(p) => p.validate(),
            StepsizeMode::Nonmonotone { params, eta } => {
                params.validate()?;
                eta.validate()
            }
            StepsizeMode::Fixed { tau } if tau > 0.0 && tau.is_finite() => Ok(()),
            StepsizeMode::Fixed { tau } => Err(TgpError::InvalidParameter(format!("fixed step {tau}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIter,
    MaxTime,
    /// Non-finite values or a non-descent direction stopped the run.
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::MaxTime => "max_time",
            Status::Failed => "failed",
        }
    }
}

/// Values at iterate k. `tau` and `backtracks` describe the step that
/// produced X_k (zero for k = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f: f64,
    pub gradnorm: f64,
    pub tau: f64,
    pub backtracks: usize,
    /// Nonmonotone reference value c_k.
    pub c: Option<f64>,
    /// The line search producing X_k ran out of backtracks.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: Vec<TraceRow>,
    pub status: Status,
    pub wall_time: f64,
    pub final_point: ManifoldPoint,
    pub failure: Option<String>,
    /// Every iterate, when requested.
    pub points: Option<Vec<Matrix>>,
}

impl RunRecord {
    pub fn n_iter(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn f_final(&self) -> f64 {
        self.rows.last().expect("non-empty trace").f
    }

    pub fn gradnorm_final(&self) -> f64 {
        self.rows.last().expect("non-empty trace").gradnorm
    }
}

#[cfg(not(target_arch = "wasm32"))]
struct Clock(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(target_arch = "wasm32")]
struct Clock;

#[cfg(target_arch = "wasm32")]
impl Clock {
    fn start() -> Self {
        Clock
    }
    fn elapsed(&self) -> f64 {
        0.0
    }
}

/// Runs the method from `x0`. `seed` drives the normal-shift matrices S_k.
pub fn solve<O: Objective + ?Sized>(
    obj: &O,
    x0: &ManifoldPoint,
    config: &SolverConfig,
    seed: u64,
) -> Result<RunRecord> {
    config.validate()?;
    if x0.kind() != obj.manifold() {
        return Err(TgpError::Infeasible(format!("start on {:?}, problem on {:?}", x0.kind(), obj.manifold())));
    }
    let defect = feasibility_error(x0.kind(), x0.value());
    if !(defect <= FEAS_TOL) {
        return Err(TgpError::Infeasible(format!("start point defect {defect:.3e}")));
    }
    config.direction.validate(x0.kind())?;

    let clock = Clock::start();
    let shift_dim = x0.kind().shift_dim();
    let uses_shift = config.direction.shift_weight() != 0.0;
    let fixed_s = match config.s_policy {
        SPolicy::Uniform { .. } => None,
        p => Some(sample_s(p, shift_dim, seed, 0)?),
    };

    let mut x = x0.clone();
    let mut f = obj.cost_at(x.value());
    let mut egrad = obj.egrad_at(x.value());
    let mut grad = riemannian_gradient(&x, &egrad)?;
    let mut gradnorm = grad.norm();

    let (params, eta) = match config.stepsize {
        StepsizeMode::Armijo(p) => (Some(p), None),
        StepsizeMode::Nonmonotone { params, eta } => (Some(params), Some(eta)),
        StepsizeMode::Fixed { .. } => (None, None),
    };
    let mut nm = eta.map(|_| NonmonotoneState::new(f));
    let mut trial = params.map_or(0.0, |p| p.trial0);

    let mut rows = vec![TraceRow { k: 0, f, gradnorm, tau: 0.0, backtracks: 0, c: nm.map(|s| s.c), exhausted: false }];
    let mut points = config.record_points.then(|| vec![x.value().clone()]);
    let mut failure = None;

    let status = loop {
        let k = rows.len() - 1;
        if !f.is_finite() || !egrad.is_finite() {
            failure = Some(format!("non-finite cost or gradient at k = {k}"));
            break Status::Failed;
        }
        if gradnorm < config.tol_gradnorm {
            break Status::Converged;
        }
        if k >= config.max_iter {
            break Status::MaxIter;
        }
        if config.max_time.is_some_and(|t| clock.elapsed() > t) {
            break Status::MaxTime;
        }

        let s_k = if !uses_shift {
            None
        } else if let Some(s) = &fixed_s {
            Some(s.clone())
        } else {
            Some(sample_s(config.s_policy, shift_dim, seed, k as u64)?)
        };
        let direction = match build_direction(&config.direction, &x, &egrad, s_k.as_ref()) {
            Ok(d) => d,
            Err(TgpError::NonFinite(m)) => {
                failure = Some(m);
                break Status::Failed;
            }
            Err(e) => return Err(e),
        };

        let step: Result<StepsizeOutcome> = match config.stepsize {
            StepsizeMode::Armijo(p) => armijo_search(&x, f, &direction, &grad, obj, &p, trial),
            StepsizeMode::Nonmonotone { params: p, eta } => {
                nonmonotone_search(&x, &direction, &grad, obj, &p, trial, nm.as_ref().expect("state"), &eta, k).map(
                    |(out, next)| {
                        nm = Some(next);
                        out
                    },
                )
            }
            StepsizeMode::Fixed { tau } => fixed_step(&x, &direction, obj, tau),
        };
        let out = match step {
            Ok(o) => o,
            Err(e @ (TgpError::NotDescent(_) | TgpError::NonFinite(_))) => {
                failure = Some(e.to_string());
                break Status::Failed;
            }
            Err(e) => return Err(e),
        };
        if let Some(p) = params {
            trial = adapt_trial(trial, out.backtracks > 0, &p);
        }

        x = out.next_point;
        f = out.f_next;
        egrad = obj.egrad_at(x.value());
        grad = riemannian_gradient(&x, &egrad)?;
        gradnorm = grad.norm();
        rows.push(TraceRow {
            k: k + 1,
            f,
            gradnorm,
            tau: out.tau,
            backtracks: out.backtracks,
            c: nm.map(|s| s.c),
            exhausted: out.exhausted,
        });
        if let Some(pts) = points.as_mut() {
            pts.push(x.value().clone());
        }
    };

    Ok(RunRecord { rows, status, wall_time: clock.elapsed(), final_point: x, failure, points })
}

/// Running minimum of the gradient norm and its fitted power-law decay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub running_min: Vec<f64>,
    /// Least-squares slope of ln(running min) against ln(K + 1); NaN with
    /// fewer than two usable points.
    pub exponent: f64,
    /// Smallest C with running_min[K] ≤ C/√(K + 1) for all K.
    pub envelope_constant: f64,
}

/// Running minimum of ‖grad f(X_k)‖ over k ≤ K.
pub fn running_min_gradnorm(record: &RunRecord) -> Vec<f64> {
    let mut m = f64::INFINITY;
    record
        .rows
        .iter()
        .map(|r| {
            m = m.min(r.gradnorm);
            m
        })
        .collect()
}

/// (ln(K + 1), ln(running min)) pairs, skipping zero norms.
pub fn decay_points(running_min: &[f64]) -> Vec<(f64, f64)> {
    running_min.iter().enumerate().filter(|(_, g)| **g > 0.0).map(|(k, g)| (((k + 1) as f64).ln(), g.ln())).collect()
}

/// Ordinary least-squares slope.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

pub fn complexity_diagnostic(record: &RunRecord) -> ComplexityReport {
    let running_min = running_min_gradnorm(record);
    let exponent = fit_slope(&decay_points(&running_min));
    let envelope_constant =
        running_min.iter().enumerate().map(|(k, g)| g * ((k + 1) as f64).sqrt()).fold(0.0, f64::max);
    ComplexityReport { running_min, exponent, envelope_constant }
}

/// Σ_k ‖grad f(X_k)‖² over the steps taken, and the bound
/// (f(X_0) − f_low)/(γ·τ_min·υ) implied by per-step sufficient decrease.
/// Returns `None` when some line search ran out of backtracks.
pub fn armijo_energy_check(record: &RunRecord, f_low: f64, gamma: f64, upsilon: f64) -> Option<(f64, f64)> {
    let steps = &record.rows[1..];
    if steps.is_empty() || steps.iter().any(|r| r.exhausted) {
        return None;
    }
    let tau_min = steps.iter().map(|r| r.tau).fold(f64::INFINITY, f64::min);
    let lhs: f64 = record.rows[..record.rows.len() - 1].iter().map(|r| r.gradnorm * r.gradnorm).sum();
    let rhs = (record.rows[0].f - f_low) / (gamma * tau_min * upsilon);
    Some((lhs, rhs))
}

/// Σ_k ‖grad f(X_k)‖² and (f(X_0) − f_low)/(γ*τυ) for a fixed-step run,
/// with γ* = 1 − τ(Γ1ϖ² + Γ2Δϖ)/υ. `None` when γ* ≤ 0.
pub fn fixed_step_energy_check(
    record: &RunRecord,
    f_low: f64,
    tau: f64,
    c: &crate::stepsize::FixedStepConstants,
) -> Option<(f64, f64)> {
    let gamma_star = 1.0 - tau * (c.gamma1 * c.varpi * c.varpi + c.gamma2 * c.delta_hat_h * c.varpi) / c.upsilon;
    if !(gamma_star > 0.0) {
        return None;
    }
    let lhs: f64 = record.rows[..record.rows.len() - 1].iter().map(|r| r.gradnorm * r.gradnorm).sum();
    let rhs = (record.rows[0].f - f_low) / (gamma_star * tau * c.upsilon);
    Some((lhs, rhs))
}

/// Post-hoc check of the η_k condition that yields c_{k+1} − f(X_{k+1}) ≤
/// (k+1)^{-4}. Returns the indices k where the recorded trace violates it.
pub fn eta_condition_violations(record: &RunRecord) -> Vec<usize> {
    record
        .rows
        .windows(2)
        .filter_map(|w| {
            let (c_next, f_next) = (w[1].c?, w[1].f);
            let k = w[0].k;
            let bound = ((k + 1) as f64).powi(-4);
            (c_next - f_next > bound + 64.0 * f64::EPSILON * (1.0 + c_next.abs())).then_some(k)
        })
        .collect()
}
