//! Stepsize rules: monotone Armijo backtracking, the Zhang-Hager nonmonotone
//! variant, fixed steps, and the trial-step adaptation used between
//! iterations.

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Result, TgpError};
use crate::manifold::{project_to_manifold, ManifoldPoint};
use crate::problem::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    pub gamma: f64,
    pub beta: f64,
    /// Lower clamp for the trial step.
    pub trial_lo: f64,
    /// Upper clamp for the trial step.
    pub trial_hi: f64,
    /// Initial trial step, also the cap when growing the trial.
    pub trial0: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        ArmijoParams { gamma: 0.5, beta: 0.5, trial_lo: 1e-10, trial_hi: 1.0, trial0: 1.0, max_backtracks: 10 }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 0.0
            && self.gamma < 1.0
            && self.beta > 0.0
            && self.beta < 1.0
            && self.trial_lo > 0.0
            && self.trial_lo <= self.trial_hi
            && self.trial_hi.is_finite()
            && self.trial0 >= self.trial_lo
            && self.trial0 <= self.trial_hi;
        if ok {
            Ok(())
        } else {
            Err(TgpError::InvalidParameter(format!("{self:?}")))
        }
    }

    /// Same parameters with a different initial trial step; widens the clamp
    /// interval if needed.
    pub fn with_trial0(mut self, trial0: f64) -> Self {
        self.trial0 = trial0;
        self.trial_hi = self.trial_hi.max(trial0);
        self.trial_lo = self.trial_lo.min(trial0);
        self
    }
}

/// Result of one line search.
#[derive(Debug, Clone)]
pub struct StepsizeOutcome {
    pub tau: f64,
    pub backtracks: usize,
    pub next_point: ManifoldPoint,
    pub f_next: f64,
    /// The backtracking budget ran out; `tau` is the last candidate tried and
    /// need not satisfy the acceptance test.
    pub exhausted: bool,
    /// Whether the projection producing `next_point` was unique.
    pub unique: bool,
}

/// ⟨grad f(X), H̃⟩, which equals ⟨grad f(X), H⟩.
pub fn descent_measure(grad: &crate::matrix::Matrix, direction: &Direction) -> f64 {
    grad.dot(&direction.tangent)
}

/// Z(τ) = P(X − τH) and its cost.
fn candidate<O: Objective + ?Sized>(
    x: &ManifoldPoint,
    direction: &Direction,
    obj: &O,
    tau: f64,
) -> Result<(ManifoldPoint, f64, bool)> {
    let y = x.value() - &direction.full.scale(tau);
    let p = project_to_manifold(x.kind(), &y)?;
    let f = obj.cost_at(p.point.value());
    Ok((p.point, f, p.unique))
}

/// Backtracks from `trial` until f(Z(τ)) − reference ≤ −γτ⟨grad, H⟩.
fn backtrack<O: Objective + ?Sized>(
    x: &ManifoldPoint,
    reference: f64,
    direction: &Direction,
    grad: &crate::matrix::Matrix,
    obj: &O,
    params: &ArmijoParams,
    trial: f64,
) -> Result<StepsizeOutcome> {
    params.validate()?;
    if !(trial >= params.trial_lo && trial <= params.trial_hi) {
        return Err(TgpError::InvalidParameter(format!(
            "trial {trial} outside [{}, {}]",
            params.trial_lo, params.trial_hi
        )));
    }
    let d = descent_measure(grad, direction);
    if !(d > 0.0) {
        return Err(TgpError::NotDescent(d));
    }
    let mut tau = trial;
    let mut i = 0;
    loop {
        let (next_point, f_next, unique) = candidate(x, direction, obj, tau)?;
        let accepted = f_next - reference <= -params.gamma * tau * d;
        if accepted || i == params.max_backtracks {
            return Ok(StepsizeOutcome { tau, backtracks: i, next_point, f_next, exhausted: !accepted, unique });
        }
        i += 1;
        tau *= params.beta;
    }
}

/// Monotone Armijo search from the trial step `trial`.
pub fn armijo_search<O: Objective + ?Sized>(
    x: &ManifoldPoint,
    f_x: f64,
    direction: &Direction,
    grad: &crate::matrix::Matrix,
    obj: &O,
    params: &ArmijoParams,
    trial: f64,
) -> Result<StepsizeOutcome> {
    backtrack(x, f_x, direction, grad, obj, params, trial)
}

/// Reference value c_k and weight q_k of the nonmonotone search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonmonotoneState {
    pub c: f64,
    pub q: f64,
}

impl NonmonotoneState {
    pub fn new(f0: f64) -> Self {
        NonmonotoneState { c: f0, q: 1.0 }
    }

    /// q' = ηq + 1, c' = (ηqc + f_next)/q'.
    pub fn advance(&self, eta: f64, f_next: f64) -> Self {
        let q = eta * self.q + 1.0;
        let c = (eta * self.q * self.c + f_next) / q;
        NonmonotoneState { c, q }
    }
}

/// Choice of η_k in the nonmonotone recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EtaSchedule {
    Constant(f64),
    /// min{η̄, 1/(q_k((c_k − f_{k+1})(k+1)^4 − 1))}, which keeps
    /// c_{k+1} − f_{k+1} ≤ (k+1)^{-4}. The bound only binds when the
    /// bracket is positive.
    Decaying {
        cap: f64,
    },
}

impl EtaSchedule {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            EtaSchedule::Constant(v) | EtaSchedule::Decaying { cap: v } => v,
        };
        if (0.0..1.0).contains(&v) {
            Ok(())
        } else {
            Err(TgpError::InvalidParameter(format!("eta = {v} must lie in [0, 1)")))
        }
    }

    /// η_k given the state before the update, f(X_{k+1}) and k.
    pub fn eta(&self, state: &NonmonotoneState, f_next: f64, k: usize) -> f64 {
        match *self {
            EtaSchedule::Constant(v) => v,
            EtaSchedule::Decaying { cap } => cap.min(eta_upper_bound(state, f_next, k)),
        }
    }
}

/// Largest η_k with c_{k+1} − f(X_{k+1}) ≤ (k+1)^{-4}; infinite when every η
/// qualifies.
pub fn eta_upper_bound(state: &NonmonotoneState, f_next: f64, k: usize) -> f64 {
    let kp = (k + 1) as f64;
    let bracket = (state.c - f_next) * kp.powi(4) - 1.0;
    if bracket <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (state.q * bracket)
    }
}

/// Nonmonotone search against c_k; returns the outcome and the advanced state.
#[allow(clippy::too_many_arguments)]
pub fn nonmonotone_search<O: Objective + ?Sized>(
    x: &ManifoldPoint,
    direction: &Direction,
    grad: &crate::matrix::Matrix,
    obj: &O,
    params: &ArmijoParams,
    trial: f64,
    state: &NonmonotoneState,
    schedule: &EtaSchedule,
    k: usize,
) -> Result<(StepsizeOutcome, NonmonotoneState)> {
    schedule.validate()?;
    let out = backtrack(x, state.c, direction, grad, obj, params, trial)?;
    let eta = schedule.eta(state, out.f_next, k);
    let next = state.advance(eta, out.f_next);
    Ok((out, next))
}

/// Step along a fixed τ without any test.
pub fn fixed_step<O: Objective + ?Sized>(
    x: &ManifoldPoint,
    direction: &Direction,
    obj: &O,
    tau: f64,
) -> Result<StepsizeOutcome> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(TgpError::InvalidParameter(format!("fixed step {tau}")));
    }
    let (next_point, f_next, unique) = candidate(x, direction, obj, tau)?;
    Ok(StepsizeOutcome { tau, backtracks: 0, next_point, f_next, exhausted: false, unique })
}

/// Constants entering the admissible fixed-step range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedStepConstants {
    pub upsilon: f64,
    pub varpi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Uniform bound on the normal part ‖Ĥ_k‖.
    pub delta_hat_h: f64,
    pub reach: f64,
    pub delta: f64,
}

/// Upper end of the open interval (0, τ_max) of admissible fixed steps:
/// τ_max = min{(ρ* − δ)/Δ_Ĥ, υ/(Γ1ϖ² + Γ2Δ_Ĥϖ)}, or υ/(Γ1ϖ²) when Δ_Ĥ = 0.
pub fn fixed_stepsize_bound(c: &FixedStepConstants) -> Result<(f64, f64)> {
    let positive = [c.upsilon, c.varpi, c.gamma1, c.gamma2, c.reach, c.delta];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(c.delta_hat_h >= 0.0) || !c.delta_hat_h.is_finite() {
        return Err(TgpError::InvalidParameter(format!("{c:?}")));
    }
    if c.delta > c.reach {
        return Err(TgpError::InvalidParameter(format!("delta {} exceeds reach {}", c.delta, c.reach)));
    }
    let smooth = c.upsilon / (c.gamma1 * c.varpi * c.varpi + c.gamma2 * c.delta_hat_h * c.varpi);
    let upper = if c.delta_hat_h == 0.0 { smooth } else { smooth.min((c.reach - c.delta) / c.delta_hat_h) };
    Ok((0.0, upper))
}

/// Next trial step: min{1.1·prev, trial0} after an unchecked step, 0.9·prev
/// after backtracking, then clamped to [trial_lo, trial_hi].
pub fn adapt_trial(prev: f64, backtracked: bool, params: &ArmijoParams) -> f64 {
    let next = if backtracked { 0.9 * prev } else { (1.1 * prev).min(params.trial0) };
    next.clamp(params.trial_lo, params.trial_hi)
}
