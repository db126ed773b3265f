//! Transformed gradient projection on Stiefel and Grassmann manifolds.
//!
//! A step moves along a scaled Riemannian gradient plus a normal-space shift
//! and then projects back onto the manifold:
//! X_{k+1} = P(X_k − τ_k H_k).

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod direction;
pub mod error;
pub mod manifold;
pub mod matrix;
pub mod probe;
pub mod problem;
pub mod scenarios;
pub mod solver;
pub mod stepsize;

pub use direction::{build_direction, DirectionSpec, SPolicy, Scaling};
pub use error::{Result, TgpError};
pub use manifold::{ManifoldKind, ManifoldPoint};
pub use matrix::Matrix;
pub use problem::{generate_instance, InstanceParams, Objective, ProblemFamily, ProblemInstance};
pub use solver::{solve, RunRecord, SolverConfig, Status, StepsizeMode, TraceRow};
pub use stepsize::{ArmijoParams, EtaSchedule};
