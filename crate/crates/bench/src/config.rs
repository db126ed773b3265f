//! Flat key/value experiment configuration (TOML syntax, one experiment per
//! file). Missing keys take the defaults of the chosen experiment.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use tgp_core::{ArmijoParams, InstanceParams, ProblemFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum ExperimentId {
    QpInhomoCase1,
    QpInhomoCase2,
    JamdS,
    JatdS,
    EigenvalueDemo,
    GeometryProbe,
}

impl ExperimentId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::QpInhomoCase1 => "qp_inhomo_case1",
            ExperimentId::QpInhomoCase2 => "qp_inhomo_case2",
            ExperimentId::JamdS => "jamd_s",
            ExperimentId::JatdS => "jatd_s",
            ExperimentId::EigenvalueDemo => "eigenvalue_demo",
            ExperimentId::GeometryProbe => "geometry_probe",
        }
    }

    /// Instance family for the benchmark experiments.
    pub fn family(&self) -> Option<ProblemFamily> {
        match self {
            ExperimentId::QpInhomoCase1 => Some(ProblemFamily::QpCase1),
            ExperimentId::QpInhomoCase2 => Some(ProblemFamily::QpCase2),
            ExperimentId::JamdS => Some(ProblemFamily::JointMatrixDiag),
            ExperimentId::JatdS => Some(ProblemFamily::JointTensorDiag),
            ExperimentId::EigenvalueDemo | ExperimentId::GeometryProbe => None,
        }
    }
}

/// Keys as they appear in the file; everything but `experiment` is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentId>,
    instances: Option<usize>,
    seed: Option<u64>,
    algorithms: Option<Vec<String>>,
    baseline: Option<String>,
    a_r: Option<f64>,
    a_e: Option<f64>,
    rho: Option<f64>,
    f_scale: Option<f64>,
    eta: Option<f64>,
    tau_fixed_r: Option<f64>,
    tau_fixed_e: Option<f64>,
    gamma: Option<f64>,
    beta: Option<f64>,
    trial0: Option<f64>,
    max_backtracks: Option<usize>,
    tol_gradnorm: Option<f64>,
    max_iter: Option<usize>,
    max_time: Option<f64>,
    s_low: Option<f64>,
    s_high: Option<f64>,
    n: Option<usize>,
    r: Option<usize>,
    count: Option<usize>,
    noise: Option<f64>,
    manifold: Option<String>,
    samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub instances: usize,
    pub seed: u64,
    /// Algorithm names to run; see [`crate::algorithms::AlgorithmId`].
    pub algorithms: Vec<String>,
    pub baseline: String,
    pub a_r: f64,
    pub a_e: f64,
    pub rho: f64,
    pub f_scale: f64,
    pub eta: f64,
    pub tau_fixed_r: f64,
    pub tau_fixed_e: f64,
    pub gamma: f64,
    pub beta: f64,
    pub trial0: f64,
    pub max_backtracks: usize,
    pub tol_gradnorm: f64,
    pub max_iter: usize,
    pub max_time: f64,
    pub s_low: f64,
    pub s_high: f64,
    pub n: usize,
    pub r: usize,
    pub count: usize,
    pub noise: f64,
    /// Manifold for the probe experiment, e.g. `st:2:4`.
    pub manifold: String,
    pub samples: usize,
}

pub const DEFAULT_INSTANCES: usize = 100;
pub const DEFAULT_SEED: u64 = 2024;

impl ExperimentConfig {
    /// Benchmark settings for `experiment`.
    pub fn defaults(experiment: ExperimentId) -> Self {
        let family = experiment.family().unwrap_or(ProblemFamily::QpCase1);
        let ip = InstanceParams::standard(family);
        let (a_r, a_e, gamma, eta, tau_r, tau_e, rho, f_scale, max_time) = match experiment {
            ExperimentId::QpInhomoCase1 => (1.1, 1.1, 1e-4, 0.1, 0.055, 0.055, 0.35, 0.05, 5.0),
            ExperimentId::QpInhomoCase2 => (0.7, 0.7, 0.5, 0.1, 0.05, 0.05, 0.35, 0.05, 5.0),
            ExperimentId::JamdS => (2.0, 10.8, 0.5, 0.2, 0.025, 0.059, 0.35, 0.05, 5.0),
            ExperimentId::JatdS => (9.6, 12.4, 0.5, 0.1, 0.01, 0.035, 0.23, 0.25, 10.0),
            ExperimentId::EigenvalueDemo | ExperimentId::GeometryProbe => {
                (2.0, 2.0, 0.5, 0.1, 0.05, 0.05, 0.35, 0.05, 5.0)
            }
        };
        let mut algorithms: Vec<String> =
            ["RGD", "TGP-A-R", "TGP-NA-R", "TGP-F-R", "TGP-A-E", "TGP-NA-E", "TGP-F-E"].map(String::from).to_vec();
        if matches!(experiment, ExperimentId::JamdS | ExperimentId::JatdS) {
            algorithms.extend(["TGP-A-DE", "TGP-A-DF"].map(String::from));
        }
        let armijo = ArmijoParams::default();
        ExperimentConfig {
            experiment,
            instances: DEFAULT_INSTANCES,
            seed: DEFAULT_SEED,
            algorithms,
            baseline: "RGD".into(),
            a_r,
            a_e,
            rho,
            f_scale,
            eta,
            tau_fixed_r: tau_r,
            tau_fixed_e: tau_e,
            gamma,
            beta: armijo.beta,
            trial0: armijo.trial0,
            max_backtracks: armijo.max_backtracks,
            tol_gradnorm: 1e-4,
            max_iter: 10_000,
            max_time,
            s_low: 0.5,
            s_high: 1.5,
            n: ip.n,
            r: ip.r,
            count: ip.count,
            noise: ip.noise,
            manifold: "st:2:4".into(),
            samples: 10_000,
        }
    }

    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("parsing config")?;
        let experiment = raw.experiment.context("config must set `experiment`")?;
        let mut c = ExperimentConfig::defaults(experiment);
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = raw.$f { c.$f = v; } )* };
        }
        take!(
            instances,
            seed,
            algorithms,
            baseline,
            a_r,
            a_e,
            rho,
            f_scale,
            eta,
            tau_fixed_r,
            tau_fixed_e,
            gamma,
            beta,
            trial0,
            max_backtracks,
            tol_gradnorm,
            max_iter,
            max_time,
            s_low,
            s_high,
            n,
            r,
            count,
            noise,
            manifold,
            samples
        );
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text)
    }

    pub fn armijo(&self) -> ArmijoParams {
        ArmijoParams {
            gamma: self.gamma,
            beta: self.beta,
            max_backtracks: self.max_backtracks,
            ..ArmijoParams::default()
        }
        .with_trial0(self.trial0)
    }

    pub fn instance_params(&self) -> InstanceParams {
        InstanceParams { n: self.n, r: self.r, count: self.count, noise: self.noise }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.armijo().validate()?;
        if !(0.0..1.0).contains(&self.eta) {
            bail!("eta = {} must lie in [0, 1)", self.eta);
        }
        if !(self.tau_fixed_r > 0.0 && self.tau_fixed_e > 0.0) {
            bail!("fixed steps must be positive");
        }
        if !(self.max_time > 0.0 && self.tol_gradnorm >= 0.0) {
            bail!("stopping parameters out of range");
        }
        if !(self.s_low <= self.s_high) {
            bail!("s_low > s_high");
        }
        if self.experiment.family().is_some() {
            if self.algorithms.is_empty() {
                bail!("no algorithms");
            }
            for name in self.algorithms.iter().chain(std::iter::once(&self.baseline)) {
                crate::algorithms::AlgorithmId::parse(name)?;
            }
        }
        Ok(())
    }
}
