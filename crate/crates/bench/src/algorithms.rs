//! Named algorithm variants and their solver settings.

use anyhow::bail;
use serde::{Deserialize, Serialize};
use tgp_core::{DirectionSpec, EtaSchedule, SPolicy, SolverConfig, StepsizeMode};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgorithmId {
    Rgd,
    Egp,
    TgpAR,
    TgpNaR,
    TgpFR,
    TgpAE,
    TgpNaE,
    TgpFE,
    TgpADe,
    TgpADf,
}

pub const ALL: [AlgorithmId; 10] = [
    AlgorithmId::Rgd,
    AlgorithmId::Egp,
    AlgorithmId::TgpAR,
    AlgorithmId::TgpNaR,
    AlgorithmId::TgpFR,
    AlgorithmId::TgpAE,
    AlgorithmId::TgpNaE,
    AlgorithmId::TgpFE,
    AlgorithmId::TgpADe,
    AlgorithmId::TgpADf,
];

impl AlgorithmId {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmId::Rgd => "RGD",
            AlgorithmId::Egp => "EGP",
            AlgorithmId::TgpAR => "TGP-A-R",
            AlgorithmId::TgpNaR => "TGP-NA-R",
            AlgorithmId::TgpFR => "TGP-F-R",
            AlgorithmId::TgpAE => "TGP-A-E",
            AlgorithmId::TgpNaE => "TGP-NA-E",
            AlgorithmId::TgpFE => "TGP-F-E",
            AlgorithmId::TgpADe => "TGP-A-DE",
            AlgorithmId::TgpADf => "TGP-A-DF",
        }
    }

    pub fn parse(name: &str) -> anyhow::Result<Self> {
        match ALL.iter().find(|a| a.name().eq_ignore_ascii_case(name)) {
            Some(a) => Ok(*a),
            None => bail!("unknown algorithm {name:?}; expected one of {:?}", ALL.map(|a| a.name())),
        }
    }

    /// Variants that change only the tangent part of TGP-A-E; they are
    /// compared against TGP-A-E rather than the experiment baseline.
    pub fn is_tangent_variant(&self) -> bool {
        matches!(self, AlgorithmId::TgpADe | AlgorithmId::TgpADf)
    }

    pub fn solver_config(&self, c: &ExperimentConfig) -> SolverConfig {
        let armijo = StepsizeMode::Armijo(c.armijo());
        let nonmonotone = StepsizeMode::Nonmonotone { params: c.armijo(), eta: EtaSchedule::Constant(c.eta) };
        let (direction, stepsize) = match self {
            AlgorithmId::Rgd => (DirectionSpec::Rgd, armijo),
            AlgorithmId::Egp => (DirectionSpec::Egp, armijo),
            AlgorithmId::TgpAR => (DirectionSpec::TgpR { a: c.a_r }, armijo),
            AlgorithmId::TgpNaR => (DirectionSpec::TgpR { a: c.a_r }, nonmonotone),
            AlgorithmId::TgpFR => (DirectionSpec::TgpR { a: c.a_r }, StepsizeMode::Fixed { tau: c.tau_fixed_r }),
            AlgorithmId::TgpAE => (DirectionSpec::TgpE { a: c.a_e }, armijo),
            AlgorithmId::TgpNaE => (DirectionSpec::TgpE { a: c.a_e }, nonmonotone),
            AlgorithmId::TgpFE => (DirectionSpec::TgpE { a: c.a_e }, StepsizeMode::Fixed { tau: c.tau_fixed_e }),
            AlgorithmId::TgpADe => (DirectionSpec::TgpDe { rho: c.rho, a: c.a_e }, armijo),
            AlgorithmId::TgpADf => (DirectionSpec::TgpDf { rho: c.rho, f_scale: c.f_scale, a: c.a_e }, armijo),
        };
        SolverConfig {
            direction,
            stepsize,
            s_policy: SPolicy::FixedPerInstance { low: c.s_low, high: c.s_high },
            tol_gradnorm: c.tol_gradnorm,
            max_iter: c.max_iter,
            max_time: Some(c.max_time),
            record_points: false,
        }
    }
}
