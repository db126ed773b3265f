//! CLI side of the geometry probes.

use anyhow::{bail, Context};
use tgp_core::probe::{
    delta_grid, probe_descent_inequality, probe_first_order_bound, probe_lower_bound, probe_normal_quadratic,
    probe_normal_stability, probe_second_order_bound, ProbeReport,
};
use tgp_core::{generate_instance, InstanceParams, ManifoldKind, ProblemFamily};

use crate::report::fmt_f64;

/// `st:r:n` for St(r, n), `gr:p:n` for Gr(p, n), `sphere:n` for St(1, n).
pub fn parse_manifold(s: &str) -> anyhow::Result<ManifoldKind> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> anyhow::Result<usize> {
        parts.get(i).with_context(|| format!("manifold {s:?} is missing a dimension"))?.parse().context("dimension")
    };
    let kind = match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
        ("st" | "stiefel", 3) => ManifoldKind::stiefel(num(2)?, num(1)?)?,
        ("gr" | "grassmann", 3) => ManifoldKind::grassmann(num(1)?, num(2)?)?,
        ("sphere", 2) => ManifoldKind::stiefel(num(1)?, 1)?,
        _ => bail!("manifold {s:?}: expected st:r:n, gr:p:n or sphere:n"),
    };
    Ok(kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum Lemma {
    All,
    FirstOrder,
    SecondOrder,
    LowerBound,
    NormalQuadratic,
    NormalStability,
    Descent,
}

/// Runs the selected probes. The descent probe uses a Case 1 quadratic
/// instance of matching size and is skipped on Grassmann.
pub fn run_probes(kind: ManifoldKind, lemma: Lemma, samples: usize, seed: u64) -> anyhow::Result<Vec<ProbeReport>> {
    let want = |l: Lemma| lemma == Lemma::All || lemma == l;
    let mut out = Vec::new();
    for delta in delta_grid(kind) {
        if want(Lemma::FirstOrder) {
            out.push(probe_first_order_bound(kind, delta, samples, seed)?);
        }
        if want(Lemma::SecondOrder) {
            out.push(probe_second_order_bound(kind, delta, samples, seed)?);
        }
    }
    if want(Lemma::LowerBound) {
        out.push(probe_lower_bound(kind, samples, seed)?);
    }
    if want(Lemma::NormalQuadratic) {
        out.push(probe_normal_quadratic(kind, samples, seed)?);
    }
    if want(Lemma::NormalStability) {
        out.push(probe_normal_stability(kind, samples, seed)?);
    }
    if want(Lemma::Descent) {
        if let ManifoldKind::Stiefel { n, r } = kind {
            let params = InstanceParams { n, r, count: 1, noise: 0.0 };
            let (p, _) = generate_instance(ProblemFamily::QpCase1, params, seed)?;
            for delta in delta_grid(kind) {
                out.push(probe_descent_inequality(&p, delta, samples, seed)?);
            }
        }
    }
    Ok(out)
}

pub const PROBE_HEADER: [&str; 7] = ["lemma", "manifold", "delta", "samples", "violations", "constants", "worst_ratio"];

pub fn manifold_label(kind: ManifoldKind) -> String {
    match kind {
        ManifoldKind::Stiefel { n, r } => format!("St({r},{n})"),
        ManifoldKind::Grassmann { p, n } => format!("Gr({p},{n})"),
    }
}

pub fn probe_csv(reports: &[ProbeReport]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROBE_HEADER)?;
    for r in reports {
        let constants: Vec<String> = r.fitted.iter().map(|c| format!("{}={}", c.name, fmt_f64(c.value))).collect();
        w.write_record([
            r.lemma.clone(),
            manifold_label(r.manifold),
            r.delta.map(fmt_f64).unwrap_or_default(),
            r.samples.to_string(),
            r.violations.to_string(),
            constants.join(";"),
            fmt_f64(r.worst_ratio),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
