//! Sampling harness for the projection-geometry inequalities: bound checks,
//! empirical constants and exact identities.
//!
//! Sample i is drawn from its own stream `derive_seed(seed, i)` and its
//! magnitude stratum is fixed by i, so a run with more samples extends the
//! sample set of a shorter one. Every fitted constant is a maximum over the
//! sample set and therefore non-decreasing in the sample count. Fitted values
//! are lower bounds on the true constants, not certificates.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TgpError};
use crate::manifold::{
    project_normal, project_to_manifold, random_normal, random_point, random_tangent, riemannian_gradient,
    ManifoldKind, ManifoldPoint,
};
use crate::matrix::{derive_seed, gaussian_from, rng_from_seed, Matrix};
use crate::problem::Objective;

/// Magnitudes used for the sampled displacements, before the boundary level.
pub const SMALL_MAGNITUDES: [f64; 3] = [1e-3, 1e-2, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedConstant {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub lemma: String,
    pub manifold: ManifoldKind,
    pub delta: Option<f64>,
    pub samples: usize,
    pub violations: usize,
    /// Empirical constants; lower bounds on the true ones.
    pub fitted: Vec<NamedConstant>,
    /// Largest observed ratio of the left side to the bound (or to the
    /// quantity defining the fitted constant).
    pub worst_ratio: f64,
}

impl ProbeReport {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.fitted.iter().find(|c| c.name == name).map(|c| c.value)
    }

    /// First fitted constant, if any.
    pub fn fitted_constant(&self) -> Option<f64> {
        self.fitted.first().map(|c| c.value)
    }
}

/// Magnitude strata for a displacement bounded by `cap`: the small levels
/// below `cap` plus `cap/2`.
fn strata(cap: f64) -> Vec<f64> {
    let mut s: Vec<f64> = SMALL_MAGNITUDES.iter().copied().filter(|m| *m < cap).collect();
    s.push(0.5 * cap);
    s
}

fn rescaled(m: Matrix, target: f64) -> Matrix {
    let n = m.norm();
    if n == 0.0 || target == 0.0 {
        m.scale(0.0)
    } else {
        m.scale(target / n)
    }
}

/// One (X, V, W) triple.
struct Triple {
    x: ManifoldPoint,
    v: Matrix,
    w: Matrix,
}

/// Sample i: V magnitude cycles through `v_levels`, W magnitude through
/// `w_levels` (a zero level gives W = 0).
fn triple(kind: ManifoldKind, seed: u64, i: usize, v_levels: &[f64], w_levels: &[f64]) -> Triple {
    let mut rng = rng_from_seed(derive_seed(seed, i as u64));
    let x = random_point(kind, &mut rng);
    let v = rescaled(random_tangent(&x, &mut rng), v_levels[i % v_levels.len()]);
    let w = rescaled(random_normal(&x, &mut rng), w_levels[(i / v_levels.len()) % w_levels.len()]);
    Triple { x, v, w }
}

fn check_delta(kind: ManifoldKind, delta: f64) -> Result<f64> {
    kind.validate()?;
    let reach = kind.reach();
    if !(delta > 0.0 && delta <= reach) {
        return Err(TgpError::InvalidParameter(format!("delta {delta} outside (0, {reach}]")));
    }
    Ok(reach)
}

fn projected(kind: ManifoldKind, y: &Matrix) -> Result<Matrix> {
    Ok(project_to_manifold(kind, y)?.point.into_value())
}

/// Known first-order constant: 2/δ on Stiefel, 4√p/δ on Grassmann.
pub fn first_order_constant(kind: ManifoldKind, delta: f64) -> f64 {
    match kind {
        ManifoldKind::Stiefel { .. } => 2.0 / delta,
        ManifoldKind::Grassmann { p, .. } => 4.0 * (p as f64).sqrt() / delta,
    }
}

/// ‖P(X+V+W) − X‖ ≤ L₀‖V‖ with the known L₀, for ‖W‖ ≤ reach − δ.
pub fn probe_first_order_bound(kind: ManifoldKind, delta: f64, samples: usize, seed: u64) -> Result<ProbeReport> {
    let reach = check_delta(kind, delta)?;
    let l0 = first_order_constant(kind, delta);
    let v_levels = [1e-3, 1e-2, 0.1, 0.5, 1.0];
    let mut w_levels = vec![0.0];
    w_levels.extend(strata(reach - delta));
    w_levels.push(reach - delta);
    let (mut violations, mut worst) = (0, 0.0f64);
    for i in 0..samples {
        let t = triple(kind, seed, i, &v_levels, &w_levels);
        let y = &(t.x.value() + &t.v) + &t.w;
        let lhs = (&projected(kind, &y)? - t.x.value()).norm();
        let rhs = l0 * t.v.norm();
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
        worst = worst.max(lhs / rhs);
    }
    Ok(ProbeReport {
        lemma: "first_order".into(),
        manifold: kind,
        delta: Some(delta),
        samples,
        violations,
        fitted: vec![
            NamedConstant { name: "L0".into(), value: l0 },
            NamedConstant { name: "L0_observed".into(), value: worst * l0 },
        ],
        worst_ratio: worst,
    })
}

/// Running two-term fit of e ≤ C₁a + C₂b over samples in index order.
/// Samples with b = 0 raise C₁ to e/a; the others raise C₂ to
/// (e − C₁a)⁺/b using the C₁ reached so far. Both are running maxima, and
/// since C₁ only grows, the final pair covers every sample seen.
#[derive(Debug, Clone, Copy, Default)]
struct TwoTermFit {
    c1: f64,
    c2: f64,
}

impl TwoTermFit {
    fn push(&mut self, e: f64, a: f64, b: f64) {
        if b == 0.0 {
            if a > 0.0 {
                self.c1 = self.c1.max(e / a);
            }
        } else {
            self.c2 = self.c2.max((e - self.c1 * a).max(0.0) / b);
        }
    }

    fn constants(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }
}

/// ‖P(X+V+W) − X − V‖ ≤ L₁‖V‖² + L₂‖V‖‖W‖: fits (L₁, L₂).
pub fn probe_second_order_bound(kind: ManifoldKind, delta: f64, samples: usize, seed: u64) -> Result<ProbeReport> {
    let reach = check_delta(kind, delta)?;
    let v_levels = strata(1.0);
    let mut w_levels = vec![0.0];
    w_levels.extend(strata(reach - delta));
    let mut fit = TwoTermFit::default();
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = triple(kind, seed, i, &v_levels, &w_levels);
        let y = &(t.x.value() + &t.v) + &t.w;
        let e = (&(&projected(kind, &y)? - t.x.value()) - &t.v).norm();
        let (vn, wn) = (t.v.norm(), t.w.norm());
        let (a, b) = (vn * vn, vn * wn);
        fit.push(e, a, b);
        rows.push((e, a, b));
    }
    let (l1, l2) = fit.constants();
    let worst = rows.iter().filter(|r| r.1 + r.2 > 0.0).map(|&(e, a, b)| e / (l1 * a + l2 * b)).fold(0.0, f64::max);
    let violations = rows.iter().filter(|&&(e, a, b)| e > (l1 * a + l2 * b) * (1.0 + 1e-12)).count();
    Ok(ProbeReport {
        lemma: "second_order".into(),
        manifold: kind,
        delta: Some(delta),
        samples,
        violations,
        fitted: vec![NamedConstant { name: "L1".into(), value: l1 }, NamedConstant { name: "L2".into(), value: l2 }],
        worst_ratio: worst,
    })
}

/// Lower bound ‖P(X+V+W) − X‖ ≥ ‖V‖/(1 + L₃‖V+W‖): fits L₃. On Stiefel also
/// counts violations of ‖V‖/((r+1)‖X+V+W‖).
pub fn probe_lower_bound(kind: ManifoldKind, samples: usize, seed: u64) -> Result<ProbeReport> {
    kind.validate()?;
    let reach = kind.reach();
    let v_levels = [1e-3, 1e-2, 0.1, 0.5, 1.0];
    let mut w_levels = vec![0.0];
    w_levels.extend(strata(reach));
    w_levels.push(0.99 * reach);
    let (mut l3, mut violations, mut worst) = (0.0f64, 0, 0.0f64);
    for i in 0..samples {
        let t = triple(kind, seed, i, &v_levels, &w_levels);
        let vw = &t.v + &t.w;
        let y = t.x.value() + &vw;
        let d = (&projected(kind, &y)? - t.x.value()).norm();
        let vn = t.v.norm();
        if vn > 0.0 && d > 0.0 {
            l3 = l3.max((vn / d - 1.0) / vw.norm());
        }
        if let ManifoldKind::Stiefel { r, .. } = kind {
            let bound = vn / ((r + 1) as f64 * y.norm());
            if d < bound * (1.0 - 1e-12) {
                violations += 1;
            }
            if d > 0.0 {
                worst = worst.max(bound / d);
            }
        }
    }
    Ok(ProbeReport {
        lemma: "lower_bound".into(),
        manifold: kind,
        delta: None,
        samples,
        violations,
        fitted: vec![NamedConstant { name: "L3".into(), value: l3 }],
        worst_ratio: worst,
    })
}

/// Pair i: y = P(x + t·G/‖G‖) for an ambient Gaussian G with t cycling
/// through `levels`, or an independent random point when t is infinite.
fn pair(kind: ManifoldKind, seed: u64, i: usize, levels: &[f64]) -> Result<(ManifoldPoint, Matrix)> {
    let mut rng = rng_from_seed(derive_seed(seed, i as u64));
    let x = random_point(kind, &mut rng);
    let t = levels[i % levels.len()];
    let y = if t.is_finite() {
        let (r, c) = kind.ambient_shape();
        let mut g = gaussian_from(&mut rng, r, c);
        if let ManifoldKind::Grassmann { .. } = kind {
            g = g.sym_part();
        }
        projected(kind, &(x.value() + &rescaled(g, t)))?
    } else {
        random_point(kind, &mut rng).into_value()
    };
    Ok((x, y))
}

/// ‖P_N(x − y)‖ ≤ L₄‖x − y‖²: fits L₄.
pub fn probe_normal_quadratic(kind: ManifoldKind, samples: usize, seed: u64) -> Result<ProbeReport> {
    kind.validate()?;
    let levels = [1e-3, 1e-2, 0.1, 0.5, 1.0, f64::INFINITY];
    let mut l4 = 0.0f64;
    for i in 0..samples {
        let (x, y) = pair(kind, seed, i, &levels)?;
        let diff = x.value() - &y;
        let d2 = diff.norm().powi(2);
        if d2 > 0.0 {
            l4 = l4.max(project_normal(&x, &diff)?.norm() / d2);
        }
    }
    Ok(ProbeReport {
        lemma: "normal_quadratic".into(),
        manifold: kind,
        delta: None,
        samples,
        violations: 0,
        fitted: vec![NamedConstant { name: "L4".into(), value: l4 }],
        worst_ratio: l4,
    })
}

/// Largest |‖P_N(x − y)‖/‖x − y‖² − ½| over pairs on the unit sphere in ℝⁿ.
/// The identity is exact there, so this measures rounding only. Separations
/// start at 0.1: below that, rounding in 1 − xᵀy is amplified by 1/‖x − y‖².
pub fn sphere_normal_quadratic_defect(n: usize, samples: usize, seed: u64) -> Result<f64> {
    let kind = ManifoldKind::stiefel(n, 1)?;
    let levels = [0.1, 0.5, 1.0, f64::INFINITY];
    let mut worst = 0.0f64;
    for i in 0..samples {
        let (x, y) = pair(kind, seed, i, &levels)?;
        let diff = x.value() - &y;
        let d2 = diff.norm().powi(2);
        if d2 > 0.0 {
            worst = worst.max((project_normal(&x, &diff)?.norm() / d2 - 0.5).abs());
        }
    }
    Ok(worst)
}

/// |f(P(x+v+w)) − f(x) − ⟨grad f, v⟩| ≤ Γ₁‖v‖² + Γ₂‖grad f‖‖v‖‖w‖: fits (Γ₁, Γ₂).
pub fn probe_descent_inequality<O: Objective + ?Sized>(
    problem: &O,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let kind = problem.manifold();
    let reach = check_delta(kind, delta)?;
    let v_levels = strata(1.0);
    let mut w_levels = vec![0.0];
    w_levels.extend(strata(reach - delta));
    let mut fit = TwoTermFit::default();
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = triple(kind, seed, i, &v_levels, &w_levels);
        let f = problem.cost_at(t.x.value());
        let grad = riemannian_gradient(&t.x, &problem.egrad_at(t.x.value()))?;
        let z = projected(kind, &(&(t.x.value() + &t.v) + &t.w))?;
        let e = (problem.cost_at(&z) - f - grad.dot(&t.v)).abs();
        let vn = t.v.norm();
        let (a, b) = (vn * vn, grad.norm() * vn * t.w.norm());
        fit.push(e, a, b);
        rows.push((e, a, b));
    }
    let (g1, g2) = fit.constants();
    let worst = rows.iter().filter(|r| r.1 + r.2 > 0.0).map(|&(e, a, b)| e / (g1 * a + g2 * b)).fold(0.0, f64::max);
    let violations = rows.iter().filter(|&&(e, a, b)| e > (g1 * a + g2 * b) * (1.0 + 1e-12)).count();
    Ok(ProbeReport {
        lemma: "descent_inequality".into(),
        manifold: kind,
        delta: Some(delta),
        samples,
        violations,
        fitted: vec![
            NamedConstant { name: "Gamma1".into(), value: g1 },
            NamedConstant { name: "Gamma2".into(), value: g2 },
        ],
        worst_ratio: worst,
    })
}

/// P(X + W) = X for normal W inside the stable region: Stiefel W = XS with
/// λ_min(sym S) > −1 (S drawn with spectrum in (−1, 3)), Grassmann ‖W‖ below
/// the reach. Violations count samples off by more than 1e-10.
pub fn probe_normal_stability(kind: ManifoldKind, samples: usize, seed: u64) -> Result<ProbeReport> {
    kind.validate()?;
    let reach = kind.reach();
    let mut worst = 0.0f64;
    let mut violations = 0;
    for i in 0..samples {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let x = random_point(kind, &mut rng);
        let w = match kind {
            ManifoldKind::Stiefel { r, .. } => {
                let s = crate::matrix::sym_with_spectrum_from(&mut rng, r, -1.0 + 1e-6, 3.0);
                x.value() * &s
            }
            ManifoldKind::Grassmann { .. } => {
                let level = [1e-3, 0.1, 0.5 * reach, reach - 1e-6][i % 4];
                rescaled(random_normal(&x, &mut rng), level)
            }
        };
        let err = (&projected(kind, &(x.value() + &w))? - x.value()).norm();
        if err >= 1e-10 {
            violations += 1;
        }
        worst = worst.max(err);
    }
    Ok(ProbeReport {
        lemma: "normal_stability".into(),
        manifold: kind,
        delta: None,
        samples,
        violations,
        fitted: Vec::new(),
        worst_ratio: worst,
    })
}

/// Distance ‖P(x+v+w) − x‖ on the circle for x = (1, 0), w = (−1, 0),
/// v = (0, ε). Stays √2 for every ε ≠ 0, so no first-order bound survives
/// at ‖w‖ equal to the reach.
pub fn boundary_counterexample_distance(eps: f64) -> Result<f64> {
    let kind = ManifoldKind::stiefel(2, 1)?;
    let y = Matrix::column_vector(&[0.0, eps])?;
    let x = Matrix::column_vector(&[1.0, 0.0])?;
    Ok((&projected(kind, &y)? - &x).norm())
}

/// Ratios (e/‖v‖², e/(‖v‖‖w‖)) on the circle for x = (1, 0),
/// w = (δ/2 − 1, 0), v = (0, ε), with e = ‖P(x+v+w) − x − v‖. The first
/// diverges as ε → 0, the second stays bounded.
pub fn second_order_counterexample_ratios(delta: f64, eps: f64) -> Result<(f64, f64)> {
    let kind = ManifoldKind::stiefel(2, 1)?;
    let y = Matrix::column_vector(&[delta / 2.0, eps])?;
    let xv = Matrix::column_vector(&[1.0, eps])?;
    let e = (&projected(kind, &y)? - &xv).norm();
    let wn = 1.0 - delta / 2.0;
    Ok((e / (eps * eps), e / (eps.abs() * wn)))
}

/// The δ grid used by the CLI: {0.1, 0.25, 0.5}·reach.
pub fn delta_grid(kind: ManifoldKind) -> [f64; 3] {
    let r = kind.reach();
    [0.1 * r, 0.25 * r, 0.5 * r]
}

/// Every probe on `kind` with default parameters.
pub fn probe_all(kind: ManifoldKind, samples: usize, seed: u64) -> Result<Vec<ProbeReport>> {
    let mut out = Vec::new();
    for delta in delta_grid(kind) {
        out.push(probe_first_order_bound(kind, delta, samples, seed)?);
        out.push(probe_second_order_bound(kind, delta, samples, seed)?);
    }
    out.push(probe_lower_bound(kind, samples, seed)?);
    out.push(probe_normal_quadratic(kind, samples, seed)?);
    out.push(probe_normal_stability(kind, samples, seed)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_instance, InstanceParams, ProblemFamily};

    fn st24() -> ManifoldKind {
        ManifoldKind::stiefel(4, 2).unwrap()
    }

    #[test]
    fn first_order_bound_holds_on_stiefel() {
        let rep = probe_first_order_bound(st24(), 0.5, 2000, 1).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.constant("L0"), Some(4.0));
        assert!(rep.worst_ratio <= 1.0);
    }

    #[test]
    fn first_order_bound_holds_on_grassmann() {
        let g = ManifoldKind::grassmann(2, 4).unwrap();
        let rep = probe_first_order_bound(g, 0.25 * g.reach(), 2000, 2).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn zero_tangent_gives_zero_displacement() {
        let mut rng = rng_from_seed(3);
        let x = random_point(st24(), &mut rng);
        let w = rescaled(random_normal(&x, &mut rng), 0.3);
        let d = (&projected(st24(), &(x.value() + &w)).unwrap() - x.value()).norm();
        assert!(d < 1e-12);
    }

    #[test]
    fn boundary_counterexample_is_root_two() {
        for eps in [1e-8, 1e-3, 0.5] {
            assert!((boundary_counterexample_distance(eps).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn second_order_counterexample_separates_terms() {
        let delta = 0.5;
        let (q1, b1) = second_order_counterexample_ratios(delta, 1e-2).unwrap();
        let (q2, b2) = second_order_counterexample_ratios(delta, 1e-4).unwrap();
        assert!(q2 > 50.0 * q1);
        // e ≈ ε(2/δ − 1), ‖w‖ = 1 − δ/2, so e/(ε‖w‖) → 2/δ.
        assert!((b2 - 2.0 / delta).abs() < 1e-3);
        assert!((b1 - b2).abs() < 1e-2);
    }

    #[test]
    fn fitted_pair_covers_samples_and_grows() {
        let a = probe_second_order_bound(st24(), 0.5, 500, 4).unwrap();
        let b = probe_second_order_bound(st24(), 0.5, 1000, 4).unwrap();
        assert_eq!(a.violations, 0);
        assert!(a.worst_ratio <= 1.0 + 1e-12);
        assert!(b.constant("L1").unwrap() >= a.constant("L1").unwrap());
        assert!(b.constant("L2").unwrap() >= a.constant("L2").unwrap());
    }

    #[test]
    fn sharp_lower_bound_on_stiefel() {
        let rep = probe_lower_bound(st24(), 2000, 5).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.constant("L3").unwrap().is_finite());
    }

    #[test]
    fn sphere_normal_component_is_half_square_distance() {
        let d = sphere_normal_quadratic_defect(3, 1000, 6).unwrap();
        assert!(d < 1e-10, "{d}");
        let rep = probe_normal_quadratic(ManifoldKind::stiefel(5, 1).unwrap(), 500, 6).unwrap();
        assert!((rep.constant("L4").unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn normal_stability_exact() {
        for kind in [st24(), ManifoldKind::grassmann(2, 4).unwrap()] {
            let rep = probe_normal_stability(kind, 500, 7).unwrap();
            assert_eq!(rep.violations, 0, "{kind:?} worst {}", rep.worst_ratio);
        }
    }

    #[test]
    fn descent_inequality_fit() {
        let fam = ProblemFamily::QpCase1;
        let (p, _) = generate_instance(fam, InstanceParams::standard(fam), 8).unwrap();
        let rep = probe_descent_inequality(&p, 0.5, 1000, 8).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.constant("Gamma1").unwrap().is_finite() && rep.constant("Gamma2").unwrap().is_finite());
    }

    #[test]
    fn bad_delta_rejected() {
        assert!(probe_first_order_bound(st24(), 0.0, 10, 0).is_err());
        assert!(probe_first_order_bound(st24(), 1.5, 10, 0).is_err());
    }

    #[test]
    fn deterministic_reports() {
        let a = probe_all(ManifoldKind::grassmann(1, 3).unwrap(), 100, 9).unwrap();
        let b = probe_all(ManifoldKind::grassmann(1, 3).unwrap(), 100, 9).unwrap();
        assert_eq!(a, b);
    }
}
