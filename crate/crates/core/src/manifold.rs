//! Stiefel and Grassmann manifolds: feasibility, tangent and normal
//! projections, Riemannian gradients and the metric projection.
//!
//! Stiefel points are n×r matrices with orthonormal columns. Grassmann points
//! are n×n symmetric idempotent matrices of rank p.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TgpError};
use crate::matrix::{complete_basis, gaussian_from, orthonormal_from, polar, sym_eig, Matrix};

/// Tolerance for manifold membership.
pub const FEAS_TOL: f64 = 1e-8;
/// Minimal gap λ_p − λ_{p+1} for the Grassmann projection to count as unique.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldKind {
    Stiefel { n: usize, r: usize },
    Grassmann { p: usize, n: usize },
}

impl ManifoldKind {
    pub fn stiefel(n: usize, r: usize) -> Result<Self> {
        let k = ManifoldKind::Stiefel { n, r };
        k.validate()?;
        Ok(k)
    }

    pub fn grassmann(p: usize, n: usize) -> Result<Self> {
        let k = ManifoldKind::Grassmann { p, n };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldKind::Stiefel { n, r } if r >= 1 && r <= n => Ok(()),
            ManifoldKind::Grassmann { p, n } if p >= 1 && p < n => Ok(()),
            k => Err(TgpError::InvalidParameter(format!("{k:?}"))),
        }
    }

    /// Shape of points and ambient vectors.
    pub fn ambient_shape(&self) -> (usize, usize) {
        match *self {
            ManifoldKind::Stiefel { n, r } => (n, r),
            ManifoldKind::Grassmann { n, .. } => (n, n),
        }
    }

    /// Size of the symmetric matrix S parametrizing the normal shift.
    pub fn shift_dim(&self) -> usize {
        match *self {
            ManifoldKind::Stiefel { r, .. } => r,
            ManifoldKind::Grassmann { n, .. } => n,
        }
    }

    pub fn reach(&self) -> f64 {
        reach(*self)
    }

    fn check_shape(&self, m: &Matrix) -> Result<()> {
        if m.shape() != self.ambient_shape() {
            return Err(TgpError::Dimension(format!(
                "{:?} expects {:?}, got {:?}",
                self,
                self.ambient_shape(),
                m.shape()
            )));
        }
        Ok(())
    }
}

/// Radius of the tube around the manifold on which the metric projection is
/// unique: 1 on Stiefel, 1/√2 on Grassmann.
pub fn reach(kind: ManifoldKind) -> f64 {
    match kind {
        ManifoldKind::Stiefel { .. } => 1.0,
        ManifoldKind::Grassmann { .. } => std::f64::consts::FRAC_1_SQRT_2,
    }
}

/// Distance of `m` from satisfying the defining equations of `kind`.
pub fn feasibility_error(kind: ManifoldKind, m: &Matrix) -> f64 {
    if m.shape() != kind.ambient_shape() {
        return f64::INFINITY;
    }
    match kind {
        ManifoldKind::Stiefel { r, .. } => (&m.tr_mul(m) - &Matrix::identity(r)).norm(),
        ManifoldKind::Grassmann { p, .. } => {
            let idem = (&(m * m) - m).norm();
            let rank = (m.trace() - p as f64).abs();
            idem.max(m.asymmetry()).max(rank)
        }
    }
}

/// A matrix known to lie on its manifold within `FEAS_TOL`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPoint {
    kind: ManifoldKind,
    value: Matrix,
}

impl ManifoldPoint {
    pub fn new(kind: ManifoldKind, value: Matrix) -> Result<Self> {
        kind.validate()?;
        kind.check_shape(&value)?;
        let err = feasibility_error(kind, &value);
        if !(err <= FEAS_TOL) {
            return Err(TgpError::Infeasible(format!("{kind:?}: defect {err:.3e}")));
        }
        Ok(ManifoldPoint { kind, value })
    }

    pub(crate) fn new_unchecked(kind: ManifoldKind, value: Matrix) -> Self {
        ManifoldPoint { kind, value }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn value(&self) -> &Matrix {
        &self.value
    }

    pub fn into_value(self) -> Matrix {
        self.value
    }
}

/// Orthogonal projection onto the tangent space at `x`.
pub fn project_tangent(x: &ManifoldPoint, y: &Matrix) -> Result<Matrix> {
    x.kind.check_shape(y)?;
    let xv = &x.value;
    Ok(match x.kind {
        ManifoldKind::Stiefel { .. } => y - &(xv * &xv.tr_mul(y).sym_part()),
        ManifoldKind::Grassmann { n, .. } => {
            let i_minus_x = &Matrix::identity(n) - xv;
            (&(xv * &y.sym_part()) * &i_minus_x).sym_part().scale(2.0)
        }
    })
}

/// Residual `y − project_tangent(x, y)`.
pub fn project_normal(x: &ManifoldPoint, y: &Matrix) -> Result<Matrix> {
    Ok(y - &project_tangent(x, y)?)
}

/// Tangent projection of the Euclidean gradient.
pub fn riemannian_gradient(x: &ManifoldPoint, egrad: &Matrix) -> Result<Matrix> {
    project_tangent(x, egrad)
}

/// Whether `v` lies in the tangent space at `x`, up to `tol·max(1, ‖v‖)`.
pub fn is_tangent(x: &ManifoldPoint, v: &Matrix, tol: f64) -> bool {
    if v.shape() != x.kind.ambient_shape() {
        return false;
    }
    let scale = tol * v.norm().max(1.0);
    let xv = &x.value;
    match x.kind {
        ManifoldKind::Stiefel { .. } => xv.tr_mul(v).sym_part().norm() <= scale,
        ManifoldKind::Grassmann { .. } => v.asymmetry() <= scale && (&(&(v * xv) + &(xv * v)) - v).norm() <= scale,
    }
}

/// Whether `w` lies in the normal space at `x`.
pub fn is_normal(x: &ManifoldPoint, w: &Matrix, tol: f64) -> bool {
    if w.shape() != x.kind.ambient_shape() {
        return false;
    }
    let scale = tol * w.norm().max(1.0);
    match x.kind {
        ManifoldKind::Stiefel { .. } => {
            let s = x.value.tr_mul(w);
            s.asymmetry() <= scale && (&(&x.value * &s) - w).norm() <= scale
        }
        ManifoldKind::Grassmann { .. } => project_tangent(x, w).is_ok_and(|t| t.norm() <= scale),
    }
}

/// Output of the metric projection.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub point: ManifoldPoint,
    /// False when several nearest points exist; `point` is then one of them.
    pub unique: bool,
}

/// Nearest point of the manifold in Frobenius distance.
pub fn project_to_manifold(kind: ManifoldKind, y: &Matrix) -> Result<ProjectionResult> {
    kind.validate()?;
    kind.check_shape(y)?;
    if !y.is_finite() {
        return Err(TgpError::NonFinite("projection input".into()));
    }
    match kind {
        ManifoldKind::Stiefel { .. } => {
            let pf = polar(y)?;
            Ok(ProjectionResult { point: ManifoldPoint::new_unchecked(kind, pf.orthogonal), unique: pf.unique })
        }
        ManifoldKind::Grassmann { p, .. } => {
            let eig = sym_eig(&y.sym_part())?;
            let top = eig.eigenvectors.columns(0, p);
            let x = (&top * &top.transpose()).sym_part();
            let unique = eig.eigenvalues[p - 1] - eig.eigenvalues[p] > TIE_TOL;
            Ok(ProjectionResult { point: ManifoldPoint::new_unchecked(kind, x), unique })
        }
    }
}

/// Orthonormal basis of the orthogonal complement of the column space of a
/// Stiefel point, built deterministically from the standard basis. Returns
/// `None` when r = n.
pub fn orthogonal_complement(x: &Matrix) -> Option<Matrix> {
    let (n, r) = x.shape();
    if r >= n {
        return None;
    }
    let cols: Vec<Vec<f64>> = (0..r).map(|j| x.column(j)).collect();
    let extra = complete_basis(&cols, n, n - r);
    let mut m = Matrix::zeros(n, n - r);
    for (j, v) in extra.iter().enumerate() {
        m.set_column(j, v);
    }
    Some(m)
}

/// Orthogonal Q with X = Q diag(I_p, 0) Q^T for a Grassmann point.
pub fn grassmann_frame(x: &ManifoldPoint) -> Result<Matrix> {
    match x.kind {
        ManifoldKind::Grassmann { .. } => Ok(sym_eig(&x.value)?.eigenvectors),
        k => Err(TgpError::InvalidParameter(format!("grassmann_frame on {k:?}"))),
    }
}

/// Haar-like random point.
pub fn random_point<R: Rng + ?Sized>(kind: ManifoldKind, rng: &mut R) -> ManifoldPoint {
    match kind {
        ManifoldKind::Stiefel { n, r } => ManifoldPoint::new_unchecked(kind, orthonormal_from(rng, n, r)),
        ManifoldKind::Grassmann { p, n } => {
            let u = orthonormal_from(rng, n, p);
            ManifoldPoint::new_unchecked(kind, (&u * &u.transpose()).sym_part())
        }
    }
}

/// Gaussian ambient vector projected onto the tangent space.
pub fn random_tangent<R: Rng + ?Sized>(x: &ManifoldPoint, rng: &mut R) -> Matrix {
    let (rows, cols) = x.kind.ambient_shape();
    project_tangent(x, &gaussian_from(rng, rows, cols)).expect("shape")
}

/// Gaussian ambient vector projected onto the normal space. On Grassmann the
/// skew-symmetric normal directions are left out, so the result is symmetric.
pub fn random_normal<R: Rng + ?Sized>(x: &ManifoldPoint, rng: &mut R) -> Matrix {
    let (rows, cols) = x.kind.ambient_shape();
    let g = gaussian_from(rng, rows, cols);
    match x.kind {
        ManifoldKind::Stiefel { .. } => project_normal(x, &g).expect("shape"),
        ManifoldKind::Grassmann { .. } => project_normal(x, &g.sym_part()).expect("shape"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{rand_gaussian, rand_orthonormal, rng_from_seed};
    use proptest::prelude::*;

    fn st(n: usize, r: usize, seed: u64) -> ManifoldPoint {
        ManifoldPoint::new(ManifoldKind::Stiefel { n, r }, rand_orthonormal(n, r, seed).unwrap()).unwrap()
    }

    fn gr(p: usize, n: usize, seed: u64) -> ManifoldPoint {
        random_point(ManifoldKind::Grassmann { p, n }, &mut rng_from_seed(seed))
    }

    #[test]
    fn kinds_reject_trivial_cases() {
        assert!(ManifoldKind::stiefel(3, 4).is_err());
        assert!(ManifoldKind::stiefel(3, 0).is_err());
        assert!(ManifoldKind::grassmann(0, 3).is_err());
        assert!(ManifoldKind::grassmann(3, 3).is_err());
        assert!(ManifoldKind::grassmann(1, 3).is_ok());
    }

    #[test]
    fn reach_values() {
        assert_eq!(reach(ManifoldKind::Stiefel { n: 5, r: 2 }), 1.0);
        assert_eq!(reach(ManifoldKind::Grassmann { p: 2, n: 5 }), 0.5f64.sqrt());
    }

    #[test]
    fn point_constructor_checks_feasibility() {
        let k = ManifoldKind::Stiefel { n: 3, r: 2 };
        assert!(ManifoldPoint::new(k, Matrix::eye(3, 2).scale(1.1)).is_err());
        assert!(ManifoldPoint::new(k, Matrix::eye(3, 3)).is_err());
        let g = ManifoldKind::Grassmann { p: 1, n: 3 };
        assert!(ManifoldPoint::new(g, Matrix::from_diag(&[1.0, 1.0, 0.0])).is_err());
        assert!(ManifoldPoint::new(g, Matrix::from_diag(&[0.0, 1.0, 0.0])).is_ok());
    }

    #[test]
    fn stiefel_normal_vectors_project_to_zero() {
        let x = st(4, 2, 1);
        let s = rand_gaussian(2, 2, 2).unwrap().sym_part();
        let w = x.value() * &s;
        assert!(project_tangent(&x, &w).unwrap().norm() < 1e-14);
        assert!((&project_normal(&x, &w).unwrap() - &w).norm() < 1e-14);
    }

    #[test]
    fn stiefel_tangent_projection_matches_basis_oracle() {
        // Least-squares projection onto an explicit basis of
        // {X A + X_perp B : A skew}.
        let x = st(3, 2, 9);
        let y = rand_gaussian(3, 2, 10).unwrap();
        let xp = orthogonal_complement(x.value()).unwrap();
        let mut basis: Vec<Matrix> = Vec::new();
        let mut a = Matrix::zeros(2, 2);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -1.0;
        basis.push(x.value() * &a);
        for j in 0..2 {
            let mut b = Matrix::zeros(1, 2);
            b[(0, j)] = 1.0;
            basis.push(&xp * &b);
        }
        // basis is orthogonal, normalize and expand
        let mut oracle = Matrix::zeros(3, 2);
        for b in &basis {
            let c = y.dot(b) / b.dot(b);
            oracle += &b.scale(c);
        }
        let ours = project_tangent(&x, &y).unwrap();
        assert!((&ours - &oracle).norm() < 1e-12);
    }

    #[test]
    fn sphere_gradient_matches_eigen_formula() {
        let kind = ManifoldKind::Stiefel { n: 3, r: 1 };
        let s = 1.0 / 3f64.sqrt();
        let x = ManifoldPoint::new(kind, Matrix::column_vector(&[s, s, s]).unwrap()).unwrap();
        let lam = [3.0, 3.0, 2.0];
        let egrad = Matrix::column_vector(&[3.0 * s, 3.0 * s, 2.0 * s]).unwrap();
        let grad = riemannian_gradient(&x, &egrad).unwrap();
        let two_f: f64 = lam.iter().map(|l| l * s * s).sum();
        assert!((two_f - 8.0 / 3.0).abs() < 1e-15);
        let expect = [1.0 / 3.0 * s, 1.0 / 3.0 * s, -2.0 / 3.0 * s];
        for i in 0..3 {
            assert!((grad[(i, 0)] - expect[i]).abs() < 1e-15);
            assert!((grad[(i, 0)] - (lam[i] - two_f) * s).abs() < 1e-15);
        }
        // finite differences of f(x / |x|) along the tangent plane
        let f = |v: &[f64]| {
            let nrm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            0.5 * v.iter().zip(&lam).map(|(t, l)| l * (t / nrm) * (t / nrm)).sum::<f64>()
        };
        let h = 1e-6;
        let base = [s, s, s];
        for i in 0..3 {
            let mut p = base;
            let mut m = base;
            p[i] += h;
            m[i] -= h;
            let fd = (f(&p) - f(&m)) / (2.0 * h);
            assert!((fd - expect[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn stiefel_projection_of_normal_shift_is_identity() {
        let x = st(4, 2, 5);
        let s = Matrix::from_rows(&[&[0.3, -0.2], &[-0.2, -0.5]]).unwrap();
        let y = x.value() + &(x.value() * &s);
        let p = project_to_manifold(x.kind(), &y).unwrap();
        assert!(p.unique);
        assert!((p.point.value() - x.value()).norm() < 1e-14);
    }

    #[test]
    fn stiefel_projection_flags_boundary_shift() {
        let x = st(4, 2, 6);
        // λ_min(S) = −1 makes X + XS rank deficient
        let s = Matrix::from_diag(&[0.5, -1.0]);
        let y = x.value() + &(x.value() * &s);
        let p = project_to_manifold(x.kind(), &y).unwrap();
        assert!(!p.unique);
        assert!(feasibility_error(x.kind(), p.point.value()) < 1e-12);
    }

    #[test]
    fn grassmann_projection_examples() {
        let g = ManifoldKind::Grassmann { p: 1, n: 3 };
        let p = project_to_manifold(g, &Matrix::from_diag(&[0.9, 0.4, 0.1])).unwrap();
        assert!(p.unique);
        assert!((p.point.value() - &Matrix::from_diag(&[1.0, 0.0, 0.0])).norm() < 1e-15);

        let g2 = ManifoldKind::Grassmann { p: 2, n: 4 };
        let q = rand_orthonormal(4, 4, 3).unwrap();
        let y = &(&q * &Matrix::from_diag(&[1.0, 0.5, 0.5, 0.0])) * &q.transpose();
        assert!(!project_to_manifold(g2, &y).unwrap().unique);
    }

    #[test]
    fn grassmann_projection_ignores_skew_part() {
        let g = ManifoldKind::Grassmann { p: 2, n: 5 };
        let y = rand_gaussian(5, 5, 8).unwrap();
        let a = project_to_manifold(g, &y).unwrap().point;
        let b = project_to_manifold(g, &y.sym_part()).unwrap().point;
        let c = project_to_manifold(g, &y.transpose()).unwrap().point;
        assert!((a.value() - b.value()).norm() < 1e-12);
        assert!((a.value() - c.value()).norm() < 1e-12);
    }

    #[test]
    fn grassmann_point_is_a_normal_vector() {
        let x = gr(2, 5, 4);
        assert!(project_tangent(&x, x.value()).unwrap().norm() < 1e-13);
        assert!(is_normal(&x, x.value(), 1e-12));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let x = st(3, 2, 1);
        assert!(project_tangent(&x, &Matrix::zeros(2, 3)).is_err());
        assert!(project_to_manifold(x.kind(), &Matrix::zeros(3, 3)).is_err());
    }

    fn arb_kind() -> impl Strategy<Value = ManifoldKind> {
        prop_oneof![
            (1usize..6, 0usize..4).prop_map(|(r, extra)| ManifoldKind::Stiefel { n: r + extra, r }),
            (1usize..4, 1usize..4).prop_map(|(p, extra)| ManifoldKind::Grassmann { p, n: p + extra }),
        ]
    }

    proptest! {
        #[test]
        fn tangent_and_normal_split(kind in arb_kind(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let x = random_point(kind, &mut rng);
            let (rows, cols) = kind.ambient_shape();
            let y = gaussian_from(&mut rng, rows, cols);
            let t = project_tangent(&x, &y).unwrap();
            let w = project_normal(&x, &y).unwrap();
            prop_assert!(is_tangent(&x, &t, 1e-10));
            prop_assert!(t.dot(&w).abs() < 1e-10 * y.norm() * y.norm());
            prop_assert!((&(&t + &w) - &y).max_abs() <= 1e-15 * (1.0 + y.max_abs()));
            let tt = project_tangent(&x, &t).unwrap();
            prop_assert!((&tt - &t).norm() < 1e-12 * (1.0 + t.norm()));
            if matches!(kind, ManifoldKind::Stiefel { .. }) {
                prop_assert!(is_normal(&x, &w, 1e-10));
            } else {
                prop_assert!(project_tangent(&x, &w).unwrap().norm() < 1e-10 * (1.0 + w.norm()));
            }
        }

        #[test]
        fn projection_is_idempotent(kind in arb_kind(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let (rows, cols) = kind.ambient_shape();
            let y = gaussian_from(&mut rng, rows, cols);
            let p = project_to_manifold(kind, &y).unwrap().point;
            prop_assert!(feasibility_error(kind, p.value()) < 1e-10);
            let q = project_to_manifold(kind, p.value()).unwrap().point;
            prop_assert!((q.value() - p.value()).norm() < 1e-10);
        }

        #[test]
        fn projection_differential_is_tangent_projection(kind in arb_kind(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let x = random_point(kind, &mut rng);
            let (rows, cols) = kind.ambient_shape();
            let u = gaussian_from(&mut rng, rows, cols);
            let u = u.scale(1.0 / u.norm());
            let expect = project_tangent(&x, &u).unwrap();
            let mut errs = Vec::new();
            for h in [1e-2, 5e-3] {
                let plus = project_to_manifold(kind, &(x.value() + &u.scale(h))).unwrap().point;
                let minus = project_to_manifold(kind, &(x.value() - &u.scale(h))).unwrap().point;
                let fd = (plus.value() - minus.value()).scale(0.5 / h);
                errs.push((&fd - &expect).norm());
            }
            // O(h^2): halving h cuts the error roughly by four
            prop_assert!(errs[0] < 1e-2 * 10.0);
            prop_assert!(errs[1] <= errs[0] * 0.3 + 1e-9);
        }

        #[test]
        fn normal_shift_inside_reach_is_fixed(kind in arb_kind(), seed in any::<u64>(), frac in 0.0f64..0.999) {
            let mut rng = rng_from_seed(seed);
            let x = random_point(kind, &mut rng);
            let w = random_normal(&x, &mut rng);
            let w = w.scale(frac * kind.reach() / w.norm());
            let p = project_to_manifold(kind, &(x.value() + &w)).unwrap();
            prop_assert!(p.unique);
            prop_assert!((p.point.value() - x.value()).norm() < 1e-10);
        }

        #[test]
        fn grassmann_symmetrization_does_not_increase_distance(p in 1usize..3, extra in 1usize..3, seed in any::<u64>()) {
            let kind = ManifoldKind::Grassmann { p, n: p + extra };
            let n = p + extra;
            let y = rand_gaussian(n, n, seed).unwrap();
            let d_y = (&y - project_to_manifold(kind, &y).unwrap().point.value()).norm();
            let s = y.sym_part();
            let d_s = (&s - project_to_manifold(kind, &s).unwrap().point.value()).norm();
            prop_assert!(d_y >= d_s - 1e-12);
        }
    }
}
