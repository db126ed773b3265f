//! Search directions H = L·grad·R + N and their tangent/normal split.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TgpError};
use crate::manifold::{
    grassmann_frame, is_tangent, orthogonal_complement, project_normal, project_tangent, random_tangent,
    riemannian_gradient, ManifoldKind, ManifoldPoint,
};
use crate::matrix::{derive_seed, eig_range, rng_from_seed, sym_with_spectrum_from, Matrix};

/// Scaling matrices L(X), R(X) applied to the Riemannian gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scaling {
    /// L = I + μ X E X^T + X⊥ F X⊥^T, R = E. F is ignored when r = n.
    Stiefel { e: Matrix, f: Matrix, mu: f64 },
    /// L = R = Q diag(G1, G2) Q^T with X = Q diag(I_p, 0) Q^T.
    Grassmann { g1: Matrix, g2: Matrix },
    /// Fixed matrices independent of X. Only useful for testing (A1).
    Explicit { left: Matrix, right: Matrix },
}

impl Scaling {
    /// E = I_r, F = 0, μ = 4ρ − 1: the scaling that turns grad into D_ρ.
    pub fn d_rho(kind: ManifoldKind, rho: f64) -> Result<Self> {
        Scaling::stiefel_with(kind, rho, 0.0, false)
    }

    /// E = I_r, μ = 4ρ − 1 and F = f_scale·I (or f_scale times the all-ones
    /// matrix when `ones` is set).
    pub fn stiefel_with(kind: ManifoldKind, rho: f64, f_scale: f64, ones: bool) -> Result<Self> {
        let ManifoldKind::Stiefel { n, r } = kind else {
            return Err(TgpError::UnsupportedSpec(format!("Stiefel scaling on {kind:?}")));
        };
        let m = (n - r).max(1);
        let f = if ones { Matrix::filled(m, m, f_scale) } else { Matrix::identity(m).scale(f_scale) };
        Ok(Scaling::Stiefel { e: Matrix::identity(r), f, mu: 4.0 * rho - 1.0 })
    }

    /// L(X) and R(X).
    pub fn matrices(&self, x: &ManifoldPoint) -> Result<(Matrix, Matrix)> {
        let xv = x.value();
        match (self, x.kind()) {
            (Scaling::Stiefel { e, f, mu }, ManifoldKind::Stiefel { n, r }) => {
                if e.shape() != (r, r) {
                    return Err(TgpError::Dimension(format!("E must be {r}x{r}")));
                }
                let mut l = &Matrix::identity(n) + &(&(xv * e) * &xv.transpose()).scale(*mu);
                if let Some(xp) = orthogonal_complement(xv) {
                    if f.shape() != (n - r, n - r) {
                        return Err(TgpError::Dimension(format!("F must be {0}x{0}", n - r)));
                    }
                    l += &(&(&xp * f) * &xp.transpose());
                }
                Ok((l, e.clone()))
            }
            (Scaling::Grassmann { g1, g2 }, ManifoldKind::Grassmann { p, n }) => {
                if g1.shape() != (p, p) || g2.shape() != (n - p, n - p) {
                    return Err(TgpError::Dimension("Grassmann scaling blocks".into()));
                }
                let q = grassmann_frame(x)?;
                let mut block = Matrix::zeros(n, n);
                for i in 0..p {
                    for j in 0..p {
                        block[(i, j)] = g1[(i, j)];
                    }
                }
                for i in 0..n - p {
                    for j in 0..n - p {
                        block[(p + i, p + j)] = g2[(i, j)];
                    }
                }
                let l = (&(&q * &block) * &q.transpose()).sym_part();
                Ok((l.clone(), l))
            }
            (Scaling::Explicit { left, right }, kind) => {
                let (rows, cols) = kind.ambient_shape();
                if left.shape() != (rows, rows) || right.shape() != (cols, cols) {
                    return Err(TgpError::Dimension("explicit scaling shape".into()));
                }
                Ok((left.clone(), right.clone()))
            }
            (s, k) => Err(TgpError::UnsupportedSpec(format!("{s:?} on {k:?}"))),
        }
    }

    /// L·V·R.
    pub fn apply(&self, x: &ManifoldPoint, v: &Matrix) -> Result<Matrix> {
        let (l, r) = self.matrices(x)?;
        Ok(&(&l * v) * &r)
    }
}

/// How the symmetric matrix S_k in the normal shift a·X·S_k is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SPolicy {
    Identity,
    /// A fresh matrix every iteration.
    Uniform {
        low: f64,
        high: f64,
    },
    /// One matrix per seed, reused for every iteration.
    FixedPerInstance {
        low: f64,
        high: f64,
    },
}

impl Default for SPolicy {
    fn default() -> Self {
        SPolicy::FixedPerInstance { low: 0.5, high: 1.5 }
    }
}

/// Symmetric dim×dim matrix S_k for iteration `k`.
pub fn sample_s(policy: SPolicy, dim: usize, seed: u64, k: u64) -> Result<Matrix> {
    let draw = |low: f64, high: f64, s: u64| {
        if !(low <= high) {
            return Err(TgpError::InvalidParameter(format!("S spectrum [{low}, {high}]")));
        }
        Ok(sym_with_spectrum_from(&mut rng_from_seed(s), dim, low, high))
    };
    match policy {
        SPolicy::Identity => Ok(Matrix::identity(dim)),
        SPolicy::Uniform { low, high } => draw(low, high, derive_seed(derive_seed(seed, 0x5), k)),
        SPolicy::FixedPerInstance { low, high } => draw(low, high, derive_seed(seed, 0x5)),
    }
}

/// Recipe for the search direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DirectionSpec {
    /// H = grad f.
    Rgd,
    /// H = ∇f.
    Egp,
    /// H = ∇f + (1 − s)x on the sphere.
    ShiftedPm { s: f64 },
    /// H = D_ρ = ∇f − X(2ρ∇f^T X + (1 − 2ρ)X^T∇f).
    DRho { rho: f64 },
    /// H = grad f + a·X·S.
    TgpR { a: f64 },
    /// H = ∇f + a·X·S.
    TgpE { a: f64 },
    /// H = D_ρ + P_N(∇f) + a·X·S.
    TgpDe { rho: f64, a: f64 },
    /// H = L·grad f·R + P_N(∇f) + a·X·S with E = I, μ = 4ρ − 1, F = f_scale·I.
    TgpDf { rho: f64, f_scale: f64, a: f64 },
    /// H = L·grad f with E = I, μ = 0 and F = f_scale times the all-ones matrix.
    TgpAEigen { f_scale: f64 },
    /// H = L·grad f·R (+ P_N(∇f) if requested) + a·shift.
    General { scaling: Scaling, include_euclidean_normal: bool, a: f64 },
}

impl DirectionSpec {
    pub fn validate(&self, kind: ManifoldKind) -> Result<()> {
        let stiefel_only = |what: &str| match kind {
            ManifoldKind::Stiefel { .. } => Ok(()),
            k => Err(TgpError::UnsupportedSpec(format!("{what} on {k:?}"))),
        };
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(TgpError::InvalidParameter(format!("{what} = {v}")))
            }
        };
        let positive_rho = |rho: f64| {
            if rho > 0.0 && rho.is_finite() {
                Ok(())
            } else {
                Err(TgpError::InvalidParameter(format!("rho = {rho} must be positive")))
            }
        };
        match *self {
            DirectionSpec::Rgd | DirectionSpec::Egp => Ok(()),
            DirectionSpec::ShiftedPm { s } => match kind {
                ManifoldKind::Stiefel { r: 1, .. } => finite(s, "s"),
                k => Err(TgpError::UnsupportedSpec(format!("shifted power method on {k:?}"))),
            },
            DirectionSpec::DRho { rho } => {
                stiefel_only("D_rho")?;
                positive_rho(rho)
            }
            DirectionSpec::TgpR { a } | DirectionSpec::TgpE { a } => finite(a, "a"),
            DirectionSpec::TgpDe { rho, a } => {
                stiefel_only("D_rho")?;
                positive_rho(rho)?;
                finite(a, "a")
            }
            DirectionSpec::TgpDf { rho, f_scale, a } => {
                stiefel_only("Stiefel scaling")?;
                positive_rho(rho)?;
                finite(f_scale, "F")?;
                finite(a, "a")
            }
            DirectionSpec::TgpAEigen { f_scale } => {
                stiefel_only("Stiefel scaling")?;
                finite(f_scale, "F")
            }
            DirectionSpec::General { a, .. } => finite(a, "a"),
        }
    }

    /// Whether the direction uses the normal shift a·X·S.
    pub fn shift_weight(&self) -> f64 {
        match *self {
            DirectionSpec::TgpR { a }
            | DirectionSpec::TgpE { a }
            | DirectionSpec::TgpDe { a, .. }
            | DirectionSpec::TgpDf { a, .. }
            | DirectionSpec::General { a, .. } => a,
            _ => 0.0,
        }
    }
}

/// A search direction with its tangent and normal components at `base`.
#[derive(Debug, Clone)]
pub struct Direction {
    pub full: Matrix,
    pub tangent: Matrix,
    pub normal: Matrix,
}

impl Direction {
    fn from_full(x: &ManifoldPoint, full: Matrix) -> Result<Self> {
        let tangent = project_tangent(x, &full)?;
        let normal = &full - &tangent;
        Ok(Direction { full, tangent, normal })
    }
}

/// The normal shift X·S on Stiefel (S is r×r), X·S·X on Grassmann (S is n×n).
/// Both are normal vectors for symmetric S.
pub fn normal_shift(x: &ManifoldPoint, s: &Matrix) -> Result<Matrix> {
    let d = x.kind().shift_dim();
    if s.shape() != (d, d) {
        return Err(TgpError::Dimension(format!("S must be {d}x{d}")));
    }
    let xv = x.value();
    Ok(match x.kind() {
        ManifoldKind::Stiefel { .. } => xv * s,
        ManifoldKind::Grassmann { .. } => (&(xv * s) * xv).sym_part(),
    })
}

/// D_ρ(X) by its defining expression.
pub fn d_rho(x: &ManifoldPoint, egrad: &Matrix, rho: f64) -> Matrix {
    let xv = x.value();
    let inner = &egrad.tr_mul(xv).scale(2.0 * rho) + &xv.tr_mul(egrad).scale(1.0 - 2.0 * rho);
    egrad - &(xv * &inner)
}

/// Builds H at `x`. `s` is the symmetric matrix of the normal shift and may be
/// omitted when the shift weight is zero.
pub fn build_direction(
    spec: &DirectionSpec,
    x: &ManifoldPoint,
    egrad: &Matrix,
    s: Option<&Matrix>,
) -> Result<Direction> {
    let kind = x.kind();
    spec.validate(kind)?;
    if egrad.shape() != kind.ambient_shape() {
        return Err(TgpError::Dimension("gradient shape".into()));
    }
    let a = spec.shift_weight();
    let add_shift = |mut h: Matrix| -> Result<Matrix> {
        if a != 0.0 {
            let identity;
            let s = match s {
                Some(s) => s,
                None => {
                    identity = Matrix::identity(kind.shift_dim());
                    &identity
                }
            };
            h += &normal_shift(x, s)?.scale(a);
        }
        Ok(h)
    };
    let grad = || riemannian_gradient(x, egrad);
    let full = match spec {
        DirectionSpec::Rgd => grad()?,
        DirectionSpec::Egp => egrad.clone(),
        DirectionSpec::ShiftedPm { s } => egrad + &x.value().scale(1.0 - s),
        DirectionSpec::DRho { rho } => d_rho(x, egrad, *rho),
        DirectionSpec::TgpR { .. } => add_shift(grad()?)?,
        DirectionSpec::TgpE { .. } => add_shift(egrad.clone())?,
        DirectionSpec::TgpDe { rho, .. } => add_shift(&d_rho(x, egrad, *rho) + &project_normal(x, egrad)?)?,
        DirectionSpec::TgpDf { rho, f_scale, .. } => {
            let scaling = Scaling::stiefel_with(kind, *rho, *f_scale, false)?;
            add_shift(&scaling.apply(x, &grad()?)? + &project_normal(x, egrad)?)?
        }
        DirectionSpec::TgpAEigen { f_scale } => {
            let scaling = Scaling::stiefel_with(kind, 0.25, *f_scale, true)?;
            scaling.apply(x, &grad()?)?
        }
        DirectionSpec::General { scaling, include_euclidean_normal, .. } => {
            let mut h = scaling.apply(x, &grad()?)?;
            if *include_euclidean_normal {
                h += &project_normal(x, egrad)?;
            }
            add_shift(h)?
        }
    };
    if !full.is_finite() {
        return Err(TgpError::NonFinite("search direction".into()));
    }
    Direction::from_full(x, full)
}

/// Checks on `trials` random tangent vectors that L·V·R stays tangent.
pub fn check_assumption_a1(scaling: &Scaling, x: &ManifoldPoint, trials: usize, seed: u64) -> Result<bool> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let v = random_tangent(x, &mut rng);
        let lvr = scaling.apply(x, &v)?;
        if !is_tangent(x, &lvr, 1e-10) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Eigenvalue bounds (υ, ϖ) for a scaling family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2Bounds {
    pub upsilon: f64,
    pub varpi: f64,
    /// υ > 0, so the sandwich inequalities hold with these constants.
    pub certified: bool,
}

/// (υ, ϖ) from the spectra of the scaling blocks.
pub fn assumption_a2_bounds(scaling: &Scaling, x: &ManifoldPoint) -> Result<A2Bounds> {
    let (upsilon, varpi) = match (scaling, x.kind()) {
        (Scaling::Stiefel { e, f, mu }, ManifoldKind::Stiefel { n, r }) => {
            let (e_lo, e_hi) = eig_range(e)?;
            let (mue_lo, mue_hi) = if *mu >= 0.0 { (mu * e_lo, mu * e_hi) } else { (mu * e_hi, mu * e_lo) };
            let (mut lo, mut hi) = (mue_lo, mue_hi);
            if n > r {
                let (f_lo, f_hi) = eig_range(f)?;
                lo = lo.min(f_lo);
                hi = hi.max(f_hi);
            }
            ((1.0 + lo) * e_lo, (1.0 + hi) * e_hi)
        }
        (Scaling::Grassmann { g1, g2 }, ManifoldKind::Grassmann { .. }) => {
            let (a_lo, a_hi) = eig_range(g1)?;
            let (b_lo, b_hi) = eig_range(g2)?;
            let lo = a_lo.min(b_lo);
            let hi = a_hi.max(b_hi);
            let lo_sq = if lo > 0.0 { lo * lo } else { -(lo * lo) };
            (lo_sq, hi * hi)
        }
        (s, k) => return Err(TgpError::UnsupportedSpec(format!("no eigenvalue certificate for {s:?} on {k:?}"))),
    };
    Ok(A2Bounds { upsilon, varpi, certified: upsilon > 0.0 })
}
