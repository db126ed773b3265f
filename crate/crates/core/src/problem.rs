//! The four benchmark objectives and their random instance generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TgpError};
use crate::manifold::{project_to_manifold, ManifoldKind, ManifoldPoint};
use crate::matrix::{derive_seed, gaussian_from, orthonormal_from, rng_from_seed, Matrix};

/// A smooth cost on a manifold, evaluated on raw ambient matrices so that
/// finite differences and trial points off the manifold are possible.
pub trait Objective: Sync {
    fn manifold(&self) -> ManifoldKind;
    fn cost_at(&self, x: &Matrix) -> f64;
    fn egrad_at(&self, x: &Matrix) -> Matrix;
    fn known_fstar(&self) -> Option<f64> {
        None
    }
}

/// Fully symmetric third-order tensor, stored densely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensor3 {
    n: usize,
    data: Vec<f64>,
}

impl SymTensor3 {
    /// Accepts a dense n×n×n array (index (i, j, k) at i·n² + j·n + k) and
    /// checks permutation symmetry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n * n {
            return Err(TgpError::Dimension(format!("tensor of size {} for n = {n}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TgpError::NonFinite("tensor entry".into()));
        }
        let t = SymTensor3 { n, data };
        let scale = t.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if t.asymmetry() > 1e-12 * scale {
            return Err(TgpError::InvalidParameter("tensor is not symmetric".into()));
        }
        Ok(t)
    }

    /// Average of the six index permutations of a dense array.
    pub fn symmetrize(n: usize, raw: &[f64]) -> Result<Self> {
        if n == 0 || raw.len() != n * n * n {
            return Err(TgpError::Dimension(format!("tensor of size {} for n = {n}", raw.len())));
        }
        let idx = |i: usize, j: usize, k: usize| i * n * n + j * n + k;
        let mut data = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data[idx(i, j, k)] = (raw[idx(i, j, k)]
                        + raw[idx(i, k, j)]
                        + raw[idx(j, i, k)]
                        + raw[idx(j, k, i)]
                        + raw[idx(k, i, j)]
                        + raw[idx(k, j, i)])
                        / 6.0;
                }
            }
        }
        SymTensor3::new(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[i * self.n * self.n + j * self.n + k]
    }

    fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    for w in
                        [self.get(i, k, j), self.get(j, i, k), self.get(j, k, i), self.get(k, i, j), self.get(k, j, i)]
                    {
                        worst = worst.max((v - w).abs());
                    }
                }
            }
        }
        worst
    }

    /// Mode-1 product with `m^T`: result(a, j, k) = Σ_i m(i, a)·T(i, j, k).
    /// Returned as a dense (cols × n × n) array since symmetry is lost.
    fn mode_product(
        data: &[f64],
        dims: (usize, usize, usize),
        m: &Matrix,
        mode: usize,
    ) -> (Vec<f64>, (usize, usize, usize)) {
        let (d0, d1, d2) = dims;
        let c = m.cols();
        let at = |i: usize, j: usize, k: usize| data[i * d1 * d2 + j * d2 + k];
        match mode {
            0 => {
                let mut out = vec![0.0; c * d1 * d2];
                for a in 0..c {
                    for i in 0..d0 {
                        let w = m[(i, a)];
                        for j in 0..d1 {
                            for k in 0..d2 {
                                out[a * d1 * d2 + j * d2 + k] += w * at(i, j, k);
                            }
                        }
                    }
                }
                (out, (c, d1, d2))
            }
            1 => {
                let mut out = vec![0.0; d0 * c * d2];
                for i in 0..d0 {
                    for a in 0..c {
                        for j in 0..d1 {
                            let w = m[(j, a)];
                            for k in 0..d2 {
                                out[i * c * d2 + a * d2 + k] += w * at(i, j, k);
                            }
                        }
                    }
                }
                (out, (d0, c, d2))
            }
            _ => {
                let mut out = vec![0.0; d0 * d1 * c];
                for i in 0..d0 {
                    for j in 0..d1 {
                        for a in 0..c {
                            let mut s = 0.0;
                            for k in 0..d2 {
                                s += m[(k, a)] * at(i, j, k);
                            }
                            out[i * d1 * c + j * c + a] = s;
                        }
                    }
                }
                (out, (d0, d1, c))
            }
        }
    }

    /// Diagonal of T ×₁ X^T ×₂ X^T ×₃ X^T.
    pub fn core_diagonal(&self, x: &Matrix) -> Vec<f64> {
        let n = self.n;
        let (t1, d1) = Self::mode_product(&self.data, (n, n, n), x, 0);
        let (t2, d2) = Self::mode_product(&t1, d1, x, 1);
        let (t3, d3) = Self::mode_product(&t2, d2, x, 2);
        let r = x.cols();
        (0..r).map(|a| t3[a * d3.1 * d3.2 + a * d3.2 + a]).collect()
    }

    /// Vector with entries Σ_jk T(i, j, k) v_j v_k.
    pub fn contract_twice(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += self.get(i, j, k) * v[j] * v[k];
                    }
                }
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProblemKind {
    /// ½ x^T A x on the unit sphere.
    Eigenvalue { a: Matrix },
    /// ½ tr((X − X*)^T A (X − X*)).
    QpInhomo { a: Matrix, xstar: Matrix },
    /// −Σ_ℓ ‖diag(X^T A_ℓ X)‖².
    JointMatrixDiag { mats: Vec<Matrix> },
    /// −Σ_ℓ ‖diag(T_ℓ ×₁ X^T ×₂ X^T ×₃ X^T)‖².
    JointTensorDiag { tensors: Vec<SymTensor3> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub manifold: ManifoldKind,
    pub known_fstar: Option<f64>,
}

impl ProblemInstance {
    pub fn eigenvalue(a: Matrix) -> Result<Self> {
        check_symmetric(&a, "A")?;
        let manifold = ManifoldKind::stiefel(a.rows(), 1)?;
        Ok(ProblemInstance { kind: ProblemKind::Eigenvalue { a }, manifold, known_fstar: None })
    }

    pub fn qp_inhomo(a: Matrix, xstar: Matrix) -> Result<Self> {
        check_symmetric(&a, "A")?;
        let manifold = ManifoldKind::stiefel(xstar.rows(), xstar.cols())?;
        if a.rows() != xstar.rows() {
            return Err(TgpError::Dimension("A and X* disagree".into()));
        }
        ManifoldPoint::new(manifold, xstar.clone())?;
        Ok(ProblemInstance { kind: ProblemKind::QpInhomo { a, xstar }, manifold, known_fstar: Some(0.0) })
    }

    pub fn joint_matrix_diag(mats: Vec<Matrix>, r: usize) -> Result<Self> {
        let n = mats.first().ok_or_else(|| TgpError::InvalidParameter("no matrices".into()))?.rows();
        for m in &mats {
            check_symmetric(m, "A_l")?;
            if m.rows() != n {
                return Err(TgpError::Dimension("matrices of different size".into()));
            }
        }
        let manifold = ManifoldKind::stiefel(n, r)?;
        Ok(ProblemInstance { kind: ProblemKind::JointMatrixDiag { mats }, manifold, known_fstar: None })
    }

    pub fn joint_tensor_diag(tensors: Vec<SymTensor3>, r: usize) -> Result<Self> {
        let n = tensors.first().ok_or_else(|| TgpError::InvalidParameter("no tensors".into()))?.dim();
        if tensors.iter().any(|t| t.dim() != n) {
            return Err(TgpError::Dimension("tensors of different size".into()));
        }
        let manifold = ManifoldKind::stiefel(n, r)?;
        Ok(ProblemInstance { kind: ProblemKind::JointTensorDiag { tensors }, manifold, known_fstar: None })
    }

    /// Cost at a point of the instance's manifold.
    pub fn cost(&self, x: &ManifoldPoint) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.cost_at(x.value()))
    }

    /// Euclidean gradient at a point of the instance's manifold.
    pub fn egrad(&self, x: &ManifoldPoint) -> Result<Matrix> {
        self.check_point(x)?;
        Ok(self.egrad_at(x.value()))
    }

    fn check_point(&self, x: &ManifoldPoint) -> Result<()> {
        if x.kind() != self.manifold {
            return Err(TgpError::Infeasible(format!("point on {:?}, problem on {:?}", x.kind(), self.manifold)));
        }
        Ok(())
    }
}

fn check_symmetric(a: &Matrix, what: &str) -> Result<()> {
    if !a.is_square() || a.asymmetry() > 1e-12 * a.max_abs().max(1.0) {
        return Err(TgpError::InvalidParameter(format!("{what} must be symmetric")));
    }
    Ok(())
}

impl Objective for ProblemInstance {
    fn manifold(&self) -> ManifoldKind {
        self.manifold
    }

    fn known_fstar(&self) -> Option<f64> {
        self.known_fstar
    }

    fn cost_at(&self, x: &Matrix) -> f64 {
        match &self.kind {
            ProblemKind::Eigenvalue { a } => 0.5 * x.dot(&(a * x)),
            ProblemKind::QpInhomo { a, xstar } => {
                let d = x - xstar;
                0.5 * d.dot(&(a * &d))
            }
            ProblemKind::JointMatrixDiag { mats } => {
                -mats.iter().map(|m| x.tr_mul(&(m * x)).diag().iter().map(|v| v * v).sum::<f64>()).sum::<f64>()
            }
            ProblemKind::JointTensorDiag { tensors } => {
                -tensors.iter().map(|t| t.core_diagonal(x).iter().map(|v| v * v).sum::<f64>()).sum::<f64>()
            }
        }
    }

    fn egrad_at(&self, x: &Matrix) -> Matrix {
        match &self.kind {
            ProblemKind::Eigenvalue { a } => a * x,
            ProblemKind::QpInhomo { a, xstar } => a * &(x - xstar),
            ProblemKind::JointMatrixDiag { mats } => {
                let mut g = Matrix::zeros(x.rows(), x.cols());
                for m in mats {
                    let mx = m * x;
                    let d = x.tr_mul(&mx).diag();
                    g -= &(&mx * &Matrix::from_diag(&d)).scale(4.0);
                }
                g
            }
            ProblemKind::JointTensorDiag { tensors } => {
                let mut g = Matrix::zeros(x.rows(), x.cols());
                for t in tensors {
                    for i in 0..x.cols() {
                        let xi = x.column(i);
                        let txx = t.contract_twice(&xi);
                        let w: f64 = txx.iter().zip(&xi).map(|(a, b)| a * b).sum();
                        for (k, v) in txx.iter().enumerate() {
                            g[(k, i)] -= 6.0 * w * v;
                        }
                    }
                }
                g
            }
        }
    }
}

/// Families of generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemFamily {
    /// Symmetric Gaussian A on the sphere.
    Eigenvalue,
    /// A = B B^T with Gaussian B.
    QpCase1,
    /// A = Q^T diag(d) Q with d uniform on [9.9, 10.1].
    QpCase2,
    /// A_ℓ = Q^T D_ℓ Q + noise·sym(Gaussian).
    JointMatrixDiag,
    /// Symmetrized Gaussian tensors.
    JointTensorDiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    pub r: usize,
    /// Number of matrices or tensors.
    pub count: usize,
    /// Scale of the symmetric perturbation for joint matrix diagonalization.
    pub noise: f64,
}

impl InstanceParams {
    /// Sizes used in the benchmark section: n = 3, r = 2, three matrices or
    /// one tensor, noise 0.02.
    pub fn standard(family: ProblemFamily) -> Self {
        match family {
            ProblemFamily::Eigenvalue => InstanceParams { n: 3, r: 1, count: 1, noise: 0.0 },
            ProblemFamily::QpCase1 | ProblemFamily::QpCase2 => InstanceParams { n: 3, r: 2, count: 1, noise: 0.0 },
            ProblemFamily::JointMatrixDiag => InstanceParams { n: 3, r: 2, count: 3, noise: 0.02 },
            ProblemFamily::JointTensorDiag => InstanceParams { n: 3, r: 2, count: 1, noise: 0.0 },
        }
    }
}

/// Draws an instance and a starting point. Instance data and X0 come from
/// separate streams derived from `seed`.
pub fn generate_instance(
    family: ProblemFamily,
    params: InstanceParams,
    seed: u64,
) -> Result<(ProblemInstance, ManifoldPoint)> {
    let InstanceParams { n, r, count, noise } = params;
    let r = if family == ProblemFamily::Eigenvalue { 1 } else { r };
    ManifoldKind::stiefel(n, r)?;
    if count == 0 || !(noise >= 0.0) {
        return Err(TgpError::InvalidParameter(format!("{params:?}")));
    }
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let instance = match family {
        ProblemFamily::Eigenvalue => ProblemInstance::eigenvalue(gaussian_from(&mut rng, n, n).sym_part())?,
        ProblemFamily::QpCase1 => {
            let b = gaussian_from(&mut rng, n, n);
            let a = (&b * &b.transpose()).sym_part();
            let xstar = orthonormal_from(&mut rng, n, r);
            ProblemInstance::qp_inhomo(a, xstar)?
        }
        ProblemFamily::QpCase2 => {
            let q = orthonormal_from(&mut rng, n, n);
            let d: Vec<f64> = (0..n).map(|_| 9.9 + 0.2 * rng.random::<f64>()).collect();
            let a = (&(&q.transpose() * &Matrix::from_diag(&d)) * &q).sym_part();
            let xstar = orthonormal_from(&mut rng, n, r);
            ProblemInstance::qp_inhomo(a, xstar)?
        }
        ProblemFamily::JointMatrixDiag => {
            let q = orthonormal_from(&mut rng, n, n);
            let mats = (0..count)
                .map(|_| {
                    let d: Vec<f64> = gaussian_from(&mut rng, n, 1).into_vec();
                    let e = gaussian_from(&mut rng, n, n).sym_part().scale(noise);
                    (&(&(&q.transpose() * &Matrix::from_diag(&d)) * &q) + &e).sym_part()
                })
                .collect();
            ProblemInstance::joint_matrix_diag(mats, r)?
        }
        ProblemFamily::JointTensorDiag => {
            let tensors = (0..count)
                .map(|_| SymTensor3::symmetrize(n, gaussian_from(&mut rng, n * n * n, 1).as_slice()))
                .collect::<Result<Vec<_>>>()?;
            ProblemInstance::joint_tensor_diag(tensors, r)?
        }
    };
    let mut rng0 = rng_from_seed(derive_seed(seed, 1));
    let x0 = project_to_manifold(instance.manifold, &gaussian_from(&mut rng0, n, r))?.point;
    Ok((instance, x0))
}
