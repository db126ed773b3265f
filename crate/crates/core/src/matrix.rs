//! Dense real matrices and the small set of factorizations the solver needs.
//!
//! Storage is row-major. Kernels are plain loops sized for n up to a few
//! hundred; there is no BLAS.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TgpError};

/// Smallest singular value, relative to the largest, below which the polar
/// factor is reported as non-unique.
pub const RANK_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = TgpError;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl From<Matrix> for RawMatrix {
    fn from(m: Matrix) -> Self {
        RawMatrix { rows: m.rows, cols: m.cols, data: m.data }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from row-major data. Rejects empty shapes and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TgpError::Dimension(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(TgpError::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(TgpError::NonFinite(format!("matrix entry {bad}")));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(TgpError::Dimension("ragged rows".into()));
        }
        Matrix::from_vec(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
    }

    /// Column vector from a slice.
    pub fn column_vector(v: &[f64]) -> Result<Self> {
        Matrix::from_vec(v.len(), 1, v.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// First `r` columns of the n×n identity.
    pub fn eye(n: usize, r: usize) -> Self {
        let mut m = Matrix::zeros(n, r);
        for i in 0..n.min(r) {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        m.data.iter_mut().for_each(|v| *v = value);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Matrix {
        assert!(start < end && end <= self.cols);
        let mut m = Matrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                m[(i, j - start)] = self[(i, j)];
            }
        }
        m
    }

    /// `[self, other]` side by side.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)];
            }
        }
        m
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dot: shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// `self^T * other` without forming the transpose.
    pub fn tr_mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "tr_mul: shape mismatch");
        let mut m = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self[(k, i)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        m
    }

    /// Symmetric part of a matrix already known to be square.
    pub(crate) fn sym_part(&self) -> Matrix {
        debug_assert!(self.is_square());
        let n = self.rows;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        m
    }

    /// Largest entrywise deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        &self + &rhs
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        &self - &rhs
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!(self.shape(), rhs.shape(), "add_assign: shape mismatch");
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
    }
}

impl SubAssign<&Matrix> for Matrix {
    fn sub_assign(&mut self, rhs: &Matrix) {
        assert_eq!(self.shape(), rhs.shape(), "sub_assign: shape mismatch");
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "mul: shape mismatch");
        let mut m = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out = &mut m.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        m
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        &self * &rhs
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;
    fn mul(self, s: f64) -> Matrix {
        self.scale(s)
    }
}

/// (M + M^T)/2.
pub fn sym(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(TgpError::Dimension(format!("sym of {}x{} matrix", m.rows, m.cols)));
    }
    Ok(m.sym_part())
}

/// (M − M^T)/2.
pub fn skew(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(TgpError::Dimension(format!("skew of {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
    }
    Ok(s)
}

/// Singular value decomposition Y = U diag(sigma) V^T of a tall matrix.
/// Columns of `u` paired with near-zero singular values may be zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi SVD for n ≥ r. Singular values are returned unsorted,
/// in the column order produced by the rotations.
pub fn svd_tall(y: &Matrix) -> Svd {
    let (n, r) = y.shape();
    assert!(n >= r, "svd_tall needs rows >= cols");
    let mut u = y.clone();
    let mut v = Matrix::identity(r);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..r {
            for q in p + 1..r {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    let (a, b) = (u[(k, p)], u[(k, q)]);
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let (a, b) = (u[(k, p)], u[(k, q)]);
                    u[(k, p)] = c * a - s * b;
                    u[(k, q)] = s * a + c * b;
                }
                for k in 0..r {
                    let (a, b) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * a - s * b;
                    v[(k, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = vec![0.0; r];
    for (j, s) in sigma.iter_mut().enumerate() {
        *s = (0..n).map(|k| u[(k, j)] * u[(k, j)]).sum::<f64>().sqrt();
        if *s > 0.0 {
            for k in 0..n {
                u[(k, j)] /= *s;
            }
        }
    }
    Svd { u, sigma, v }
}

/// Orthogonal and positive semi-definite polar factors, Y = orthogonal · psd.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub orthogonal: Matrix,
    pub psd: Matrix,
    /// False when Y is numerically rank-deficient, in which case the
    /// orthogonal factor is one of many valid choices.
    pub unique: bool,
}

/// Polar decomposition of an n×r matrix with n ≥ r.
pub fn polar(y: &Matrix) -> Result<PolarFactors> {
    let (n, r) = y.shape();
    if n < r {
        return Err(TgpError::Dimension(format!("polar of {n}x{r} matrix needs rows >= cols")));
    }
    let Svd { mut u, sigma, v } = svd_tall(y);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let deficient: Vec<bool> = sigma.iter().map(|&s| !(s > RANK_TOL * smax)).collect();
    let unique = !deficient.iter().any(|&d| d);
    if !unique {
        // Keep the well-determined left singular vectors and complete the
        // rest to an orthonormal set.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
        for j in (0..r).filter(|&j| !deficient[j]) {
            basis.push(u.column(j));
        }
        let mut fill = complete_basis(&basis, n, r - basis.len()).into_iter();
        for j in (0..r).filter(|&j| deficient[j]) {
            let col = fill.next().expect("completion size");
            u.set_column(j, &col);
        }
    }
    let orthogonal = &u * &v.transpose();
    let mut vs = v.clone();
    for j in 0..r {
        for k in 0..r {
            vs[(k, j)] *= sigma[j];
        }
    }
    let psd = (&vs * &v.transpose()).sym_part();
    Ok(PolarFactors { orthogonal, psd, unique })
}

/// Extends an orthonormal family of n-vectors by `extra` vectors using
/// Gram-Schmidt on the standard basis, taking candidates in order of
/// decreasing residual (ties to the lower index).
pub(crate) fn complete_basis(existing: &[Vec<f64>], n: usize, extra: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = existing.to_vec();
    let mut out = Vec::with_capacity(extra);
    for _ in 0..extra {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let res = orthogonalize(&e, &basis);
            let nrm = res.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b + 1e-12) {
                best = Some((nrm, res));
            }
        }
        let (nrm, mut res) = best.expect("n > 0");
        res.iter_mut().for_each(|x| *x /= nrm);
        // second pass keeps the new vector orthogonal to working precision
        let mut res = orthogonalize(&res, &basis);
        let nrm = res.iter().map(|x| x * x).sum::<f64>().sqrt();
        res.iter_mut().for_each(|x| *x /= nrm);
        basis.push(res.clone());
        out.push(res);
    }
    out
}

fn orthogonalize(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut res = v.to_vec();
    for b in basis {
        let c: f64 = res.iter().zip(b).map(|(x, y)| x * y).sum();
        res.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    res
}

/// Spectral decomposition with eigenvalues sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SymEig {
    pub fn reconstruct(&self) -> Matrix {
        let q = &self.eigenvectors;
        let mut ql = q.clone();
        for j in 0..q.cols() {
            for i in 0..q.rows() {
                ql[(i, j)] *= self.eigenvalues[j];
            }
        }
        &ql * &q.transpose()
    }
}

/// Cyclic Jacobi eigensolver. The input is symmetrized first.
pub fn sym_eig(m: &Matrix) -> Result<SymEig> {
    if !m.is_square() {
        return Err(TgpError::Dimension(format!("sym_eig of {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let mut a = m.sym_part();
    let mut v = Matrix::identity(n);
    let scale = a.norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() <= 1e-16 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                if apq.abs() <= 1e-3 * f64::EPSILON * (a[(p, p)].abs() + a[(q, q)].abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.is_finite() {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymEig { eigenvalues, eigenvectors })
}

/// Extreme eigenvalues (min, max) of a symmetric matrix.
pub fn eig_range(m: &Matrix) -> Result<(f64, f64)> {
    let e = sym_eig(m)?;
    Ok((*e.eigenvalues.last().unwrap(), e.eigenvalues[0]))
}

/// SplitMix64 finalizer applied to `master ^ stream` mixed with a golden
/// ratio increment. Used to give every (instance, algorithm) job its own
/// reproducible stream.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of i.i.d. standard normal entries drawn from `rng`.
pub fn gaussian_from<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Matrix { rows, cols, data }
}

pub fn rand_gaussian(rows: usize, cols: usize, seed: u64) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(TgpError::Dimension(format!("empty shape {rows}x{cols}")));
    }
    Ok(gaussian_from(&mut rng_from_seed(seed), rows, cols))
}

/// Orthogonal polar factor of a Gaussian matrix drawn from `rng`.
pub fn orthonormal_from<R: Rng + ?Sized>(rng: &mut R, n: usize, r: usize) -> Matrix {
    loop {
        let g = gaussian_from(rng, n, r);
        let p = polar(&g).expect("n >= r");
        if p.unique {
            return p.orthogonal;
        }
    }
}

pub fn rand_orthonormal(n: usize, r: usize, seed: u64) -> Result<Matrix> {
    if r == 0 || r > n {
        return Err(TgpError::Dimension(format!("orthonormal {n}x{r} needs 1 <= r <= n")));
    }
    Ok(orthonormal_from(&mut rng_from_seed(seed), n, r))
}

/// Q diag(λ) Q^T with λ uniform on [low, high] and Q Haar-like.
pub fn sym_with_spectrum_from<R: Rng + ?Sized>(rng: &mut R, r: usize, low: f64, high: f64) -> Matrix {
    let lambda: Vec<f64> = (0..r).map(|_| low + (high - low) * rng.random::<f64>()).collect();
    let q = orthonormal_from(rng, r, r);
    (&(&q * &Matrix::from_diag(&lambda)) * &q.transpose()).sym_part()
}

pub fn rand_sym_with_spectrum(r: usize, low: f64, high: f64, seed: u64) -> Result<Matrix> {
    if r == 0 {
        return Err(TgpError::Dimension("spectrum of size 0".into()));
    }
    if !(low <= high) || !low.is_finite() || !high.is_finite() {
        return Err(TgpError::InvalidParameter(format!("spectrum range [{low}, {high}]")));
    }
    Ok(sym_with_spectrum_from(&mut rng_from_seed(seed), r, low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orth_err(q: &Matrix) -> f64 {
        (&q.tr_mul(q) - &Matrix::identity(q.cols())).norm()
    }

    #[test]
    fn sym_and_skew_small_cases() {
        let i3 = Matrix::identity(3);
        assert_eq!(sym(&i3).unwrap(), i3);
        assert_eq!(skew(&i3).unwrap(), Matrix::zeros(3, 3));
        let m = Matrix::from_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(sym(&m).unwrap(), Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap());
        assert_eq!(skew(&m).unwrap(), Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap());
        assert!(sym(&Matrix::zeros(2, 3)).is_err());
        assert!(skew(&Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![1.0]).is_err());
        assert!(Matrix::from_vec(0, 2, vec![]).is_err());
    }

    #[test]
    fn polar_of_identity_and_scaled_frame() {
        let p = polar(&Matrix::identity(3)).unwrap();
        assert!(p.unique);
        assert!((&p.orthogonal - &Matrix::identity(3)).norm() < 1e-15);
        assert!((&p.psd - &Matrix::identity(3)).norm() < 1e-15);

        let x = rand_orthonormal(5, 2, 3).unwrap();
        let p = polar(&x.scale(2.0)).unwrap();
        assert!((&p.orthogonal - &x).norm() < 1e-14);
        assert!((&p.psd - &Matrix::identity(2).scale(2.0)).norm() < 1e-14);
    }

    #[test]
    fn polar_flags_rank_deficiency() {
        let y = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        let p = polar(&y).unwrap();
        assert!(!p.unique);
        assert!(orth_err(&p.orthogonal) < 1e-12);
        assert!((&(&p.orthogonal * &p.psd) - &y).norm() < 1e-12);

        let p = polar(&Matrix::zeros(3, 2)).unwrap();
        assert!(!p.unique);
        assert!(orth_err(&p.orthogonal) < 1e-12);
    }

    #[test]
    fn sym_eig_small_cases() {
        let e = sym_eig(&Matrix::from_diag(&[1.0, 5.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![5.0, 3.0, 1.0]);
        let expected = Matrix::from_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(e.eigenvectors, expected);

        let e = sym_eig(&Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sym_eig_reconstructs_random_6x6() {
        let m = rand_gaussian(6, 6, 11).unwrap().sym_part();
        let e = sym_eig(&m).unwrap();
        assert!((&e.reconstruct() - &m).norm() < 1e-10 * m.norm());
        assert!(orth_err(&e.eigenvectors) < 1e-12);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn random_generators_are_deterministic() {
        let a = rand_orthonormal(3, 2, 42).unwrap();
        assert!(orth_err(&a) < 1e-12);
        assert_eq!(a, rand_orthonormal(3, 2, 42).unwrap());
        assert_ne!(a, rand_orthonormal(3, 2, 43).unwrap());
        let s = rand_sym_with_spectrum(2, 0.5, 1.5, 7).unwrap();
        let e = sym_eig(&s).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| (0.5 - 1e-12..=1.5 + 1e-12).contains(&l)));
        assert!(rand_sym_with_spectrum(2, 1.5, 0.5, 7).is_err());
        assert!(rand_orthonormal(2, 3, 0).is_err());
    }

    #[test]
    fn derive_seed_spreads_streams() {
        let a = derive_seed(1, 0);
        assert_ne!(a, derive_seed(1, 1));
        assert_ne!(a, derive_seed(2, 0));
        assert_eq!(a, derive_seed(1, 0));
    }

    #[test]
    fn serde_round_trip_validates() {
        let m = rand_gaussian(2, 3, 5).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Matrix>(r#"{"rows":2,"cols":2,"data":[1.0]}"#).is_err());
    }

    proptest! {
        #[test]
        fn sym_plus_skew_reconstructs(seed in any::<u64>(), n in 1usize..7) {
            let m = rand_gaussian(n, n, seed).unwrap();
            let back = &sym(&m).unwrap() + &skew(&m).unwrap();
            prop_assert!((&back - &m).max_abs() <= 1e-15 * (1.0 + m.max_abs()));
            let s = sym(&m).unwrap();
            prop_assert_eq!(sym(&s).unwrap(), s);
            prop_assert!(skew(&m).unwrap().trace().abs() < 1e-15);
        }

        #[test]
        fn polar_postconditions(seed in any::<u64>(), n in 1usize..7, dr in 0usize..4) {
            let r = n.saturating_sub(dr).max(1);
            let y = rand_gaussian(n, r, seed).unwrap();
            let p = polar(&y).unwrap();
            prop_assert!(orth_err(&p.orthogonal) < 1e-12);
            prop_assert!(p.psd.asymmetry() < 1e-12);
            let (lo, _) = eig_range(&p.psd).unwrap();
            prop_assert!(lo >= -1e-10 * y.norm());
            prop_assert!((&(&p.orthogonal * &p.psd) - &y).norm() <= 1e-10 * y.norm());
        }

        #[test]
        fn polar_is_the_nearest_frame(seed in any::<u64>()) {
            let y = rand_gaussian(4, 2, seed).unwrap();
            let q = polar(&y).unwrap().orthogonal;
            let best = (&y - &q).norm();
            let mut rng = rng_from_seed(seed ^ 0xABCD);
            for _ in 0..20 {
                let other = orthonormal_from(&mut rng, 4, 2);
                prop_assert!(best <= (&y - &other).norm() + 1e-12);
            }
        }

        #[test]
        fn sym_eig_sorted_and_reconstructs(seed in any::<u64>(), n in 1usize..9) {
            let m = rand_gaussian(n, n, seed).unwrap().sym_part();
            let e = sym_eig(&m).unwrap();
            prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!((&e.reconstruct() - &m).norm() <= 1e-10 * m.norm().max(1.0));
        }

        #[test]
        fn completion_is_orthonormal(seed in any::<u64>(), n in 2usize..7) {
            let r = 1 + (seed as usize) % (n - 1);
            let x = rand_orthonormal(n, r, seed).unwrap();
            let cols: Vec<Vec<f64>> = (0..r).map(|j| x.column(j)).collect();
            let extra = complete_basis(&cols, n, n - r);
            let mut full = x.clone();
            for v in &extra {
                full = full.hstack(&Matrix::column_vector(v).unwrap());
            }
            prop_assert!(orth_err(&full) < 1e-12);
        }
    }
}
