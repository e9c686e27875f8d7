//! Dense real linear algebra: a row-major [`Matrix`], the [`SymMatrix`] newtype, cyclic
//! Jacobi eigendecomposition, pivoted PSD factorization and SPD solves.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Default relative off-diagonal tolerance for [`sym_eigen`].
pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;
/// Cyclic Jacobi sweep budget.
pub const MAX_SWEEPS: usize = 100;
/// Default relative pivot threshold for [`psd_factor`], scaled by the largest diagonal.
pub const DEFAULT_JITTER: f64 = 1e-10;

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data length",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        Ok(Matrix::from_rows(columns)?.transpose())
    }

    pub fn from_fn<F: Fn(usize, usize) -> f64 + Sync + Send>(rows: usize, cols: usize, f: F) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        par::for_each_row(&mut m.data, cols, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
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

    /// Matrix product. Panics if the inner dimensions differ.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        let inner = self.cols;
        par::for_each_row(&mut out.data, other.cols, |i, out_row| {
            let a_row = &self.data[i * inner..(i + 1) * inner];
            for (k, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        });
        out
    }

    /// Matrix-vector product. Panics on length mismatch.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec: {} columns, vector of {}", self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec: {} rows, vector of {}", self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise `self + s * other`. Panics on shape mismatch.
    pub fn add_scaled(&self, other: &Matrix, s: f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add_scaled: shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add_scaled(other, -1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `selfᵀ · self`, exactly symmetric.
    pub fn gram(&self) -> SymMatrix {
        let n = self.cols;
        let t = self.transpose();
        SymMatrix::from_fn(n, |i, j| dot(t.row(i), t.row(j)))
    }

    /// `self · selfᵀ`, exactly symmetric.
    pub fn outer_gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.rows, |i, j| dot(self.row(i), self.row(j)))
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFinite {
                row: p / self.cols.max(1),
                col: p % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Square matrix whose stored entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct SymMatrix(Matrix);

impl TryFrom<Matrix> for SymMatrix {
    type Error = Error;

    fn try_from(m: Matrix) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl From<SymMatrix> for Matrix {
    fn from(s: SymMatrix) -> Matrix {
        s.0
    }
}

impl SymMatrix {
    /// Validates that `m` is square, finite and symmetric as stored.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: "symmetric matrix (columns)",
                expected: m.rows,
                found: m.cols,
            });
        }
        if m.rows == 0 {
            return Err(Error::invalid("symmetric matrix must have n >= 1"));
        }
        m.check_finite()?;
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Replaces `m` by `(m + mᵀ) / 2`; for products that are symmetric only up to rounding.
    pub fn symmetrized(m: &Matrix) -> Result<Self> {
        let n = m.rows;
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: "symmetric matrix (columns)",
                expected: n,
                found: m.cols,
            });
        }
        SymMatrix::new(Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    /// Evaluates `f` on the upper triangle and mirrors it.
    pub fn from_fn<F: Fn(usize, usize) -> f64 + Sync + Send>(n: usize, f: F) -> Self {
        let mut m = Matrix::zeros(n, n);
        par::for_each_row(&mut m.data, n, |i, row| {
            for (j, v) in row.iter_mut().enumerate().skip(i) {
                *v = f(i, j);
            }
        });
        for i in 0..n {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        SymMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        SymMatrix(Matrix::from_diag(diag))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        SymMatrix::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n())
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Quadratic form `xᵀ M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.0.matvec(x))
    }

    /// `Pᵀ M P` for a permutation given as `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(self.n(), |i, j| self.get(perm[i], perm[j]))
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
    /// Off-diagonal Frobenius norm of the final rotated matrix.
    pub residual: f64,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    /// `Σ λₖ vₖ vₖᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        self.spectral_map(|l| l)
    }

    /// `Σ f(λₖ) vₖ vₖᵀ`.
    pub fn spectral_map<F: Fn(f64) -> f64>(&self, f: F) -> SymMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| weights[k] * v[(i, k)] * v[(j, k)]).sum()
        })
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius norm is at most `tol · ‖m‖_F` or the sweep
/// budget ([`MAX_SWEEPS`]) runs out. Eigenvalues are returned descending (stable with
/// respect to the Jacobi output order on ties); each eigenvector is signed so that its
/// first component with magnitude above `1e-12` is positive.
pub fn sym_eigen(m: &SymMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("eigen tolerance must be positive, got {tol}")));
    }
    let n = m.n();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let target = tol * m.frobenius_norm();

    let mut sweeps = 0;
    let mut residual = off_diagonal_norm(&a);
    while residual > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        residual = off_diagonal_norm(&a);
    }

    let raw: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| raw[y].total_cmp(&raw[x]));

    let values = order.iter().map(|&k| raw[k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let lead = (0..n).map(|i| v[(i, src)]).find(|c| c.abs() > 1e-12);
        let sign = if lead.is_some_and(|c| c < 0.0) { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, dst)] = sign * v[(i, src)];
        }
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        residual,
        sweeps,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Pivoted factor `L` (n×rank) with `L·Lᵀ ≈ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactor {
    pub rank: usize,
    /// Rows follow the original index order of the input.
    pub factor: Matrix,
    /// `permutation[k]` is the original index chosen as the k-th pivot; the
    /// non-pivoted indices follow in their final order.
    pub permutation: Vec<usize>,
}

impl PsdFactor {
    pub fn reconstruct(&self) -> SymMatrix {
        self.factor.outer_gram()
    }
}

/// Diagonally pivoted Cholesky factorization of a positive semidefinite matrix.
///
/// `jitter` is relative to the largest diagonal entry: pivoting stops once every
/// remaining Schur-complement diagonal is at most `jitter · max_diag`, and fails with
/// [`Error::NotPsd`] if one of them is below `-jitter · max_diag`.
pub fn psd_factor(m: &SymMatrix, jitter: f64) -> Result<PsdFactor> {
    if !(jitter >= 0.0) {
        return Err(Error::invalid(format!("jitter must be nonnegative, got {jitter}")));
    }
    let n = m.n();
    let max_diag = m.max_diag();
    if max_diag < 0.0 {
        let index = (0..n).find(|&i| m.get(i, i) == max_diag).unwrap_or(0);
        return Err(Error::NotPsd {
            index,
            pivot: max_diag,
        });
    }
    let threshold = jitter * max_diag;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    let mut l = Matrix::zeros(n, n);
    let mut rank = 0;

    for k in 0..n {
        let (pos, &best) = perm[k..]
            .iter()
            .enumerate()
            .max_by(|(_, &x), (_, &y)| diag[x].total_cmp(&diag[y]).then(y.cmp(&x)))
            .expect("nonempty remainder");
        let j = best;
        if diag[j] <= threshold {
            if let Some(&bad) = perm[k..].iter().find(|&&i| diag[i] < -threshold) {
                return Err(Error::NotPsd {
                    index: bad,
                    pivot: diag[bad],
                });
            }
            break;
        }
        perm.swap(k, k + pos);
        let pivot = diag[j].sqrt();
        l[(j, k)] = pivot;
        for &i in &perm[k + 1..] {
            let mut s = m.get(i, j);
            for c in 0..k {
                s -= l[(i, c)] * l[(j, c)];
            }
            let lik = s / pivot;
            l[(i, k)] = lik;
            diag[i] -= lik * lik;
        }
        rank += 1;
    }

    let factor = Matrix::from_fn(n, rank, |i, c| l[(i, c)]);
    Ok(PsdFactor {
        rank,
        factor,
        permutation: perm,
    })
}

/// Solves `m·x = rhs` for symmetric positive definite `m` (Cholesky plus one
/// refinement step).
pub fn solve_spd(m: &SymMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.n();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_spd right-hand side",
            expected: n,
            found: rhs.len(),
        });
    }
    let chol = cholesky(m)?;
    let mut x = cholesky_solve(&chol, rhs);
    let ax = m.as_matrix().matvec(&x);
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let dx = cholesky_solve(&chol, &r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

fn cholesky(m: &SymMatrix) -> Result<Matrix> {
    let n = m.n();
    let scale = m.max_diag().max(0.0);
    let floor = scale * n as f64 * f64::EPSILON;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::Singular { index: j, pivot: d });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Singular values in descending order, by one-sided Jacobi rotations on the columns.
///
/// Small singular values come out accurate to about `ε·σ_max`, unlike square roots of
/// the eigenvalues of `AᵀA`.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    a.check_finite()?;
    let work = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let (m, n) = (work.rows(), work.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();
    let scale = work.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let eps = f64::EPSILON * m as f64;
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let (xp, xq) = (cols[p][k], cols[q][k]);
                    cols[p][k] = c * xp - s * xq;
                    cols[q][k] = s * xp + c * xq;
                }
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: f64::NAN,
            });
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Max-abs deviation of `QᵀQ` from the identity.
pub fn orthonormality_defect(q: &Matrix) -> f64 {
    q.gram().as_matrix().max_abs_diff(&Matrix::identity(q.cols()))
}
