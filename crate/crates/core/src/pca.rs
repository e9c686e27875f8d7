//! Principal component analysis (the Karhunen–Loève transform) on data matrices whose
//! rows are observations and whose columns are variables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix, SymMatrix, DEFAULT_EIGEN_TOL};
use crate::par;

/// Denominator convention for the covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    /// Divide by `m − 1`.
    #[default]
    Sample,
    /// Divide by `m`.
    Population,
}

impl CovarianceMode {
    fn denominator(self, m: usize) -> f64 {
        match self {
            CovarianceMode::Sample => (m - 1) as f64,
            CovarianceMode::Population => m as f64,
        }
    }
}

fn check_data(x: &Matrix, min_rows: usize) -> Result<()> {
    if x.cols() == 0 {
        return Err(Error::invalid("data matrix needs at least one column"));
    }
    if x.rows() < min_rows {
        return Err(Error::invalid(format!(
            "data matrix needs at least {min_rows} observations, got {}",
            x.rows()
        )));
    }
    x.check_finite()
}

pub fn column_means(x: &Matrix) -> Vec<f64> {
    let m = x.rows() as f64;
    let mut sums = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (s, v) in sums.iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    sums.iter().map(|s| s / m).collect()
}

fn centered(x: &Matrix, mean: &[f64]) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[j])
}

/// Covariance of the columns of `x`.
pub fn covariance(x: &Matrix, mode: CovarianceMode) -> Result<SymMatrix> {
    check_data(x, 2)?;
    let xc = centered(x, &column_means(x));
    let d = mode.denominator(x.rows());
    let g = xc.gram();
    Ok(SymMatrix::from_fn(g.n(), |i, j| g.get(i, j) / d))
}

/// Fitted principal axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Descending and nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub feature_matrix: Matrix,
    pub mode: CovarianceMode,
    /// Number of observations the model was fitted on.
    pub observations: usize,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.dim() {
            return Err(Error::invalid(format!(
                "component count {k} outside 1..={}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Mean squared error per entry of a rank-`k` reconstruction of the training data,
    /// from the discarded eigenvalues.
    pub fn trailing_mse(&self, k: usize) -> Result<f64> {
        self.check_k(k)?;
        let m = self.observations;
        let tail: f64 = self.eigenvalues[k..].iter().sum();
        Ok(tail * self.mode.denominator(m) / (m * self.dim()) as f64)
    }
}

pub fn fit(x: &Matrix, mode: CovarianceMode) -> Result<PcaModel> {
    let cov = covariance(x, mode)?;
    let eig = sym_eigen(&cov, DEFAULT_EIGEN_TOL)?;
    Ok(PcaModel {
        mean: column_means(x),
        eigenvalues: eig.values.iter().map(|&l| l.max(0.0)).collect(),
        feature_matrix: eig.vectors,
        mode,
        observations: x.rows(),
    })
}

fn check_cols(model: &PcaModel, x: &Matrix) -> Result<()> {
    if x.cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            context: "data columns",
            expected: model.dim(),
            found: x.cols(),
        });
    }
    Ok(())
}

/// `Y = (X − mean) · A`, coordinates of each observation along the principal axes.
pub fn transform(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    check_cols(model, x)?;
    x.check_finite()?;
    Ok(centered(x, &model.mean).matmul(&model.feature_matrix))
}

/// `X' = Y[:, ..k] · A[:, ..k]ᵀ + mean`.
pub fn reconstruct(model: &PcaModel, y: &Matrix, k: usize) -> Result<Matrix> {
    check_cols(model, y)?;
    model.check_k(k)?;
    let a = &model.feature_matrix;
    let n = model.dim();
    let mut out = Matrix::zeros(y.rows(), n);
    let rows: Vec<Vec<f64>> = par::map_range(y.rows(), |i| {
        let yi = y.row(i);
        (0..n)
            .map(|j| model.mean[j] + (0..k).map(|c| yi[c] * a[(j, c)]).sum::<f64>())
            .collect()
    });
    for (i, r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from_slice(r);
    }
    Ok(out)
}

/// Summary of a rank-`k` compression. Serializes to the keys `components`, `mse`,
/// `compression_ratio` and `eigenvalues`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionReport {
    pub components: usize,
    /// Mean over entries of `(X − X')²`.
    pub mse: f64,
    /// `m·n / (k·(m + n) + n)`: stored entries of the original over those of `k` score
    /// columns, `k` axes and the mean.
    pub compression_ratio: f64,
    pub eigenvalues: Vec<f64>,
}

pub fn compression_ratio(m: usize, n: usize, k: usize) -> f64 {
    (m * n) as f64 / (k * (m + n) + n) as f64
}

pub fn mean_squared_error(a: &Matrix, b: &Matrix) -> f64 {
    let s: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).powi(2)).sum();
    s / a.as_slice().len() as f64
}

pub fn report(model: &PcaModel, x: &Matrix, k: usize) -> Result<CompressionReport> {
    let rebuilt = reconstruct(model, &transform(model, x)?, k)?;
    Ok(CompressionReport {
        components: k,
        mse: mean_squared_error(x, &rebuilt),
        compression_ratio: compression_ratio(x.rows(), x.cols(), k),
        eigenvalues: model.eigenvalues.clone(),
    })
}
