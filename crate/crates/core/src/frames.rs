//! Finite frames in ℝⁿ: analysis and synthesis operators, frame bounds, weighted frame
//! operators and the residual of truncating to the span of an orthonormal system.
//!
//! A frame carries unit-or-raw vectors `f_α` and positive weights `w_α` (default 1).
//! The analysis operator is `u ↦ (√w_α ⟨f_α, u⟩)_α`, so that synthesis after analysis
//! is the frame operator `G = Σ w_α f_α f_αᵀ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, orthonormality_defect, sym_eigen, Matrix, SymMatrix, DEFAULT_EIGEN_TOL};

/// Frame-operator eigenvalues at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-12;
/// Orthonormality tolerance for [`residual_error`].
pub const ONB_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFrame {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl VectorFrame {
    /// Unweighted frame.
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let m = vectors.len();
        VectorFrame::with_weights(vectors, vec![1.0; m])
    }

    pub fn with_weights(vectors: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("frame needs at least one vector"))?;
        if dim == 0 {
            return Err(Error::invalid("frame vectors must be nonempty"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: "frame vector",
                expected: dim,
                found: v.len(),
            });
        }
        if weights.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                context: "frame weights",
                expected: vectors.len(),
                found: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("frame weights must be positive, got {w}")));
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("frame vectors must be finite"));
        }
        Ok(VectorFrame {
            dim,
            vectors,
            weights,
        })
    }

    /// Splits raw vectors `h_α = ‖h_α‖ f_α` into unit vectors and weights `‖h_α‖²`,
    /// which leaves the frame operator unchanged. Zero vectors are rejected.
    pub fn normalized_from_raw(raw: Vec<Vec<f64>>) -> Result<Self> {
        let mut weights = Vec::with_capacity(raw.len());
        let mut units = Vec::with_capacity(raw.len());
        for (i, h) in raw.into_iter().enumerate() {
            let n = norm(&h);
            if n == 0.0 {
                return Err(Error::invalid(format!("frame vector {i} is zero")));
            }
            units.push(h.iter().map(|x| x / n).collect());
            weights.push(n * n);
        }
        VectorFrame::with_weights(units, weights)
    }

    /// Columns of `m` as frame vectors.
    pub fn from_columns(m: &Matrix) -> Result<Self> {
        VectorFrame::new((0..m.cols()).map(|j| m.column(j)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the first zero vector, if any.
    pub fn zero_vector(&self) -> Option<usize> {
        self.vectors.iter().position(|v| v.iter().all(|&x| x == 0.0))
    }

    /// Numerical rank of the vector system.
    pub fn rank(&self) -> Result<usize> {
        let eig = sym_eigen(&frame_operator(self).matrix, DEFAULT_EIGEN_TOL)?;
        let cutoff = RANK_TOL * eig.max_value();
        Ok(eig.values.iter().filter(|&&l| l > cutoff).count())
    }
}

/// `(√w_α ⟨f_α, u⟩)_α`.
pub fn analysis(fr: &VectorFrame, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != fr.dim {
        return Err(Error::DimensionMismatch {
            context: "analysis input",
            expected: fr.dim,
            found: u.len(),
        });
    }
    Ok(fr
        .vectors
        .iter()
        .zip(&fr.weights)
        .map(|(f, w)| w.sqrt() * dot(f, u))
        .collect())
}

/// `Σ γ_α √w_α f_α`.
pub fn synthesis(fr: &VectorFrame, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != fr.len() {
        return Err(Error::DimensionMismatch {
            context: "synthesis coefficients",
            expected: fr.len(),
            found: coeffs.len(),
        });
    }
    let mut out = vec![0.0; fr.dim];
    for ((f, w), &g) in fr.vectors.iter().zip(&fr.weights).zip(coeffs) {
        let s = g * w.sqrt();
        for (o, x) in out.iter_mut().zip(f) {
            *o += s * x;
        }
    }
    Ok(out)
}

/// Optimal constants in `A‖u‖² ≤ Σ|⟨w_α, u⟩|² ≤ B‖u‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    /// Reported as 0 when the vectors do not span.
    pub lower: f64,
    pub upper: f64,
    pub is_frame: bool,
}

impl FrameBounds {
    pub fn is_parseval(&self, tol: f64) -> bool {
        self.is_frame && (self.lower - 1.0).abs() <= tol && (self.upper - 1.0).abs() <= tol
    }

    pub fn is_tight(&self, tol: f64) -> bool {
        self.is_frame && (self.upper - self.lower).abs() <= tol * self.upper
    }
}

pub fn frame_bounds(fr: &VectorFrame) -> Result<FrameBounds> {
    let eig = sym_eigen(&frame_operator(fr).matrix, DEFAULT_EIGEN_TOL)?;
    let (lo, hi) = (eig.min_value(), eig.max_value());
    let is_frame = hi > 0.0 && lo > RANK_TOL * hi && fr.zero_vector().is_none();
    Ok(FrameBounds {
        lower: if is_frame { lo } else { 0.0 },
        upper: hi,
        is_frame,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperator {
    /// `Σ w_α f_α f_αᵀ`.
    pub matrix: SymMatrix,
    pub trace: f64,
}

pub fn frame_operator(fr: &VectorFrame) -> FrameOperator {
    let n = fr.dim;
    let matrix = SymMatrix::from_fn(n, |i, j| {
        fr.vectors
            .iter()
            .zip(&fr.weights)
            .map(|(f, w)| w * f[i] * f[j])
            .sum()
    });
    let trace = matrix.trace();
    FrameOperator { matrix, trace }
}

fn check_onb(onb: &Matrix, dim: usize, n: usize) -> Result<()> {
    if onb.rows() != dim {
        return Err(Error::DimensionMismatch {
            context: "orthonormal basis rows",
            expected: dim,
            found: onb.rows(),
        });
    }
    if n > onb.cols() {
        return Err(Error::invalid(format!(
            "truncation level {n} exceeds the {} basis vectors",
            onb.cols()
        )));
    }
    let defect = orthonormality_defect(onb);
    if defect > ONB_TOL {
        return Err(Error::NotOrthonormal { defect });
    }
    Ok(())
}

/// `tr(Q G) = Σ_{i≤n} ⟨ψᵢ, G ψᵢ⟩` for the projection `Q` onto the first `n` columns.
pub fn captured_energy(g: &FrameOperator, onb: &Matrix, n: usize) -> Result<f64> {
    check_onb(onb, g.matrix.n(), n)?;
    Ok((0..n).map(|i| g.matrix.quad_form(&onb.column(i))).sum())
}

/// `Eₙ = tr(G Qₙ^⊥)` where `Qₙ` projects onto the first `n` columns of `onb`.
pub fn residual_error(g: &FrameOperator, onb: &Matrix, n: usize) -> Result<f64> {
    Ok(g.trace - captured_energy(g, onb, n)?)
}

/// `Eₙ` from its definition `Σ_α w_α ‖f_α − Σ_{i≤n} ⟨ψᵢ, f_α⟩ ψᵢ‖²`.
pub fn residual_error_from_frame(fr: &VectorFrame, onb: &Matrix, n: usize) -> Result<f64> {
    check_onb(onb, fr.dim, n)?;
    let basis: Vec<Vec<f64>> = (0..n).map(|i| onb.column(i)).collect();
    Ok(fr
        .vectors
        .iter()
        .zip(&fr.weights)
        .map(|(f, w)| {
            let mut r = f.clone();
            for psi in &basis {
                let c = dot(psi, f);
                for (ri, p) in r.iter_mut().zip(psi) {
                    *ri -= c * p;
                }
            }
            w * dot(&r, &r)
        })
        .sum())
}
