//! Finite kernel expansions `f = Σ cⱼ K(·, xⱼ)` and the operations on them:
//! evaluation, inner products, orthogonal projection onto point sets, singleton
//! projection chains, kernel ridge regression against a discrete measure, and the
//! spectral (Mercer) factorization of a kernel over a finitely supported measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{cross_matrix, gram_matrix, KernelSpec, Point, PointSet};
use crate::linalg::{dot, solve_spd, sym_eigen, Matrix, SymMatrix, DEFAULT_EIGEN_TOL};

/// `project_onto_points` refuses Grams with `λ_min ≤ PROJECTION_SINGULAR_RATIO · λ_max`.
pub const PROJECTION_SINGULAR_RATIO: f64 = 1e-12;
/// Mercer eigenvalues at or below this fraction of the largest are dropped.
pub const MERCER_RANK_TOL: f64 = 1e-10;

/// `Σ cⱼ K(·, xⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsElement {
    pub kernel: KernelSpec,
    pub centers: PointSet,
    pub coefficients: Vec<f64>,
}

impl RkhsElement {
    pub fn new(kernel: KernelSpec, centers: PointSet, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                context: "rkhs element coefficients",
                expected: centers.len(),
                found: coefficients.len(),
            });
        }
        kernel.check_points(&centers)?;
        Ok(RkhsElement {
            kernel,
            centers,
            coefficients,
        })
    }

    /// The kernel section `K(·, x)`.
    pub fn section(kernel: KernelSpec, x: Point) -> Result<Self> {
        RkhsElement::new(kernel, PointSet::new(vec![x]), vec![1.0])
    }

    pub fn zero(kernel: KernelSpec) -> Self {
        RkhsElement {
            kernel,
            centers: PointSet::default(),
            coefficients: Vec::new(),
        }
    }

    /// `f(x) = Σⱼ cⱼ K(x, xⱼ)`.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, &a)| Ok(a * self.kernel.eval(x, c)?))
            .sum()
    }

    /// Values at every point of `pts`, i.e. `f|_F`.
    pub fn restrict(&self, pts: &PointSet) -> Result<Vec<f64>> {
        if self.centers.is_empty() {
            return Ok(vec![0.0; pts.len()]);
        }
        let k = cross_matrix(&self.kernel, pts, &self.centers)?;
        Ok(k.matvec(&self.coefficients))
    }

    /// `⟨f, g⟩ = Σᵢⱼ cᵢ dⱼ K(xᵢ, yⱼ)`.
    pub fn inner_product(&self, other: &RkhsElement) -> Result<f64> {
        if self.kernel != other.kernel {
            return Err(Error::KernelMismatch);
        }
        if self.centers.is_empty() || other.centers.is_empty() {
            return Ok(0.0);
        }
        let k = cross_matrix(&self.kernel, &self.centers, &other.centers)?;
        Ok(dot(&self.coefficients, &k.matvec(&other.coefficients)))
    }

    pub fn norm_sq(&self) -> Result<f64> {
        self.inner_product(self)
    }

    /// `self + s · other`, concatenating the expansions.
    pub fn add_scaled(&self, other: &RkhsElement, s: f64) -> Result<RkhsElement> {
        if self.kernel != other.kernel {
            return Err(Error::KernelMismatch);
        }
        let mut centers = self.centers.clone();
        centers.points.extend(other.centers.points.iter().cloned());
        let mut coefficients = self.coefficients.clone();
        coefficients.extend(other.coefficients.iter().map(|c| s * c));
        Ok(RkhsElement {
            kernel: self.kernel.clone(),
            centers,
            coefficients,
        })
    }
}

pub fn evaluate_element(f: &RkhsElement, x: &Point) -> Result<f64> {
    f.evaluate(x)
}

pub fn inner_product(f: &RkhsElement, g: &RkhsElement) -> Result<f64> {
    f.inner_product(g)
}

/// Orthogonal projection of `f` onto `span{K(·, x) : x ∈ F}`:
/// `P_F f = Σ_{x∈F} (K_F⁻¹ f|_F)ₓ K(·, x)`.
///
/// Fails with [`Error::LinearlyDependent`] when `K_F` is numerically singular; use
/// [`ridge_fit`] for a regularized fit instead.
pub fn project_onto_points(f: &RkhsElement, points: &PointSet) -> Result<RkhsElement> {
    let kf = gram_matrix(&f.kernel, points)?.matrix;
    let eig = sym_eigen(&kf, DEFAULT_EIGEN_TOL)?;
    if eig.min_value() <= PROJECTION_SINGULAR_RATIO * eig.max_value() {
        return Err(Error::LinearlyDependent {
            min_eigenvalue: eig.min_value(),
            max_eigenvalue: eig.max_value(),
        });
    }
    let values = f.restrict(points)?;
    let coefficients = solve_spd(&kf, &values)?;
    Ok(RkhsElement {
        kernel: f.kernel.clone(),
        centers: points.clone(),
        coefficients,
    })
}

/// `Pₙ ⋯ P₁ P₀ f` for singleton projections `Pᵢ` onto `K(·, xᵢ)`, in closed form:
/// `f(x₀) ∏ K(xᵢ, xᵢ₊₁) / ∏ K(xᵢ, xᵢ) · K(·, xₙ)`.
pub fn singleton_chain(f: &RkhsElement, chain: &PointSet) -> Result<RkhsElement> {
    let last = chain
        .points
        .last()
        .ok_or_else(|| Error::invalid("singleton chain needs at least one point"))?;
    let k = &f.kernel;
    let mut coefficient = f.evaluate(chain.get(0))?;
    for (i, x) in chain.iter().enumerate() {
        let d = k.eval(x, x)?;
        if !(d > 0.0) {
            return Err(Error::Singular { index: i, pivot: d });
        }
        coefficient /= d;
    }
    for w in chain.points.windows(2) {
        coefficient *= k.eval(&w[0], &w[1])?;
    }
    RkhsElement::new(k.clone(), PointSet::new(vec![last.clone()]), vec![coefficient])
}

/// Finitely supported measure `Σ wᵢ δ_{xᵢ}` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: PointSet,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: PointSet, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                context: "measure weights",
                expected: atoms.len(),
                found: weights.len(),
            });
        }
        if atoms.is_empty() {
            return Err(Error::invalid("measure needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("measure weights must be positive, got {w}")));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Unit weight on every atom.
    pub fn counting(atoms: PointSet) -> Result<Self> {
        let n = atoms.len();
        DiscreteMeasure::new(atoms, vec![1.0; n])
    }

    pub fn uniform(atoms: PointSet) -> Result<Self> {
        let n = atoms.len();
        DiscreteMeasure::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn permuted(&self, perm: &[usize]) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self.atoms.permuted(perm),
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    fn check_distinct(&self) -> Result<()> {
        match self.atoms.duplicates().first() {
            Some((i, j)) => Err(Error::invalid(format!("measure atoms {i} and {j} coincide"))),
            None => Ok(()),
        }
    }
}

/// Minimizer of `‖φ − f|_atoms‖²_{L²(μ)} + α‖f‖²_H`.
///
/// The minimizer lies in the span of the atoms' kernel sections; its coefficients
/// solve `(αI + W G) c = W φ`, which is solved in the equivalent symmetric form
/// `(G + α W⁻¹) c = φ`. `alpha = 0` is interpolation and needs an invertible Gram.
pub fn ridge_fit(k: &KernelSpec, mu: &DiscreteMeasure, phi: &[f64], alpha: f64) -> Result<RkhsElement> {
    if phi.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            context: "ridge samples",
            expected: mu.len(),
            found: phi.len(),
        });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("ridge penalty must be nonnegative, got {alpha}")));
    }
    let g = gram_matrix(k, &mu.atoms)?.matrix;
    let system = SymMatrix::from_fn(mu.len(), |i, j| {
        g.get(i, j) + if i == j { alpha / mu.weights[i] } else { 0.0 }
    });
    let coefficients = solve_spd(&system, phi)?;
    RkhsElement::new(k.clone(), mu.atoms.clone(), coefficients)
}

/// The ridge objective `Σ wᵢ (φᵢ − f(xᵢ))² + α‖f‖²`.
pub fn ridge_objective(f: &RkhsElement, mu: &DiscreteMeasure, phi: &[f64], alpha: f64) -> Result<f64> {
    let fx = f.restrict(&mu.atoms)?;
    let fit: f64 = mu
        .weights
        .iter()
        .zip(phi.iter().zip(&fx))
        .map(|(w, (p, v))| w * (p - v) * (p - v))
        .sum();
    Ok(fit + alpha * f.norm_sq()?)
}

fn weighted_gram(k: &KernelSpec, mu: &DiscreteMeasure) -> Result<(SymMatrix, Vec<f64>)> {
    mu.check_distinct()?;
    let g = gram_matrix(k, &mu.atoms)?.matrix;
    let sqrt_w: Vec<f64> = mu.weights.iter().map(|w| w.sqrt()).collect();
    let m = SymMatrix::from_fn(mu.len(), |i, j| sqrt_w[i] * g.get(i, j) * sqrt_w[j]);
    Ok((m, sqrt_w))
}

/// Spectrum (descending) of `T_μ T_μ*` on `L²(μ)` for the inclusion `T_μ : H_K → L²(μ)`,
/// i.e. the eigenvalues of `W^{1/2} G W^{1/2}`.
pub fn discrete_operator_spectrum(k: &KernelSpec, mu: &DiscreteMeasure) -> Result<Vec<f64>> {
    let (m, _) = weighted_gram(k, mu)?;
    Ok(sym_eigen(&m, DEFAULT_EIGEN_TOL)?.values)
}

/// Eigensystem of the integral operator of `K` against a discrete measure.
///
/// `functions[(j, i)] = uᵢ(xⱼ)` with `Σⱼ wⱼ uᵢ(xⱼ) u_l(xⱼ) = δᵢₗ` and
/// `Σⱼ wⱼ K(x, xⱼ) uᵢ(xⱼ) = λᵢ uᵢ(x)`, so that `G = Σᵢ λᵢ uᵢ uᵢᵀ` at the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MercerFactorization {
    pub kernel: KernelSpec,
    pub measure: DiscreteMeasure,
    pub eigenvalues: Vec<f64>,
    pub functions: Matrix,
}

impl MercerFactorization {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λᵢ uᵢ(xⱼ) uᵢ(xₖ)` over the atoms.
    pub fn reconstruct_gram(&self) -> SymMatrix {
        self.parseval_functions().outer_gram()
    }

    /// Columns `fᵢ = √λᵢ uᵢ`, a Parseval frame for the span of the sections, evaluated
    /// at the atoms: `Σᵢ fᵢ(x) fᵢ(y) = K(x, y)`.
    pub fn parseval_functions(&self) -> Matrix {
        let s: Vec<f64> = self.eigenvalues.iter().map(|l| l.sqrt()).collect();
        Matrix::from_fn(self.functions.rows(), self.rank(), |j, i| s[i] * self.functions[(j, i)])
    }

    /// Nyström extension `uᵢ(x) = λᵢ⁻¹ Σⱼ wⱼ K(x, xⱼ) uᵢ(xⱼ)` at an arbitrary point.
    pub fn eigenfunctions_at(&self, x: &Point) -> Result<Vec<f64>> {
        let kx: Vec<f64> = self
            .measure
            .atoms
            .iter()
            .zip(&self.measure.weights)
            .map(|(a, w)| Ok(w * self.kernel.eval(x, a)?))
            .collect::<Result<_>>()?;
        let proj = self.functions.tr_matvec(&kx);
        Ok(proj.iter().zip(&self.eigenvalues).map(|(p, l)| p / l).collect())
    }
}

pub fn mercer_factorize(k: &KernelSpec, mu: &DiscreteMeasure) -> Result<MercerFactorization> {
    let (m, sqrt_w) = weighted_gram(k, mu)?;
    let eig = sym_eigen(&m, DEFAULT_EIGEN_TOL)?;
    let cutoff = MERCER_RANK_TOL * eig.max_value().max(0.0);
    let rank = eig.values.iter().take_while(|&&l| l > cutoff).count();
    let functions = Matrix::from_fn(mu.len(), rank, |j, i| eig.vectors[(j, i)] / sqrt_w[j]);
    Ok(MercerFactorization {
        kernel: k.clone(),
        measure: mu.clone(),
        eigenvalues: eig.values[..rank].to_vec(),
        functions,
    })
}

/// Serializable summary of an element: centers, then coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct ElementRecord {
    pub centers: Vec<Point>,
    pub coefficients: Vec<f64>,
}

impl From<&RkhsElement> for ElementRecord {
    fn from(f: &RkhsElement) -> Self {
        ElementRecord {
            centers: f.centers.points.clone(),
            coefficients: f.coefficients.clone(),
        }
    }
}
