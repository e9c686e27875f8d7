//! Positive-definite kernel families, point sets, Gram matrices and derived quantities
//! (the induced metric, row-summability certificates and sampling bounds for
//! restrictions to finite point sets).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SymMatrix, DEFAULT_EIGEN_TOL};

/// Radicands of the induced metric down to this value are clamped to zero.
pub const METRIC_CLAMP: f64 = 1e-12;
/// `restriction_bounds` flags `sampling_a < NEAR_SINGULAR_RATIO · sampling_b`.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-12;

/// A point in a kernel's domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    /// A vector in ℝᵈ.
    Real(Vec<f64>),
    /// A finite subset of a ground set `{0, …, n-1}`, kept sorted without repeats.
    Set(Vec<usize>),
    /// An index into an explicitly given Gram matrix.
    Index(usize),
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point::Real(vec![x])
    }

    pub fn set<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut v: Vec<usize> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Point::Set(v)
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Point::Real(v) => Some(v),
            _ => None,
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::scalar(x)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Real(v)
    }
}

/// Ordered sequence of points; duplicates are allowed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Self {
        PointSet { points }
    }

    /// One-dimensional points.
    pub fn from_scalars(xs: &[f64]) -> Self {
        PointSet::new(xs.iter().map(|&x| Point::scalar(x)).collect())
    }

    pub fn from_vectors<V: AsRef<[f64]>>(vs: &[V]) -> Self {
        PointSet::new(vs.iter().map(|v| Point::Real(v.as_ref().to_vec())).collect())
    }

    pub fn from_sets<S: AsRef<[usize]>>(sets: &[S]) -> Self {
        PointSet::new(sets.iter().map(|s| Point::set(s.as_ref().iter().copied())).collect())
    }

    pub fn from_indices(n: usize) -> Self {
        PointSet::new((0..n).map(Point::Index).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// Ambient dimension when every point is real and they agree.
    pub fn dim(&self) -> Option<usize> {
        let first = self.points.first()?.as_real()?.len();
        self.points
            .iter()
            .all(|p| p.as_real().is_some_and(|v| v.len() == first))
            .then_some(first)
    }

    /// Index pairs `(i, j)`, `i < j`, of repeated points. These force singular Grams.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.points[i] == self.points[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn permuted(&self, perm: &[usize]) -> PointSet {
        PointSet::new(perm.iter().map(|&i| self.points[i].clone()).collect())
    }
}

impl FromIterator<Point> for PointSet {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        PointSet::new(iter.into_iter().collect())
    }
}

/// Finite ground set `{0, …, n-1}` with nonnegative weights ν.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasureSpace {
    weights: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid(format!(
                "measure weight {i} must be finite and nonnegative, got {}",
                weights[i]
            )));
        }
        Ok(FiniteMeasureSpace { weights })
    }

    /// Counting measure on `n` elements.
    pub fn counting(n: usize) -> Self {
        FiniteMeasureSpace {
            weights: vec![1.0; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// ν(A) for a sorted, repeat-free subset.
    pub fn measure(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.weights[i]).sum()
    }

    /// ν(A ∩ B) for sorted, repeat-free subsets.
    pub fn intersection_measure(&self, a: &[usize], b: &[usize]) -> f64 {
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += self.weights[a[i]];
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }
}

/// Closed-form positive-definite kernel families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    /// `exp(-‖x−y‖² / (2σ²))` on ℝᵈ.
    Gaussian { sigma: f64 },
    /// Normalized Shannon kernel `∏ sin(π tᵢ)/(π tᵢ)`, `t = x − y`; integer
    /// translates are orthonormal.
    Sinc,
    /// Paley-Wiener kernel of the box `∏[−aᵢ, aᵢ]`: `∏ 2 sin(aᵢ tᵢ)/tᵢ`, divided by
    /// `(2π)ᵈ` when `normalized` (then `a = π` reproduces [`KernelSpec::Sinc`]).
    PwBox { half_widths: Vec<f64>, normalized: bool },
    /// `K(A, B) = ν(A ∩ B)` on subsets of a finite measure space.
    Intersection(FiniteMeasureSpace),
    /// A given PSD matrix over an indexed point set.
    ExplicitGram(SymMatrix),
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!("gaussian width must be positive, got {sigma}")));
        }
        Ok(KernelSpec::Gaussian { sigma })
    }

    pub fn pw_box(half_widths: Vec<f64>, normalized: bool) -> Result<Self> {
        if half_widths.is_empty() || half_widths.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::invalid("pw-box half-widths must be positive and nonempty"));
        }
        Ok(KernelSpec::PwBox {
            half_widths,
            normalized,
        })
    }

    pub fn intersection(weights: Vec<f64>) -> Result<Self> {
        Ok(KernelSpec::Intersection(FiniteMeasureSpace::new(weights)?))
    }

    /// Accepts only matrices passing [`psd_check`] at `1e-9`.
    pub fn explicit(gram: SymMatrix) -> Result<Self> {
        let check = psd_check(&gram, 1e-9)?;
        if !check.is_psd {
            return Err(Error::NotPsd {
                index: 0,
                pivot: check.min_eigenvalue,
            });
        }
        Ok(KernelSpec::ExplicitGram(gram))
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Sinc => "sinc",
            KernelSpec::PwBox { .. } => "pw-box",
            KernelSpec::Intersection(_) => "intersection",
            KernelSpec::ExplicitGram(_) => "explicit-gram",
        }
    }

    /// True for translation-invariant families on ℝᵈ.
    pub fn is_stationary(&self) -> bool {
        matches!(
            self,
            KernelSpec::Gaussian { .. } | KernelSpec::Sinc | KernelSpec::PwBox { .. }
        )
    }

    /// `K(t)` for stationary families, `t = x − y`. `None` otherwise.
    pub fn stationary_profile(&self, t: &[f64]) -> Option<f64> {
        match self {
            KernelSpec::Gaussian { sigma } => {
                let r2: f64 = t.iter().map(|v| v * v).sum();
                Some((-r2 / (2.0 * sigma * sigma)).exp())
            }
            KernelSpec::Sinc => Some(t.iter().map(|&v| sinc(v)).product()),
            KernelSpec::PwBox {
                half_widths,
                normalized,
            } => {
                let raw: f64 = half_widths
                    .iter()
                    .zip(t)
                    .map(|(&a, &v)| if v == 0.0 { 2.0 * a } else { 2.0 * (a * v).sin() / v })
                    .product();
                if *normalized {
                    Some(raw / (2.0 * PI).powi(half_widths.len() as i32))
                } else {
                    Some(raw)
                }
            }
            _ => None,
        }
    }

    /// Checks that `p` lies in this kernel's domain.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (KernelSpec::Gaussian { .. } | KernelSpec::Sinc, Point::Real(v)) => {
                if v.is_empty() {
                    return Err(Error::Domain("real points need at least one coordinate".into()));
                }
                Ok(())
            }
            (KernelSpec::PwBox { half_widths, .. }, Point::Real(v)) => {
                if v.len() != half_widths.len() {
                    return Err(Error::DimensionMismatch {
                        context: "pw-box point",
                        expected: half_widths.len(),
                        found: v.len(),
                    });
                }
                Ok(())
            }
            (KernelSpec::Intersection(space), Point::Set(s)) => match s.iter().find(|&&i| i >= space.len()) {
                Some(i) => Err(Error::Domain(format!(
                    "set element {i} outside ground set of size {}",
                    space.len()
                ))),
                None => Ok(()),
            },
            (KernelSpec::ExplicitGram(g), Point::Index(i)) => {
                if *i >= g.n() {
                    return Err(Error::Domain(format!("index {i} outside Gram of size {}", g.n())));
                }
                Ok(())
            }
            (k, p) => Err(Error::Domain(format!("{} kernel cannot evaluate {p:?}", k.name()))),
        }
    }

    /// Checks every point and, for real points, that dimensions agree.
    pub fn check_points(&self, pts: &PointSet) -> Result<()> {
        for p in pts.iter() {
            self.check_point(p)?;
        }
        if let Some(Point::Real(first)) = pts.points.first() {
            if let Some(bad) = pts.iter().filter_map(Point::as_real).find(|v| v.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    context: "point set",
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(())
    }

    /// `K(x, y)`; symmetric to the last bit in its arguments.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if let (Point::Real(a), Point::Real(b)) = (x, y) {
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    context: "kernel arguments",
                    expected: a.len(),
                    found: b.len(),
                });
            }
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluation on points already validated with [`KernelSpec::check_points`].
    pub(crate) fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (KernelSpec::Intersection(space), Point::Set(a), Point::Set(b)) => space.intersection_measure(a, b),
            (KernelSpec::ExplicitGram(g), Point::Index(i), Point::Index(j)) => g.get(*i, *j),
            (k, Point::Real(a), Point::Real(b)) => {
                let t: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
                k.stationary_profile(&t).expect("real points imply a stationary family")
            }
            _ => unreachable!("points validated against kernel domain"),
        }
    }
}

/// `sin(πt)` with exact zeros at the integers.
pub fn sin_pi(t: f64) -> f64 {
    let n = t.round();
    let s = (PI * (t - n)).sin();
    if n.rem_euclid(2.0) == 1.0 {
        -s
    } else {
        s
    }
}

/// Normalized sinc `sin(πt)/(πt)`, with the removable singularity filled by 1.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        sin_pi(t) / (PI * t)
    }
}

/// Kernel matrix over a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub kernel: KernelSpec,
    pub points: PointSet,
    pub matrix: SymMatrix,
}

/// Assembles `[K(pᵢ, pⱼ)]`, evaluating the upper triangle (in parallel when enabled).
pub fn gram_matrix(k: &KernelSpec, pts: &PointSet) -> Result<GramMatrix> {
    if pts.is_empty() {
        return Err(Error::invalid("Gram matrix needs at least one point"));
    }
    k.check_points(pts)?;
    let matrix = SymMatrix::from_fn(pts.len(), |i, j| k.eval_unchecked(pts.get(i), pts.get(j)));
    Ok(GramMatrix {
        kernel: k.clone(),
        points: pts.clone(),
        matrix,
    })
}

/// Cross-kernel matrix `[K(xᵢ, yⱼ)]` between two point sets.
pub fn cross_matrix(k: &KernelSpec, xs: &PointSet, ys: &PointSet) -> Result<crate::linalg::Matrix> {
    k.check_points(xs)?;
    k.check_points(ys)?;
    if let (Some(a), Some(b)) = (xs.dim(), ys.dim()) {
        if a != b {
            return Err(Error::DimensionMismatch {
                context: "cross kernel point sets",
                expected: a,
                found: b,
            });
        }
    }
    Ok(crate::linalg::Matrix::from_fn(xs.len(), ys.len(), |i, j| {
        k.eval_unchecked(xs.get(i), ys.get(j))
    }))
}

/// `d_K(x, y) = ‖K_x − K_y‖` in the RKHS.
pub fn induced_metric(k: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    let r = k.eval(x, x)? + k.eval(y, y)? - 2.0 * k.eval(x, y)?;
    if r < -METRIC_CLAMP {
        return Err(Error::NotPsd { index: 0, pivot: r });
    }
    Ok(r.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// `λ_min(m) ≥ −tol`, reporting `λ_min`.
pub fn psd_check(m: &SymMatrix, tol: f64) -> Result<PsdCheck> {
    let min_eigenvalue = sym_eigen(m, DEFAULT_EIGEN_TOL)?.min_value();
    Ok(PsdCheck {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// `Σ_{x∈V} |K(x, y)|²`, the finite truncation of the row-summability constant at `y`.
pub fn row_l2_sum(k: &KernelSpec, v: &PointSet, y: &Point) -> Result<f64> {
    v.iter().map(|x| k.eval(x, y).map(|kxy| kxy * kxy)).sum()
}

/// Frame constants of the restriction of `K` to a finite set `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestrictionBounds {
    /// Extreme eigenvalues of `K_V`: `A cᵀc ≤ cᵀ K_V c ≤ B cᵀc`.
    pub sampling_a: f64,
    pub sampling_b: f64,
    /// Their squares: `A² ‖c‖² ≤ ‖K_V c‖² ≤ B² ‖c‖²`.
    pub operator_a: f64,
    pub operator_b: f64,
    /// `sampling_a < NEAR_SINGULAR_RATIO · sampling_b`.
    pub near_singular: bool,
}

impl RestrictionBounds {
    /// `sampling_b / sampling_a`.
    pub fn condition_number(&self) -> f64 {
        self.sampling_b / self.sampling_a
    }
}

pub fn restriction_bounds(k: &KernelSpec, v: &PointSet) -> Result<RestrictionBounds> {
    let gram = gram_matrix(k, v)?;
    let eig = sym_eigen(&gram.matrix, DEFAULT_EIGEN_TOL)?;
    let (a, b) = (eig.min_value(), eig.max_value());
    Ok(RestrictionBounds {
        sampling_a: a,
        sampling_b: b,
        operator_a: a * a,
        operator_b: b * b,
        near_singular: a < NEAR_SINGULAR_RATIO * b,
    })
}
