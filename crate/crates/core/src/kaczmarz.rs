//! Kaczmarz iteration in its classical row-projection form, its sequence form over unit
//! vectors, and the projection-valued defect operators
//!
//! ```text
//! Tₙ = (1 − Pₙ)⋯(1 − P₀),   Qₙ = Pₙ Tₙ₋₁   (T₋₁ = 1),
//! ```
//!
//! which satisfy `‖x‖² = ‖Tₙx‖² + Σ_{k≤n} ‖Qₖx‖²` for every `x`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec, Point, PointSet};
use crate::linalg::{dot, norm, psd_factor, sym_eigen, Matrix, SymMatrix, DEFAULT_EIGEN_TOL};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
/// Allowed deviation from symmetry and idempotence for projection matrices.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Allowed deviation of a sequence vector's norm from 1.
pub const UNIT_TOL: f64 = 1e-12;
/// Relative pivot threshold used when coordinatizing kernel sections.
pub const KERNEL_COORD_JITTER: f64 = 1e-12;

const CONDITION_REL_SLACK: f64 = 1e-10;
const DECAY_REL_SLACK: f64 = 1e-9;
const DECAY_ABS_SLACK: f64 = 1e-28;

/// `A x = b` with no zero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
    b: Vec<f64>,
    row_norms_sq: Vec<f64>,
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "right-hand side",
                expected: a.rows(),
                found: b.len(),
            });
        }
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::invalid("system matrix must be nonempty"));
        }
        a.check_finite()?;
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        let row_norms_sq: Vec<f64> = (0..a.rows()).map(|i| dot(a.row(i), a.row(i))).collect();
        if let Some(row) = row_norms_sq.iter().position(|&r| r == 0.0) {
            return Err(Error::ZeroRow { row });
        }
        Ok(LinearSystem { a, b, row_norms_sq })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// `A x − b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.a.matvec(x).iter().zip(&self.b).map(|(ax, b)| ax - b).collect()
    }

    /// Projects `x` onto the hyperplane `⟨aⱼ, x⟩ = bⱼ` in place.
    pub fn project_onto_row(&self, x: &mut [f64], j: usize) {
        let a = self.a.row(j);
        let s = (self.b[j] - dot(a, x)) / self.row_norms_sq[j];
        for (xi, ai) in x.iter_mut().zip(a) {
            *xi += s * ai;
        }
    }
}

/// How the next row is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSelection {
    /// Rows `0, 1, …, m−1` in order, repeated.
    Cyclic,
    /// Row `j` with probability `‖aⱼ‖² / ‖A‖_F²`.
    Randomized,
    /// Rows uniformly at random.
    Uniform,
}

impl std::str::FromStr for RowSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(RowSelection::Cyclic),
            "randomized" => Ok(RowSelection::Randomized),
            "uniform" => Ok(RowSelection::Uniform),
            other => Err(Error::invalid(format!("unknown row selection '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Starting point; zero when `None`.
    pub x0: Option<Vec<f64>>,
    /// Stop once `‖Ax − b‖∞ ≤ tol`, checked after every sweep of `m` updates.
    pub tol: f64,
    pub max_sweeps: usize,
    pub mode: RowSelection,
    /// Seeds the row sampler in the random modes.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            x0: None,
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            mode: RowSelection::Cyclic,
            seed: 0,
        }
    }
}

/// Outcome of [`solve_classical`]. Serializes to the keys `iterations`, `converged`,
/// `final_residual` and `residual_history`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    /// Number of single-row updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// `‖Ax − b‖∞` at the returned solution.
    pub final_residual: f64,
    /// `‖Ax − b‖₂` at the start and after each sweep.
    pub residual_history: Vec<f64>,
    #[serde(skip)]
    pub solution: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Runs the row-action iteration `x ← x + (bⱼ − ⟨aⱼ, x⟩)/‖aⱼ‖² · aⱼ`.
pub fn solve_classical(sys: &LinearSystem, opts: &SolveOptions) -> Result<RunReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let n = sys.cols();
    let m = sys.rows();
    let mut x = match &opts.x0 {
        Some(x0) if x0.len() != n => {
            return Err(Error::DimensionMismatch {
                context: "starting point",
                expected: n,
                found: x0.len(),
            })
        }
        Some(x0) => x0.clone(),
        None => vec![0.0; n],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let weighted = WeightedIndex::new(&sys.row_norms_sq).map_err(|e| Error::invalid(e.to_string()))?;

    let mut r = sys.residual(&x);
    let mut history = vec![norm(&r)];
    let mut iterations = 0;
    let mut converged = inf_norm(&r) <= opts.tol;
    let mut sweeps = 0;
    while !converged && sweeps < opts.max_sweeps {
        for k in 0..m {
            let j = match opts.mode {
                RowSelection::Cyclic => k,
                RowSelection::Randomized => weighted.sample(&mut rng),
                RowSelection::Uniform => rng.gen_range(0..m),
            };
            sys.project_onto_row(&mut x, j);
            iterations += 1;
        }
        sweeps += 1;
        r = sys.residual(&x);
        history.push(norm(&r));
        converged = inf_norm(&r) <= opts.tol;
    }
    Ok(RunReport {
        iterations,
        converged,
        final_residual: inf_norm(&r),
        residual_history: history,
        solution: x,
    })
}

/// An ordered sequence of unit vectors, optionally repeated periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSequence {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    periodic: bool,
}

impl UnitSequence {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        UnitSequence::build(vectors, false)
    }

    /// `e_k = vectors[k mod len]` for every `k`.
    pub fn periodic(vectors: Vec<Vec<f64>>) -> Result<Self> {
        UnitSequence::build(vectors, true)
    }

    /// Scales each nonzero vector to unit length.
    pub fn normalized(vectors: Vec<Vec<f64>>, periodic: bool) -> Result<Self> {
        let mut units = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            let s = norm(&v);
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::invalid(format!("vector {i} cannot be normalized")));
            }
            units.push(v.iter().map(|x| x / s).collect());
        }
        UnitSequence::build(units, periodic)
    }

    fn build(vectors: Vec<Vec<f64>>, periodic: bool) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("sequence needs at least one vector"))?;
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "sequence vector",
                    expected: dim,
                    found: v.len(),
                });
            }
            let defect = (norm(v) - 1.0).abs();
            if !(defect <= UNIT_TOL) {
                return Err(Error::invalid(format!("vector {i} is not a unit vector (norm defect {defect:e})")));
            }
        }
        Ok(UnitSequence {
            dim,
            vectors,
            periodic,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored vectors (one period for periodic sequences).
    pub fn base_len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// `e_k`, or `None` past the end of a finite sequence.
    pub fn get(&self, k: usize) -> Option<&[f64]> {
        if self.periodic {
            Some(&self.vectors[k % self.vectors.len()])
        } else {
            self.vectors.get(k).map(Vec::as_slice)
        }
    }

    fn check_available(&self, count: usize) -> Result<()> {
        if !self.periodic && count > self.vectors.len() {
            return Err(Error::invalid(format!(
                "{count} terms requested from a finite sequence of {}",
                self.vectors.len()
            )));
        }
        Ok(())
    }
}

/// Result of [`run_sequence`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceRun {
    pub approximation: Vec<f64>,
    /// `‖x − x_k‖`, starting with the zero approximation.
    pub errors: Vec<f64>,
}

/// Runs `x_k = x_{k−1} + e_k ⟨e_k, x − x_{k−1}⟩` for `steps` updates from `x_{−1} = 0`.
pub fn run_sequence(seq: &UnitSequence, x: &[f64], steps: usize) -> Result<SequenceRun> {
    if x.len() != seq.dim {
        return Err(Error::DimensionMismatch {
            context: "target vector",
            expected: seq.dim,
            found: x.len(),
        });
    }
    seq.check_available(steps)?;
    let mut approx = vec![0.0; seq.dim];
    let mut err: Vec<f64> = x.to_vec();
    let mut errors = Vec::with_capacity(steps + 1);
    errors.push(norm(&err));
    for k in 0..steps {
        let e = seq.get(k).expect("availability checked");
        let c = dot(e, &err);
        for ((a, r), ei) in approx.iter_mut().zip(err.iter_mut()).zip(e) {
            *a += c * ei;
            *r -= c * ei;
        }
        errors.push(norm(&err));
    }
    Ok(SequenceRun {
        approximation: approx,
        errors,
    })
}

/// Ordered orthogonal projections `P₀, P₁, …` on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSystem {
    dim: usize,
    projections: Vec<SymMatrix>,
}

impl ProjectionSystem {
    /// Validates symmetry and idempotence within [`PROJECTION_TOL`].
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        let dim = matrices
            .first()
            .map(Matrix::rows)
            .ok_or_else(|| Error::invalid("projection system needs at least one matrix"))?;
        let mut projections = Vec::with_capacity(matrices.len());
        for (index, p) in matrices.into_iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "projection matrix",
                    expected: dim,
                    found: if p.rows() != dim { p.rows() } else { p.cols() },
                });
            }
            p.check_finite()?;
            let asym = p.max_abs_diff(&p.transpose());
            let idem = p.matmul(&p).max_abs_diff(&p);
            let defect = asym.max(idem);
            if defect > PROJECTION_TOL {
                return Err(Error::NotProjection { index, defect });
            }
            projections.push(SymMatrix::symmetrized(&p)?);
        }
        Ok(ProjectionSystem { dim, projections })
    }

    /// `Pⱼ = eⱼ eⱼᵀ` for the first `count` terms of the sequence.
    pub fn rank_one(seq: &UnitSequence, count: usize) -> Result<Self> {
        seq.check_available(count)?;
        ProjectionSystem::new(
            (0..count)
                .map(|k| {
                    let e = seq.get(k).expect("availability checked");
                    Matrix::from_fn(seq.dim, seq.dim, |i, j| e[i] * e[j])
                })
                .collect(),
        )
    }

    /// `Pⱼ = 1 − eⱼ eⱼᵀ` for the first `count` terms of the sequence.
    pub fn complements(seq: &UnitSequence, count: usize) -> Result<Self> {
        seq.check_available(count)?;
        ProjectionSystem::new(
            (0..count)
                .map(|k| {
                    let e = seq.get(k).expect("availability checked");
                    Matrix::from_fn(seq.dim, seq.dim, |i, j| {
                        let id = if i == j { 1.0 } else { 0.0 };
                        id - e[i] * e[j]
                    })
                })
                .collect(),
        )
    }

    /// `Pⱼ = 1 − |k̂ⱼ⟩⟨k̂ⱼ|` where `k̂ⱼ` is the normalized kernel section at `points[j]`,
    /// written in coordinates of the span of all sections from a pivoted factor of the Gram.
    pub fn kernel_complements(k: &KernelSpec, points: &PointSet) -> Result<Self> {
        let coords = kernel_section_coordinates(k, points)?;
        ProjectionSystem::complements(&coords, coords.base_len())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn projection(&self, j: usize) -> &SymMatrix {
        &self.projections[j]
    }

    fn complement(&self, j: usize) -> Matrix {
        Matrix::identity(self.dim).sub(self.projections[j].as_matrix())
    }

    fn check_probe(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "probe vector",
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Normalized kernel sections `K_{xⱼ}/‖K_{xⱼ}‖` as unit vectors in ℝʳ, where `r` is the
/// numerical rank of the Gram over `points`; `⟨êᵢ, êⱼ⟩ = K(xᵢ,xⱼ)/√(K(xᵢ,xᵢ)K(xⱼ,xⱼ))`.
pub fn kernel_section_coordinates(k: &KernelSpec, points: &PointSet) -> Result<UnitSequence> {
    let g = gram_matrix(k, points)?;
    let f = psd_factor(&g.matrix, KERNEL_COORD_JITTER)?;
    if f.rank == 0 {
        return Err(Error::invalid("all kernel sections vanish"));
    }
    UnitSequence::normalized(f.factor.row_vecs(), false)
}

/// `Tₙ`, `Qₙ` for every step, and the energy ledger for each probe.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectDecomposition {
    pub t: Vec<Matrix>,
    pub q: Vec<Matrix>,
    pub probe_norms_sq: Vec<f64>,
    /// `captured[p][k] = ‖Qₖ xₚ‖²`.
    pub captured: Vec<Vec<f64>>,
    /// `remaining[p][n] = ‖Tₙ xₚ‖²`.
    pub remaining: Vec<Vec<f64>>,
}

impl DefectDecomposition {
    /// `‖x‖² − ‖Tₙx‖² − Σ_{k≤n}‖Qₖx‖²` for probe `p` at step `n`.
    pub fn energy_defect(&self, p: usize, n: usize) -> f64 {
        let captured: f64 = self.captured[p][..=n].iter().sum();
        self.probe_norms_sq[p] - self.remaining[p][n] - captured
    }

    /// Largest `|energy_defect|` over all probes and steps.
    pub fn max_energy_defect(&self) -> f64 {
        (0..self.probe_norms_sq.len())
            .flat_map(|p| (0..self.t.len()).map(move |n| (p, n)))
            .map(|(p, n)| self.energy_defect(p, n).abs())
            .fold(0.0, f64::max)
    }

    /// `‖T_N x‖²` for the last step: the energy the finite system leaves uncaptured.
    pub fn tail(&self, p: usize) -> f64 {
        *self.remaining[p].last().expect("nonempty system")
    }
}

fn sq(v: &[f64]) -> f64 {
    dot(v, v)
}

pub fn defect_decomposition(ps: &ProjectionSystem, probes: &[Vec<f64>]) -> Result<DefectDecomposition> {
    for x in probes {
        ps.check_probe(x)?;
    }
    let mut t: Vec<Matrix> = Vec::with_capacity(ps.len());
    let mut q: Vec<Matrix> = Vec::with_capacity(ps.len());
    for j in 0..ps.len() {
        let pj = ps.projections[j].as_matrix();
        let (tj, qj) = match t.last() {
            None => (ps.complement(0), pj.clone()),
            Some(prev) => (ps.complement(j).matmul(prev), pj.matmul(prev)),
        };
        t.push(tj);
        q.push(qj);
    }
    let captured = probes
        .iter()
        .map(|x| q.iter().map(|qk| sq(&qk.matvec(x))).collect())
        .collect();
    let remaining = probes
        .iter()
        .map(|x| t.iter().map(|tn| sq(&tn.matvec(x))).collect())
        .collect();
    Ok(DefectDecomposition {
        t,
        q,
        probe_norms_sq: probes.iter().map(|x| sq(x)).collect(),
        captured,
        remaining,
    })
}

/// Outcome of [`effectiveness_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub c: f64,
    /// Largest `c'` with `‖Pⱼ(1−Pⱼ₋₁)y‖² ≥ c'‖(1−Pⱼ₋₁)y‖²` for all `y` and `j ≥ 1`.
    pub exact_constant: f64,
    /// Per probe: the condition held for every `j ≥ 1` with `y` the probe.
    pub condition_holds: Vec<bool>,
    /// Per probe: `‖Tₙx‖² ≤ (1−c)ⁿ‖(1−P₀)x‖²` held at every `n`.
    pub decay_holds: Vec<bool>,
    /// `max ‖Tₙx‖² / ((1−c)ⁿ‖(1−P₀)x‖²)` over probes and steps with a nonzero bound.
    pub worst_decay_ratio: f64,
}

impl CertificateReport {
    /// The condition holds for all `y` and the decay bound held on every probe.
    pub fn certified(&self) -> bool {
        self.exact_constant >= self.c * (1.0 - CONDITION_REL_SLACK) && self.decay_holds.iter().all(|&d| d)
    }
}

/// Orthonormal basis (columns) of the range of a symmetric projection.
fn range_basis(p: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(&SymMatrix::symmetrized(p)?, DEFAULT_EIGEN_TOL)?;
    let cols: Vec<Vec<f64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.5)
        .map(|(k, _)| eig.vector(k))
        .collect();
    if cols.is_empty() {
        return Ok(Matrix::zeros(p.rows(), 0));
    }
    Matrix::from_columns(&cols)
}

/// `min_{j≥1} λ_min(Bⱼᵀ Pⱼ Bⱼ)` where `Bⱼ` spans the range of `1 − Pⱼ₋₁`; `1` when the
/// system has a single projection or every such range is trivial.
pub fn exact_certificate_constant(ps: &ProjectionSystem) -> Result<f64> {
    let mut best = 1.0f64;
    for j in 1..ps.len() {
        let b = range_basis(&ps.complement(j - 1))?;
        if b.cols() == 0 {
            continue;
        }
        let restricted = b.transpose().matmul(ps.projections[j].as_matrix()).matmul(&b);
        let eig = sym_eigen(&SymMatrix::symmetrized(&restricted)?, DEFAULT_EIGEN_TOL)?;
        best = best.min(eig.min_value());
    }
    Ok(best.max(0.0))
}

/// Checks the sufficient condition for effectiveness with constant `c` on each probe and
/// the resulting geometric decay of `‖Tₙx‖²`.
pub fn effectiveness_certificate(ps: &ProjectionSystem, c: f64, probes: &[Vec<f64>]) -> Result<CertificateReport> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid(format!("certificate constant must lie in (0, 1), got {c}")));
    }
    let dd = defect_decomposition(ps, probes)?;
    let complements: Vec<Matrix> = (0..ps.len()).map(|j| ps.complement(j)).collect();

    let mut condition_holds = Vec::with_capacity(probes.len());
    let mut decay_holds = Vec::with_capacity(probes.len());
    let mut worst = 0.0f64;
    for (p, y) in probes.iter().enumerate() {
        let ok = (1..ps.len()).all(|j| {
            let r = complements[j - 1].matvec(y);
            let lhs = sq(&ps.projections[j].as_matrix().matvec(&r));
            lhs >= c * sq(&r) * (1.0 - CONDITION_REL_SLACK)
        });
        condition_holds.push(ok);

        let start = dd.remaining[p][0];
        let scale = dd.probe_norms_sq[p];
        let mut decay_ok = true;
        for n in 0..ps.len() {
            let bound = (1.0 - c).powi(n as i32) * start;
            let actual = dd.remaining[p][n];
            if actual > bound * (1.0 + DECAY_REL_SLACK) + DECAY_ABS_SLACK * scale {
                decay_ok = false;
            }
            if bound > 0.0 {
                worst = worst.max(actual / bound);
            }
        }
        decay_holds.push(decay_ok);
    }
    Ok(CertificateReport {
        c,
        exact_constant: exact_certificate_constant(ps)?,
        condition_holds,
        decay_holds,
        worst_decay_ratio: worst,
    })
}

/// For a stationary kernel with `K(0) = 1`: whether `K(xⱼ − xⱼ₋₁)² ≤ 1 − c` for every
/// consecutive pair, which certifies the complement system over those points.
pub fn stationary_effectiveness(k: &KernelSpec, points: &PointSet, c: f64) -> Result<bool> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid(format!("certificate constant must lie in (0, 1), got {c}")));
    }
    if !k.is_stationary() {
        return Err(Error::NotStationary(format!("{} kernel", k.name())));
    }
    k.check_points(points)?;
    let dim = points.dim().unwrap_or(1);
    let at_zero = k.stationary_profile(&vec![0.0; dim]).expect("stationary");
    if (at_zero - 1.0).abs() > 1e-12 {
        return Err(Error::NotStationary(format!("K(0) = {at_zero}, expected 1")));
    }
    let coords: Vec<&[f64]> = points
        .iter()
        .map(|p| match p {
            Point::Real(v) => v.as_slice(),
            _ => unreachable!("checked by check_points"),
        })
        .collect();
    Ok(coords.windows(2).all(|w| {
        let t: Vec<f64> = w[1].iter().zip(w[0]).map(|(a, b)| a - b).collect();
        let kv = k.stationary_profile(&t).expect("stationary");
        kv * kv <= 1.0 - c
    }))
}

/// `g₀ = e₀`, `gₙ = eₙ − Σ_{j<n} ⟨eⱼ, eₙ⟩ gⱼ` for the first `count` terms.
pub fn dual_sequence(seq: &UnitSequence, count: usize) -> Result<Vec<Vec<f64>>> {
    seq.check_available(count)?;
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(count);
    for n in 0..count {
        let en = seq.get(n).expect("availability checked");
        let mut gn = en.to_vec();
        for (j, gj) in g.iter().enumerate() {
            let c = dot(seq.get(j).expect("availability checked"), en);
            if c != 0.0 {
                for (a, b) in gn.iter_mut().zip(gj) {
                    *a -= c * b;
                }
            }
        }
        g.push(gn);
    }
    Ok(g)
}

/// `‖x‖² − Σⱼ |⟨gⱼ, x⟩|²`.
pub fn parseval_defect(g: &[Vec<f64>], x: &[f64]) -> f64 {
    sq(x) - g.iter().map(|gj| dot(gj, x).powi(2)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;
    use proptest::prelude::*;
    use rand::Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn pair(cos: f64) -> UnitSequence {
        UnitSequence::periodic(vec![vec![1.0, 0.0], vec![cos, (1.0 - cos * cos).sqrt()]]).unwrap()
    }

    /// Minimum-norm least-squares solution `V Λ⁺ Vᵀ Aᵀ b`.
    fn pinv_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
        let eig = sym_eigen(&a.gram(), DEFAULT_EIGEN_TOL).unwrap();
        let atb = a.tr_matvec(b);
        let cutoff = 1e-12 * eig.max_value();
        let mut x = vec![0.0; a.cols()];
        for (k, &l) in eig.values.iter().enumerate() {
            if l > cutoff {
                let v = eig.vector(k);
                let c = dot(&v, &atb) / l;
                x.iter_mut().zip(&v).for_each(|(xi, vi)| *xi += c * vi);
            }
        }
        x
    }

    #[test]
    fn zero_row_rejected() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(LinearSystem::new(a, vec![1.0, 0.0]), Err(Error::ZeroRow { row: 1 })));
    }

    #[test]
    fn identity_converges_in_one_sweep() {
        let sys = LinearSystem::new(Matrix::identity(2), vec![1.0, 2.0]).unwrap();
        let r = solve_classical(&sys, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 2);
        assert_eq!(r.solution, vec![1.0, 2.0]);
        assert_eq!(r.residual_history.len(), 2);
    }

    #[test]
    fn triangular_example() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let sys = LinearSystem::new(a, vec![1.0, 2.0]).unwrap();
        let r = solve_classical(&sys, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.solution[0] - 1.0).abs() <= 1e-10 && (r.solution[1] - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn random_consistent_systems_reach_min_norm_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for mode in [RowSelection::Cyclic, RowSelection::Randomized, RowSelection::Uniform] {
            let a = Matrix::from_vec(50, 20, rand_vec(&mut rng, 1000)).unwrap();
            let x_true = rand_vec(&mut rng, 20);
            let b = a.matvec(&x_true);
            let oracle = pinv_solve(&a, &b);
            let sys = LinearSystem::new(a, b).unwrap();
            let opts = SolveOptions {
                mode,
                seed: 11,
                ..SolveOptions::default()
            };
            let r = solve_classical(&sys, &opts).unwrap();
            assert!(r.converged, "{mode:?}");
            assert!(r.final_residual <= 1e-8);
            let err = r.solution.iter().zip(&oracle).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err <= 1e-6, "{mode:?}: {err}");
        }
    }

    #[test]
    fn underdetermined_system_gives_min_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::from_vec(5, 12, rand_vec(&mut rng, 60)).unwrap();
        let b = rand_vec(&mut rng, 5);
        let oracle = pinv_solve(&a, &b);
        let r = solve_classical(&LinearSystem::new(a, b).unwrap(), &SolveOptions::default()).unwrap();
        assert!(r.converged);
        for (x, y) in r.solution.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn inconsistent_system_stops_at_sweep_cap() {
        let a = Matrix::from_rows(&[[1.0], [1.0]]).unwrap();
        let sys = LinearSystem::new(a, vec![0.0, 1.0]).unwrap();
        let opts = SolveOptions {
            max_sweeps: 7,
            ..SolveOptions::default()
        };
        let r = solve_classical(&sys, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 14);
        assert_eq!(r.residual_history.len(), 8);
    }

    #[test]
    fn report_json_keys() {
        let sys = LinearSystem::new(Matrix::identity(2), vec![1.0, 2.0]).unwrap();
        let r = solve_classical(&sys, &SolveOptions::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["converged", "final_residual", "iterations", "residual_history"]);
    }

    #[test]
    fn solver_argument_errors() {
        let sys = LinearSystem::new(Matrix::identity(2), vec![1.0, 2.0]).unwrap();
        let bad_tol = SolveOptions {
            tol: 0.0,
            ..SolveOptions::default()
        };
        assert!(solve_classical(&sys, &bad_tol).is_err());
        let bad_x0 = SolveOptions {
            x0: Some(vec![0.0]),
            ..SolveOptions::default()
        };
        assert!(solve_classical(&sys, &bad_x0).is_err());
        assert!(LinearSystem::new(Matrix::identity(2), vec![1.0]).is_err());
        assert!("sideways".parse::<RowSelection>().is_err());
        assert_eq!("randomized".parse::<RowSelection>().unwrap(), RowSelection::Randomized);
    }

    #[test]
    fn sequence_examples() {
        let onb = UnitSequence::new(vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let x = [0.3, -2.0, 5.0];
        let run = run_sequence(&onb, &x, 3).unwrap();
        assert_eq!(run.approximation, x.to_vec());
        assert_eq!(*run.errors.last().unwrap(), 0.0);

        let single = UnitSequence::periodic(vec![vec![0.6, 0.8]]).unwrap();
        let x = [1.0, 1.0];
        let run = run_sequence(&single, &x, 5).unwrap();
        let stall = (1.0f64 - 1.4f64 * 1.4 / 2.0).sqrt() * 2f64.sqrt();
        for e in &run.errors[1..] {
            assert!((e - stall).abs() < 1e-12);
        }

        let run = run_sequence(&pair(0.6), &[0.4, -0.9], 20).unwrap();
        for k in 2..run.errors.len() {
            assert!((run.errors[k] / run.errors[k - 1] - 0.6).abs() < 1e-9);
        }
        assert!(run_sequence(&onb, &x, 3).is_err());
        assert!(run_sequence(&onb, &[0.0; 3], 4).is_err());
        assert!(UnitSequence::new(vec![vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn kaczmarz_update_satisfies_current_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = Matrix::from_vec(8, 5, rand_vec(&mut rng, 40)).unwrap();
        let b = rand_vec(&mut rng, 8);
        let sys = LinearSystem::new(a, b).unwrap();
        let mut x = rand_vec(&mut rng, 5);
        for k in 0..40 {
            let j = k % 8;
            sys.project_onto_row(&mut x, j);
            assert!((dot(sys.matrix().row(j), &x) - sys.rhs()[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn randomized_mode_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Matrix::from_vec(30, 10, rand_vec(&mut rng, 300)).unwrap();
        let b = a.matvec(&rand_vec(&mut rng, 10));
        let sys = LinearSystem::new(a, b).unwrap();
        let opts = SolveOptions {
            mode: RowSelection::Randomized,
            seed: 99,
            max_sweeps: 5,
            ..SolveOptions::default()
        };
        let r1 = solve_classical(&sys, &opts).unwrap();
        let r2 = solve_classical(&sys, &opts).unwrap();
        assert_eq!(r1, r2);
        let other = SolveOptions { seed: 100, ..opts };
        assert_ne!(solve_classical(&sys, &other).unwrap().solution, r1.solution);
    }

    #[test]
    fn projection_validation() {
        let not_idem = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.5]]).unwrap();
        assert!(matches!(
            ProjectionSystem::new(vec![Matrix::identity(2), not_idem]),
            Err(Error::NotProjection { index: 1, .. })
        ));
        let oblique = Matrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(ProjectionSystem::new(vec![oblique]), Err(Error::NotProjection { .. })));
        assert!(ProjectionSystem::new(vec![]).is_err());
    }

    #[test]
    fn onb_rank_one_defect_is_complement_projection() {
        let seq = UnitSequence::new(vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]).unwrap();
        let ps = ProjectionSystem::rank_one(&seq, 2).unwrap();
        let dd = defect_decomposition(&ps, &[]).unwrap();
        let expected = Matrix::from_diag(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(dd.t[1], expected);
    }

    #[test]
    fn energy_identity_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vecs: Vec<Vec<f64>> = (0..30).map(|_| rand_vec(&mut rng, 6)).collect();
        let seq = UnitSequence::normalized(vecs, false).unwrap();
        let probes: Vec<Vec<f64>> = (0..20).map(|_| rand_vec(&mut rng, 6)).collect();
        for ps in [
            ProjectionSystem::rank_one(&seq, 30).unwrap(),
            ProjectionSystem::complements(&seq, 30).unwrap(),
        ] {
            let dd = defect_decomposition(&ps, &probes).unwrap();
            assert!(dd.max_energy_defect() <= 1e-10);
        }
    }

    #[test]
    fn kernel_complement_defects_have_rank_at_most_two() {
        let pts = PointSet::from_scalars(&(0..12).map(|i| 0.5 * i as f64).collect::<Vec<_>>());
        let ps = ProjectionSystem::kernel_complements(&KernelSpec::Sinc, &pts).unwrap();
        let dd = defect_decomposition(&ps, &[]).unwrap();
        for q in &dd.q[1..] {
            let sv = singular_values(q).unwrap();
            assert!(sv.len() < 3 || sv[2] <= 1e-10, "{:?}", &sv[..3]);
        }
    }

    #[test]
    fn certificate_examples() {
        let probes = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.3, 0.0, -0.5]];
        let seq = UnitSequence::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let ps = ProjectionSystem::rank_one(&seq, 2).unwrap();
        let rep = effectiveness_certificate(&ps, 0.1, &probes).unwrap();
        assert!(!rep.condition_holds[2]);
        assert_eq!(rep.exact_constant, 0.0);
        assert!(!rep.certified());

        // 2-d periodic pair: the decay bound holds with equality
        let ps = ProjectionSystem::rank_one(&pair(0.6), 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let probes: Vec<Vec<f64>> = (0..10).map(|_| rand_vec(&mut rng, 2)).collect();
        let rep = effectiveness_certificate(&ps, 0.64, &probes).unwrap();
        assert!((rep.exact_constant - 0.64).abs() < 1e-12);
        assert!(rep.certified());
        assert!((rep.worst_decay_ratio - 1.0).abs() < 1e-8);

        assert!(effectiveness_certificate(&ps, 1.0, &probes).is_err());
    }

    #[test]
    fn sinc_half_spacing_certificate() {
        let pts = PointSet::from_scalars(&(0..15).map(|i| 0.5 * i as f64).collect::<Vec<_>>());
        let ps = ProjectionSystem::kernel_complements(&KernelSpec::Sinc, &pts).unwrap();
        let expected = 1.0 - (2.0 / std::f64::consts::PI).powi(2);
        assert!((exact_certificate_constant(&ps).unwrap() - expected).abs() < 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probes: Vec<Vec<f64>> = (0..10).map(|_| rand_vec(&mut rng, ps.dim())).collect();
        let rep = effectiveness_certificate(&ps, 0.5947, &probes).unwrap();
        assert!(rep.certified());
        assert!(rep.condition_holds.iter().all(|&h| h));
    }

    #[test]
    fn stationary_effectiveness_examples() {
        let ints = PointSet::from_scalars(&[0.0, 1.0, 2.0, 3.0]);
        assert!(stationary_effectiveness(&KernelSpec::Sinc, &ints, 0.999).unwrap());
        let halves = PointSet::from_scalars(&[0.0, 0.5, 1.0, 1.5]);
        assert!(stationary_effectiveness(&KernelSpec::Sinc, &halves, 0.59).unwrap());
        assert!(!stationary_effectiveness(&KernelSpec::Sinc, &halves, 0.60).unwrap());
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert!(stationary_effectiveness(&g, &ints, 0.6).unwrap());
        let inter = KernelSpec::intersection(vec![1.0]).unwrap();
        let sets = PointSet::from_sets(&[vec![0usize]]);
        assert!(matches!(stationary_effectiveness(&inter, &sets, 0.5), Err(Error::NotStationary(_))));
        let raw_box = KernelSpec::pw_box(vec![1.0], false).unwrap();
        assert!(matches!(stationary_effectiveness(&raw_box, &ints, 0.5), Err(Error::NotStationary(_))));
    }

    #[test]
    fn dual_sequence_examples() {
        let onb = UnitSequence::new(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let g = dual_sequence(&onb, 2).unwrap();
        assert_eq!(g, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);

        // operator-product oracle: gₙ = (1−P₀)⋯(1−Pₙ₋₁) eₙ
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let seq = UnitSequence::normalized((0..8).map(|_| rand_vec(&mut rng, 4)).collect(), false).unwrap();
        let g = dual_sequence(&seq, 8).unwrap();
        for n in 0..8 {
            let mut v = seq.get(n).unwrap().to_vec();
            for j in (0..n).rev() {
                let e = seq.get(j).unwrap();
                let c = dot(e, &v);
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
            }
            for (a, b) in v.iter().zip(&g[n]) {
                assert!((a - b).abs() <= 1e-12);
            }
        }

        let g = dual_sequence(&pair(0.6), 60).unwrap();
        for _ in 0..20 {
            let x = rand_vec(&mut rng, 2);
            let d = parseval_defect(&g, &x);
            assert!(d.abs() <= 1e-6);
        }
        assert!(dual_sequence(&onb, 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn consistent_residual_is_nonincreasing_per_sweep(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Matrix::from_vec(12, 6, rand_vec(&mut rng, 72)).unwrap();
            let x_true = rand_vec(&mut rng, 6);
            let b = a.matvec(&x_true);
            let sys = LinearSystem::new(a, b).unwrap();
            // distance to the solution contracts sweep by sweep
            let mut x = vec![0.0; 6];
            let mut prev = norm(&x_true);
            for _ in 0..20 {
                for j in 0..12 {
                    sys.project_onto_row(&mut x, j);
                }
                let d: f64 = x.iter().zip(&x_true).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                prop_assert!(d <= prev + 1e-12);
                prev = d;
            }
        }

        #[test]
        fn dual_defect_is_nonnegative_and_certified(seed in any::<u64>(), cos in 0.0f64..0.8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seq = pair(cos);
            let c = 1.0 - cos * cos;
            let n = 25;
            let g = dual_sequence(&seq, n).unwrap();
            let x = rand_vec(&mut rng, 2);
            let d = parseval_defect(&g, &x);
            let bound = (1.0 - c).powi(n as i32 - 1) * dot(&x, &x);
            prop_assert!(d >= -1e-12);
            prop_assert!(d <= bound + 1e-12);
        }

        #[test]
        fn energy_identity_holds(seed in any::<u64>(), len in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seq = UnitSequence::normalized((0..len).map(|_| rand_vec(&mut rng, 4)).collect(), false).unwrap();
            let ps = ProjectionSystem::complements(&seq, len).unwrap();
            let probes: Vec<Vec<f64>> = (0..5).map(|_| rand_vec(&mut rng, 4)).collect();
            prop_assert!(defect_decomposition(&ps, &probes).unwrap().max_energy_defect() <= 1e-10);
        }
    }
}
