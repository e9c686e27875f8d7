//! Mean-zero Gaussian processes with a prescribed covariance kernel, the operator-valued
//! process `W = Σ Qₙ Zₙ`, and the set-indexed Wiener process for intersection kernels.
//!
//! Standard normals come from the Box–Muller transform applied to a ChaCha8 stream.
//! Draw `i` of a sampler seeded with `s` reads stream `i` of the generator seeded with
//! `s`, so every draw is independent of scheduling and the output is fully determined
//! by the seed, with or without the `parallel` feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, FiniteMeasureSpace, KernelSpec, Point, PointSet};
use crate::linalg::{dot, psd_factor, Matrix, SymMatrix, DEFAULT_JITTER};
use crate::par;

/// Upper bound on `|z|` for a Box–Muller variate built from 53-bit uniforms.
const BOX_MULLER_BOUND: f64 = 8.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_samples: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        SamplerConfig { seed, n_samples }
    }

    /// Monte Carlo tolerance `5/√N` for unit-scale second moments.
    pub fn tolerance(&self) -> f64 {
        5.0 / (self.n_samples as f64).sqrt()
    }
}

/// `count` standard normal variates from stream `draw` of the generator seeded by `seed`.
pub fn standard_normals(seed: u64, draw: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u1 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(count);
    out
}

/// Realizations of a process over a finite set of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSample {
    pub atoms: PointSet,
    /// One realization per row, one atom per column.
    pub draws: Matrix,
}

impl ProcessSample {
    pub fn n_samples(&self) -> usize {
        self.draws.rows()
    }

    /// Mean of each column.
    pub fn empirical_mean(&self) -> Vec<f64> {
        let n = self.n_samples() as f64;
        let mut s = vec![0.0; self.draws.cols()];
        for i in 0..self.draws.rows() {
            s.iter_mut().zip(self.draws.row(i)).for_each(|(a, b)| *a += b);
        }
        s.iter().map(|v| v / n).collect()
    }

    /// Reorders atoms (and columns) so that new atom `k` is old atom `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> ProcessSample {
        ProcessSample {
            atoms: self.atoms.permuted(perm),
            draws: Matrix::from_fn(self.draws.rows(), perm.len(), |i, k| self.draws[(i, perm[k])]),
        }
    }
}

fn check_config(cfg: &SamplerConfig) -> Result<()> {
    if cfg.n_samples == 0 {
        return Err(Error::invalid("sampler needs at least one sample"));
    }
    Ok(())
}

fn assemble(rows: Vec<Vec<f64>>, cols: usize) -> Matrix {
    let n = rows.len();
    Matrix::from_vec(n, cols, rows.into_iter().flatten().collect()).expect("rectangular draws")
}

/// Draws `L z` with `L Lᵀ` the Gram over `pts` (pivoted factor) and `z` standard normal.
pub fn sample_gp(k: &KernelSpec, pts: &PointSet, cfg: &SamplerConfig) -> Result<ProcessSample> {
    check_config(cfg)?;
    let g = gram_matrix(k, pts)?;
    let f = psd_factor(&g.matrix, DEFAULT_JITTER)?;
    let l = &f.factor;
    let rows = par::map_range(cfg.n_samples, |i| {
        let z = standard_normals(cfg.seed, i as u64, f.rank);
        l.matvec(&z)
    });
    Ok(ProcessSample {
        atoms: pts.clone(),
        draws: assemble(rows, pts.len()),
    })
}

/// `(1/N) Dᵀ D` over the draws `D`, without centering.
pub fn empirical_covariance(s: &ProcessSample) -> Result<SymMatrix> {
    let n = s.n_samples();
    if n < 2 {
        return Err(Error::invalid("empirical covariance needs at least two draws"));
    }
    let g = s.draws.gram();
    Ok(SymMatrix::from_fn(g.n(), |i, j| g.get(i, j) / n as f64))
}

/// Second-moment comparison for one probe pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    /// `⟨u, v⟩`.
    pub target: f64,
    /// Sample mean of `⟨W u, W v⟩`.
    pub empirical: f64,
    pub deviation: f64,
    /// `‖T_N u‖ ‖T_N v‖`, bounding the part of `⟨u, v⟩` the finite family misses.
    pub truncation_tail: f64,
    /// `5‖u‖‖v‖/√N + truncation_tail`.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorProcessReport {
    pub n_samples: usize,
    /// Largest `|Σ⟨Qₙu, Qₙv⟩ + ⟨T_N u, T_N v⟩ − ⟨u, v⟩|` over the probe pairs.
    pub precondition_defect: f64,
    pub pairs: Vec<PairReport>,
}

/// Samples `W = Σₙ Zₙ Qₙ` with i.i.d. standard normal `Zₙ` and compares `E⟨Wu, Wv⟩`
/// with `⟨u, v⟩` on each probe pair.
///
/// `remainder` is the operator `T_N` carrying whatever the finite family misses (for
/// Kaczmarz defects, the last `Tₙ`); `None` means the family is claimed complete. The
/// family must first satisfy `Σₙ⟨Qₙu, Qₙv⟩ + ⟨T_N u, T_N v⟩ = ⟨u, v⟩` on every pair up to
/// `1e-8`; otherwise [`Error::ParsevalDefect`] is returned.
pub fn operator_process_check(
    q: &[Matrix],
    remainder: Option<&Matrix>,
    probes: &[(Vec<f64>, Vec<f64>)],
    cfg: &SamplerConfig,
) -> Result<OperatorProcessReport> {
    check_config(cfg)?;
    let dim = q
        .first()
        .map(Matrix::cols)
        .ok_or_else(|| Error::invalid("operator family is empty"))?;
    for qn in q.iter().chain(remainder) {
        if qn.rows() != dim || qn.cols() != dim {
            return Err(Error::DimensionMismatch {
                context: "operator family",
                expected: dim,
                found: qn.rows().max(qn.cols()),
            });
        }
    }
    for (u, v) in probes {
        for w in [u, v] {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "probe vector",
                    expected: dim,
                    found: w.len(),
                });
            }
        }
    }

    struct Prepared {
        qu: Vec<Vec<f64>>,
        qv: Vec<Vec<f64>>,
        target: f64,
        tail: f64,
        scale: f64,
    }
    let mut prepared = Vec::with_capacity(probes.len());
    let mut worst = 0.0f64;
    for (u, v) in probes {
        let qu: Vec<Vec<f64>> = q.iter().map(|m| m.matvec(u)).collect();
        let qv: Vec<Vec<f64>> = q.iter().map(|m| m.matvec(v)).collect();
        let target = dot(u, v);
        let captured: f64 = qu.iter().zip(&qv).map(|(a, b)| dot(a, b)).sum();
        let (missed, tail) = match remainder {
            Some(t) => {
                let (tu, tv) = (t.matvec(u), t.matvec(v));
                (dot(&tu, &tv), (dot(&tu, &tu) * dot(&tv, &tv)).sqrt())
            }
            None => (0.0, 0.0),
        };
        let defect = (captured + missed - target).abs();
        if defect > 1e-8 {
            return Err(Error::ParsevalDefect { defect });
        }
        worst = worst.max(defect);
        prepared.push(Prepared {
            qu,
            qv,
            target,
            tail,
            scale: (dot(u, u) * dot(v, v)).sqrt(),
        });
    }

    let per_draw: Vec<Vec<f64>> = par::map_range(cfg.n_samples, |i| {
        let z = standard_normals(cfg.seed, i as u64, q.len());
        prepared
            .iter()
            .map(|p| {
                let mut wu = vec![0.0; dim];
                let mut wv = vec![0.0; dim];
                for ((zn, a), b) in z.iter().zip(&p.qu).zip(&p.qv) {
                    wu.iter_mut().zip(a).for_each(|(w, x)| *w += zn * x);
                    wv.iter_mut().zip(b).for_each(|(w, x)| *w += zn * x);
                }
                dot(&wu, &wv)
            })
            .collect()
    });

    let n = cfg.n_samples as f64;
    let pairs = prepared
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let empirical = per_draw.iter().map(|d| d[k]).sum::<f64>() / n;
            let deviation = (empirical - p.target).abs();
            let tolerance = cfg.tolerance() * p.scale + p.tail;
            PairReport {
                target: p.target,
                empirical,
                deviation,
                truncation_tail: p.tail,
                tolerance,
                within_tolerance: deviation <= tolerance,
            }
        })
        .collect();
    Ok(OperatorProcessReport {
        n_samples: cfg.n_samples,
        precondition_defect: worst,
        pairs,
    })
}

/// Samples `W_A = Σ_{i∈A} √νᵢ ξᵢ` over the given subsets with shared i.i.d. standard
/// normal `ξᵢ`, so that `E[W_A W_B] = ν(A ∩ B)`.
///
/// Each term `√νᵢ ξᵢ` is rounded to a dyadic grid fine enough that every partial sum is
/// exact in floating point, which makes `W_{A∪B} = W_A + W_B` hold bit for bit whenever
/// `A` and `B` are disjoint.
pub fn wiener_set_process(space: &FiniteMeasureSpace, sets: &[Vec<usize>], cfg: &SamplerConfig) -> Result<ProcessSample> {
    check_config(cfg)?;
    let atoms = PointSet::from_sets(sets);
    for p in atoms.iter() {
        if let Point::Set(s) = p {
            if let Some(&bad) = s.iter().find(|&&i| i >= space.len()) {
                return Err(Error::Domain(format!(
                    "element {bad} outside the ground set of size {}",
                    space.len()
                )));
            }
        }
    }
    let roots: Vec<f64> = space.weights().iter().map(|w| w.sqrt()).collect();
    let quantum = dyadic_quantum(BOX_MULLER_BOUND * roots.iter().sum::<f64>());
    let members: Vec<&[usize]> = atoms
        .iter()
        .map(|p| match p {
            Point::Set(s) => s.as_slice(),
            _ => unreachable!("built from sets"),
        })
        .collect();
    let rows = par::map_range(cfg.n_samples, |i| {
        let xi = standard_normals(cfg.seed, i as u64, space.len());
        let terms: Vec<f64> = roots
            .iter()
            .zip(&xi)
            .map(|(r, x)| (r * x / quantum).round() * quantum)
            .collect();
        members.iter().map(|s| s.iter().map(|&j| terms[j]).sum()).collect()
    });
    Ok(ProcessSample {
        draws: assemble(rows, atoms.len()),
        atoms,
    })
}

/// Smallest power of two `q` with `bound < 2⁵² q`: multiples of `q` up to `bound` in
/// magnitude add exactly.
fn dyadic_quantum(bound: f64) -> f64 {
    if bound <= 0.0 {
        return 1.0;
    }
    let mut q = 2f64.powi(bound.log2().ceil() as i32 - 52);
    while bound >= q * 2f64.powi(52) {
        q *= 2.0;
    }
    q
}
