//! Numerical toolkit for positive-definite kernels and the linear algebra around them.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense symmetric eigendecomposition (cyclic Jacobi), pivoted PSD
//!   factorization and SPD solves.
//! * [`kernels`]: closed-form kernel families, Gram matrices, the induced metric and
//!   sampling bounds for restrictions to finite point sets.
//! * [`rkhs`]: finite kernel expansions, orthogonal projections onto point sets,
//!   kernel ridge regression and spectral factorization against discrete measures.
//! * [`frames`]: analysis/synthesis operators, frame bounds, frame operators and the
//!   truncation residual.
//! * [`kaczmarz`]: classical and randomized Kaczmarz, projection-valued defect
//!   operators, effectiveness certificates and dual Parseval sequences.
//! * [`pca`]: the Karhunen-Loève pipeline used for image compression.
//! * [`gaussian`]: Gaussian processes with prescribed kernel covariance.
//! * [`io`]: PGM images and CSV matrices.
//!
//! With the default `parallel` feature the data-parallel inner loops (Gram assembly,
//! matrix products, covariance accumulation, Monte Carlo draws) run on rayon. Results
//! are bit-identical with the feature disabled.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod frames;
pub mod gaussian;
pub mod io;
pub mod kaczmarz;
pub mod kernels;
pub mod linalg;
pub mod pca;
pub mod rkhs;

mod par;

pub use error::{Error, Result};
pub use kernels::{KernelSpec, Point, PointSet};
pub use linalg::{Matrix, SymMatrix};
