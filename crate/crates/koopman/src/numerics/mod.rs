//! Dense linear-algebra and optimization kernels shared by the fitting and
//! control modules. All operations are pure functions of their inputs.

mod eig;
mod lstsq;
mod qp;
mod svd;

pub use eig::{eig_dense, eig_dense_complex, EigResult};
pub use lstsq::{lstsq, lstsq_complex, lstsq_vec, ridge_solve};
pub use qp::{minimize_box, solve_box_qp};
pub use svd::{svd_truncated, RankRule, SvdResult};

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default relative cutoff used wherever a pseudo-inverse needs one.
pub const DEFAULT_RCOND: f64 = 1e-12;

pub(crate) fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "matrix `{name}` contains NaN or Inf entries"
        )));
    }
    Ok(())
}

pub(crate) fn check_finite_vec(name: &str, v: &DVector<f64>) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "vector `{name}` contains NaN or Inf entries"
        )));
    }
    Ok(())
}

/// Numerical rank of a real matrix: singular values above `tol_rel * s_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol_rel: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol_rel * smax).count()
}

/// Numerical rank of a complex matrix via its real 2n x 2m embedding
/// [[Re, -Im], [Im, Re]], whose rank is exactly twice the complex rank.
pub fn numerical_rank_complex(m: &DMatrix<Complex64>, tol_rel: f64) -> usize {
    let (r, c) = m.shape();
    let mut emb = DMatrix::<f64>::zeros(2 * r, 2 * c);
    for j in 0..c {
        for i in 0..r {
            let z = m[(i, j)];
            emb[(i, j)] = z.re;
            emb[(i, j + c)] = -z.im;
            emb[(i + r, j)] = z.im;
            emb[(i + r, j + c)] = z.re;
        }
    }
    numerical_rank(&emb, tol_rel) / 2
}

/// Promote a real matrix to complex storage.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// Real part of a complex matrix.
pub fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Max absolute imaginary entry of a complex matrix.
pub fn max_imag(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Row-major nested-vec view of a real matrix (used by the JSON schemas).
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Rebuild a real matrix from row-major nested vecs.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}
