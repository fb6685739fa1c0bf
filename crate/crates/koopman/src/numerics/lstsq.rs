//! Least-squares solves through the truncated-SVD pseudo-inverse.

use super::{check_finite, svd_truncated, RankRule};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Minimum-Frobenius-norm solution of `min || b - a * sol ||_F`.
///
/// Singular values at or below `rcond * s_max` are discarded.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::InvalidInput(format!(
            "lstsq row mismatch: a is {}x{}, b is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    check_finite("lstsq lhs", a)?;
    check_finite("lstsq rhs", b)?;
    let svd = svd_truncated(a, RankRule::Threshold(0.0))?;
    let cutoff = rcond * svd.s.get(0).copied().unwrap_or(0.0);
    let rank = svd.s.iter().filter(|&&s| s > cutoff).count();
    let mut ub = svd.u.columns(0, rank).transpose() * b;
    for i in 0..rank {
        ub.row_mut(i).scale_mut(1.0 / svd.s[i]);
    }
    Ok(svd.v.columns(0, rank) * ub)
}

/// Vector right-hand-side convenience wrapper.
pub fn lstsq_vec(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    Ok(DVector::from_column_slice(lstsq(a, &bm, rcond)?.as_slice()))
}

/// Complex least squares via the real block embedding
/// [[Re a, -Im a], [Im a, Re a]] [Re x; Im x] = [Re b; Im b].
pub fn lstsq_complex(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    rcond: f64,
) -> Result<DMatrix<Complex64>> {
    let (m, n) = a.shape();
    if m != b.nrows() {
        return Err(Error::InvalidInput("lstsq_complex row mismatch".into()));
    }
    let mut ar = DMatrix::<f64>::zeros(2 * m, 2 * n);
    for j in 0..n {
        for i in 0..m {
            let z = a[(i, j)];
            ar[(i, j)] = z.re;
            ar[(i, j + n)] = -z.im;
            ar[(i + m, j)] = z.im;
            ar[(i + m, j + n)] = z.re;
        }
    }
    let k = b.ncols();
    let mut br = DMatrix::<f64>::zeros(2 * m, k);
    for j in 0..k {
        for i in 0..m {
            br[(i, j)] = b[(i, j)].re;
            br[(i + m, j)] = b[(i, j)].im;
        }
    }
    let x = lstsq(&ar, &br, rcond)?;
    Ok(DMatrix::from_fn(n, k, |i, j| {
        Complex64::new(x[(i, j)], x[(i + n, j)])
    }))
}

/// Tikhonov-regularized solve of `sol * a ~ b` in the form
/// `sol = b a^T (a a^T + gamma I)^{-1}`, shared by the lifted regressions.
///
/// `gamma == 0` falls back to the pseudo-inverse path.
pub fn ridge_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::InvalidInput(format!(
            "ridge_solve column mismatch: a is {}x{}, b is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if gamma == 0.0 {
        // sol^T solves min || b^T - a^T sol^T ||
        let sol_t = lstsq(&a.transpose(), &b.transpose(), super::DEFAULT_RCOND)?;
        return Ok(sol_t.transpose());
    }
    check_finite("ridge lhs", a)?;
    check_finite("ridge rhs", b)?;
    let p = a.nrows();
    let mut gram = a * a.transpose();
    for i in 0..p {
        gram[(i, i)] += gamma;
    }
    let rhs = a * b.transpose(); // p x rows(b)
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("ridge normal equations not PD".into()))?;
    Ok(chol.solve(&rhs).transpose())
}
