//! Companion-matrix (Krylov) view of DMD: X' = X S with S a shift matrix
//! whose last column is the best-fit combination of earlier snapshots.

use crate::numerics::{eig_dense, svd_truncated, RankRule, DEFAULT_RCOND};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct CompanionDmd {
    /// m x m companion matrix: ones on the subdiagonal, coefficients in the
    /// last column.
    pub s: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// || x_{m+1} - X a ||, the only residual the shift structure admits.
    pub residual: f64,
}

/// Fit the companion matrix from a sequential snapshot series (columns
/// x_1..x_{m+1}). `ridge` Tikhonov-regularizes the last-column solve.
pub fn companion_dmd(series: &DMatrix<f64>, ridge: f64) -> Result<CompanionDmd> {
    if series.ncols() < 2 {
        return Err(Error::InvalidInput(
            "companion DMD needs at least 2 snapshots".into(),
        ));
    }
    crate::numerics::check_finite("series", series)?;
    let m = series.ncols() - 1;
    let x = series.columns(0, m).into_owned();
    let target = series.column(m).into_owned();

    let svd = svd_truncated(&x, RankRule::Threshold(0.0))?;
    let smax = svd.s.get(0).copied().unwrap_or(0.0);
    let ut_b = svd.u.transpose() * &target;
    let mut coeff = nalgebra::DVector::<f64>::zeros(svd.rank);
    for i in 0..svd.rank {
        let s = svd.s[i];
        let filter = if ridge > 0.0 {
            s / (s * s + ridge)
        } else if s > DEFAULT_RCOND * smax {
            1.0 / s
        } else {
            0.0
        };
        coeff[i] = filter * ut_b[i];
    }
    let a = &svd.v * coeff;

    let mut s_mat = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        s_mat[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        s_mat[(i, m - 1)] = a[i];
    }
    let residual = (&x * &a - &target).norm();
    let eig = eig_dense(&s_mat, false)?;
    Ok(CompanionDmd {
        s: s_mat,
        eigenvalues: eig.values,
        residual,
    })
}
