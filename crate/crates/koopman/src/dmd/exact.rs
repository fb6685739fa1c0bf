//! Exact DMD: best-fit linear operator via rank-r SVD projection.

use super::{assemble_model, validate_pair, DmdModel};
use crate::numerics::{svd_truncated, RankRule};
use crate::{Error, Result};
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelWarning {
    /// |Im omega| * dt is within 10% of the Nyquist limit pi.
    NyquistAliasing { mode: usize },
    /// Mode at lambda = 0 taken from the projected eigenproblem.
    NonExactZeroMode { mode: usize },
    /// Backward operator was singular; forward fit returned instead.
    BackwardFallback,
}

/// Fit `x_{k+1} ~ A x_k` from paired snapshots and return the spectral
/// expansion of the projected operator.
pub fn fit_exact_dmd(
    x: &DMatrix<f64>,
    xp: &DMatrix<f64>,
    dt: f64,
    rule: RankRule,
) -> Result<DmdModel> {
    validate_pair(x, xp)?;
    if dt <= 0.0 {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    let svd = svd_truncated(x, rule)?;
    if svd.rank == 0 {
        return Err(Error::DegenerateData("rank rule retained nothing".into()));
    }
    // X' V_r S_r^-1, shared by the projected operator and the exact modes
    let mut xvs = xp * &svd.v;
    for j in 0..svd.rank {
        xvs.column_mut(j).scale_mut(1.0 / svd.s[j]);
    }
    let atilde = svd.u.transpose() * &xvs;
    assemble_model(atilde, svd.u.clone(), &xvs, &x.column(0).into_owned(), dt)
}
