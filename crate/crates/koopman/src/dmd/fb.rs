//! Forward-backward DMD: average the forward operator with the inverse of
//! the backward operator on the shared rank-r subspace to cancel the
//! systematic eigenvalue bias caused by measurement noise.

use super::{assemble_model, validate_pair, DmdModel};
use crate::numerics::{svd_truncated, RankRule};
use crate::{Error, Result};
use nalgebra::DMatrix;

pub fn fit_fb_dmd(
    x: &DMatrix<f64>,
    xp: &DMatrix<f64>,
    dt: f64,
    rule: RankRule,
) -> Result<DmdModel> {
    validate_pair(x, xp)?;
    if dt <= 0.0 {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    let fwd = svd_truncated(x, rule)?;
    let r = fwd.rank;
    if r == 0 {
        return Err(Error::DegenerateData("rank rule retained nothing".into()));
    }

    // forward projected operator on span(U_r)
    let mut xvs = xp * &fwd.v;
    for j in 0..r {
        xvs.column_mut(j).scale_mut(1.0 / fwd.s[j]);
    }
    let a1 = fwd.u.transpose() * &xvs;

    // backward fit X ~ A2 X', projected onto the same subspace
    let bwd = svd_truncated(xp, RankRule::Threshold(0.0))?;
    if bwd.rank < r || bwd.s[r - 1] <= 1e-12 * bwd.s[0] {
        return Err(Error::BackwardSingular);
    }
    let mut xv2 = x * bwd.v.columns(0, r);
    for j in 0..r {
        xv2.column_mut(j).scale_mut(1.0 / bwd.s[j]);
    }
    // A2 restricted to span(U_r): U_r^T A2 U_r with A2 = X V' S'^-1 U'^T
    let a2 = (fwd.u.transpose() * &xv2) * (bwd.u.columns(0, r).transpose() * &fwd.u);
    let a2_inv = a2.clone().try_inverse().ok_or(Error::BackwardSingular)?;

    let atilde = (a1 + a2_inv) * 0.5;
    // modes lifted through the projection basis: the averaged operator is
    // defined on the subspace, not as X' X^+
    assemble_model(
        atilde,
        fwd.u.clone(),
        &fwd.u.clone(),
        &x.column(0).into_owned(),
        dt,
    )
}
