//! DMD with control: joint least squares for (A, B) over stacked
//! state-input snapshots.

use crate::numerics::{lstsq, numerical_rank, svd_truncated, RankRule};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct DmdcModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub rank: usize,
    pub dt: f64,
}

/// Full-dimension best-fit operator A = X' X^+ (no projection).
pub fn full_operator(x: &DMatrix<f64>, xp: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    Ok(lstsq(&x.transpose(), &xp.transpose(), rcond)?.transpose())
}

/// Joint regression `x_{k+1} ~ A x_k + B u_k` from aligned snapshot triples.
///
/// The rank rule controls the pseudo-inverse truncation of the stacked
/// regressor [X; Upsilon]. A stacked matrix whose numerical rank falls below
/// n + q cannot disambiguate A from B and is rejected, except for the
/// all-zero (or absent) input case, which cleanly reduces to plain DMD.
pub fn fit_dmdc(
    x: &DMatrix<f64>,
    xp: &DMatrix<f64>,
    upsilon: &DMatrix<f64>,
    dt: f64,
    rule: RankRule,
) -> Result<DmdcModel> {
    super::validate_pair(x, xp)?;
    let n = x.nrows();
    let m = x.ncols();
    let q = upsilon.nrows();
    if q > 0 && upsilon.ncols() != m {
        return Err(Error::InvalidInput(format!(
            "input matrix has {} columns, snapshots have {m}",
            upsilon.ncols()
        )));
    }

    if q == 0 || upsilon.amax() == 0.0 {
        let a = full_operator(x, xp, crate::numerics::DEFAULT_RCOND)?;
        return Ok(DmdcModel {
            a,
            b: DMatrix::zeros(n, q),
            rank: numerical_rank(x, 1e-10),
            dt,
        });
    }

    let mut g = DMatrix::<f64>::zeros(n + q, m);
    g.rows_mut(0, n).copy_from(x);
    g.rows_mut(n, q).copy_from(upsilon);
    let achieved = numerical_rank(&g, 1e-10);
    if achieved < n + q {
        return Err(Error::RankDeficient {
            achieved,
            needed: n + q,
        });
    }

    let svd = svd_truncated(&g, rule)?;
    // [A B] = X' V_r S_r^-1 U_r^T
    let mut xv = xp * &svd.v;
    for j in 0..svd.rank {
        xv.column_mut(j).scale_mut(1.0 / svd.s[j]);
    }
    let ab = xv * svd.u.transpose();
    Ok(DmdcModel {
        a: ab.columns(0, n).into_owned(),
        b: ab.columns(n, q).into_owned(),
        rank: svd.rank,
        dt,
    })
}

const DMDC_SCHEMA: &str = "dmdc/1";

#[derive(Serialize, Deserialize)]
struct DmdcJson {
    schema: String,
    dt: f64,
    n: usize,
    q: usize,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl DmdcModel {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DmdcJson {
            schema: DMDC_SCHEMA.into(),
            dt: self.dt,
            n: self.a.nrows(),
            q: self.b.ncols(),
            a: crate::numerics::to_rows(&self.a),
            b: crate::numerics::to_rows(&self.b),
        })
        .expect("dmdc model serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let found = v
            .get("schema")
            .and_then(|s| s.as_str())
            .unwrap_or("<missing>")
            .to_string();
        if found != DMDC_SCHEMA {
            return Err(Error::VersionError {
                expected: DMDC_SCHEMA.into(),
                found,
            });
        }
        let j: DmdcJson = serde_json::from_value(v.clone())?;
        let a = crate::numerics::from_rows(&j.a)?;
        let b = if j.b.is_empty() {
            DMatrix::zeros(j.n, 0)
        } else {
            crate::numerics::from_rows(&j.b)?
        };
        Ok(DmdcModel {
            rank: a.nrows(),
            a,
            b,
            dt: j.dt,
        })
    }
}
