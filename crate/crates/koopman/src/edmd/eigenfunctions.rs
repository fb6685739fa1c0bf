//! Koopman eigenfunction candidates from lifted regressions, with the
//! holdout linearity validation that separates true eigenfunctions from
//! spurious ones.

use super::EdmdModel;
use crate::numerics::{eig_dense, lstsq};
use crate::observables::Dictionary;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Threshold on the holdout linearity score above which a candidate is
/// declared spurious.
pub const SPURIOUS_THRESHOLD: f64 = 1e-3;

/// A candidate eigenfunction phi(x) ~ xi^T g(x).
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    /// Unit-norm coefficient vector over the dictionary.
    pub coeffs: DVector<Complex64>,
    /// Discrete eigenvalue (one-step multiplier), for discrete-time fits.
    pub lambda: Option<Complex64>,
    /// Continuous eigenvalue: ln(lambda)/dt for discrete fits, the
    /// generator eigenvalue for continuous fits.
    pub mu: Option<Complex64>,
    /// Holdout linearity score max_k |phi_{k+1} - lambda phi_k| / max_k |phi_k|.
    pub validation: Option<f64>,
    /// Relative residual || mu xi^T Z - xi^T Gamma || / || xi^T Z || of the
    /// continuous regression.
    pub residual: Option<f64>,
    pub spurious: bool,
}

impl Eigenfunction {
    pub fn eval(&self, dict: &Dictionary, x: &DVector<f64>) -> Complex64 {
        let z = dict.eval(x);
        (0..z.len()).map(|i| self.coeffs[i] * z[i]).sum()
    }
}

/// One candidate per left eigenpair of the fitted lifted operator, validated
/// on a held-out run of consecutive dictionary inputs (columns one step dt
/// apart, not used in fitting).
pub fn extract_eigenfunctions(
    model: &EdmdModel,
    holdout: &DMatrix<f64>,
) -> Result<Vec<Eigenfunction>> {
    let lv = model
        .eigen
        .left_vectors
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("model carries no left eigenvectors".into()))?;
    if holdout.ncols() < 2 {
        return Err(Error::InvalidInput(
            "holdout needs at least two consecutive samples".into(),
        ));
    }
    let z = model.dict.eval_batch(holdout)?;
    let m = z.ncols();
    let r = model.eigen.values.len();
    let mut out = Vec::with_capacity(r);
    for j in 0..r {
        let xi = lv.column(j).into_owned();
        let lambda = model.eigen.values[j];
        // phi along the holdout
        let phi: Vec<Complex64> = (0..m)
            .map(|k| (0..z.nrows()).map(|i| xi[i] * z[(i, k)]).sum())
            .collect();
        let scale = phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for k in 0..m - 1 {
            worst = worst.max((phi[k + 1] - lambda * phi[k]).norm());
        }
        let score = if scale > 0.0 { worst / scale } else { f64::INFINITY };
        let mu = if lambda.norm() > 0.0 {
            Some(Complex64::new(
                lambda.norm().ln() / model.dt,
                lambda.arg() / model.dt,
            ))
        } else {
            None
        };
        out.push(Eigenfunction {
            coeffs: xi,
            lambda: Some(lambda),
            mu,
            validation: Some(score),
            residual: None,
            spurious: score > SPURIOUS_THRESHOLD,
        });
    }
    Ok(out)
}

/// Continuous-time eigenfunction regression: build Gamma from gradients and
/// state derivatives, then solve the left eigenproblem of Gamma Z^+.
pub fn fit_continuous_eigenfunctions(
    x: &DMatrix<f64>,
    xdot: &DMatrix<f64>,
    dict: &Dictionary,
    rcond: f64,
) -> Result<Vec<Eigenfunction>> {
    if x.shape() != xdot.shape() || x.ncols() == 0 {
        return Err(Error::InvalidInput(
            "X and Xdot must share a nonempty shape".into(),
        ));
    }
    crate::numerics::check_finite("X", x)?;
    crate::numerics::check_finite("Xdot", xdot)?;
    let probe = x.column(0).into_owned();
    if dict.grad(&probe).is_none() {
        return Err(Error::NoGradient);
    }

    let p = dict.p();
    let m = x.ncols();
    let z = dict.eval_batch(x)?;
    let mut gamma = DMatrix::<f64>::zeros(p, m);
    for k in 0..m {
        let xk = x.column(k).into_owned();
        let g = dict.grad(&xk).expect("gradient probed above");
        let dxk = xdot.column(k).into_owned();
        gamma.set_column(k, &(g * dxk));
    }

    // L = Gamma Z^+ via L^T = (Z^T)^+ Gamma^T
    let l = lstsq(&z.transpose(), &gamma.transpose(), rcond)?.transpose();
    let eig = eig_dense(&l, true)?;
    let lv = eig.left_vectors.as_ref().expect("left vectors requested");

    let zc = crate::numerics::complexify(&z);
    let gc = crate::numerics::complexify(&gamma);
    let mut out = Vec::with_capacity(p);
    for j in 0..eig.values.len() {
        let xi = lv.column(j).into_owned();
        let mu = eig.values[j];
        let xz = xi.transpose() * &zc;
        let xg = xi.transpose() * &gc;
        let denom = xz.norm();
        let residual = if denom > 0.0 {
            (xz * mu - xg).norm() / denom
        } else {
            f64::INFINITY
        };
        out.push(Eigenfunction {
            coeffs: xi,
            lambda: None,
            mu: Some(mu),
            validation: None,
            residual: Some(residual),
            spurious: residual > SPURIOUS_THRESHOLD,
        });
    }
    Ok(out)
}

/// Keep the best-validated representative among near-duplicate eigenvalues:
/// candidates are matched by nearest continuous eigenvalue, ties broken by
/// coefficient overlap.
pub fn dedup_validated(funcs: &[Eigenfunction], tol: f64) -> Vec<Eigenfunction> {
    let mut kept: Vec<Eigenfunction> = Vec::new();
    for f in funcs {
        let Some(mu) = f.mu else {
            kept.push(f.clone());
            continue;
        };
        let score = |e: &Eigenfunction| {
            e.validation
                .or(e.residual)
                .unwrap_or(f64::INFINITY)
        };
        match kept
            .iter_mut()
            .find(|k| k.mu.map(|km| (km - mu).norm() < tol).unwrap_or(false))
        {
            Some(existing) => {
                if score(f) < score(existing) {
                    *existing = f.clone();
                }
            }
            None => kept.push(f.clone()),
        }
    }
    kept
}
