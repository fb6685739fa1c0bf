//! Snapshot-based linear operator regression: exact DMD, forward-backward
//! DMD, companion-matrix DMD, and DMD with control.

mod companion;
mod dmdc;
mod exact;
mod fb;

pub use companion::{companion_dmd, CompanionDmd};
pub use dmdc::{fit_dmdc, full_operator, DmdcModel};
pub use exact::{fit_exact_dmd, ModelWarning};
pub use fb::fit_fb_dmd;

use crate::numerics::lstsq_complex;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Fitted DMD expansion `x_k = Phi Lambda^{k-1} b`.
#[derive(Debug, Clone)]
pub struct DmdModel {
    /// n x r complex mode matrix.
    pub phi: DMatrix<Complex64>,
    /// Discrete eigenvalues, sorted |lambda| descending then arg ascending.
    pub lambda: Vec<Complex64>,
    /// Continuous eigenvalues ln(lambda)/dt on the principal branch.
    pub omega: Vec<Complex64>,
    /// Mode amplitudes b = Phi^+ x_1.
    pub amplitudes: Vec<Complex64>,
    pub rank: usize,
    pub dt: f64,
    /// r x r projected operator.
    pub atilde: DMatrix<f64>,
    /// Projection basis U_r.
    pub basis: DMatrix<f64>,
    pub warnings: Vec<ModelWarning>,
}

/// Discrete step index or continuous time at which to evaluate the expansion.
#[derive(Debug, Clone, Copy)]
pub enum PredictAt {
    /// 1-based snapshot index: k = 1 reproduces the first snapshot.
    Step(usize),
    Time(f64),
}

/// Real-part prediction plus the size of the discarded imaginary residual.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub state: DVector<f64>,
    pub imag_residual: f64,
}

/// Integer complex power that is exact at the lambda = 0 corner cases.
pub(crate) fn cpow_int(z: Complex64, k: usize) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z.powf(k as f64)
}

impl DmdModel {
    pub fn predict(&self, at: PredictAt) -> Prediction {
        let n = self.phi.nrows();
        let mut acc = DVector::<Complex64>::zeros(n);
        for j in 0..self.rank {
            let factor = match at {
                PredictAt::Step(k) => cpow_int(self.lambda[j], k.saturating_sub(1)),
                PredictAt::Time(t) => {
                    let w = self.omega[j];
                    if w.re == f64::NEG_INFINITY {
                        if t == 0.0 {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    } else {
                        (w * t).exp()
                    }
                }
            };
            let coeff = factor * self.amplitudes[j];
            acc += self.phi.column(j) * coeff;
        }
        let state = DVector::from_fn(n, |i, _| acc[i].re);
        let imag_residual = acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        Prediction {
            state,
            imag_residual,
        }
    }

    /// Reconstruct snapshots 1..=m as columns.
    pub fn reconstruct(&self, m: usize) -> DMatrix<f64> {
        let n = self.phi.nrows();
        let mut out = DMatrix::zeros(n, m);
        for k in 1..=m {
            out.set_column(k - 1, &self.predict(PredictAt::Step(k)).state);
        }
        out
    }
}

/// Shared tail of every DMD-style fit: eigendecomposition of the projected
/// operator, mode lifting, continuous eigenvalues, and amplitudes.
///
/// `mode_map` is the matrix whose product with the projected eigenvectors
/// yields the modes (X' V_r S_r^-1 for exact DMD, U_r for projected modes).
pub(crate) fn assemble_model(
    atilde: DMatrix<f64>,
    basis: DMatrix<f64>,
    mode_map: &DMatrix<f64>,
    x1: &DVector<f64>,
    dt: f64,
) -> Result<DmdModel> {
    let r = atilde.nrows();
    let eig = crate::numerics::eig_dense(&atilde, false)?;
    let lambda = eig.values.clone();
    let lam_max = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut warnings = Vec::new();
    let mode_map_c = crate::numerics::complexify(mode_map);
    let basis_c = crate::numerics::complexify(&basis);
    let mut phi = DMatrix::<Complex64>::zeros(mode_map.nrows(), r);
    for j in 0..r {
        let w = eig.vectors.column(j).into_owned();
        if lambda[j].norm() <= 1e-12 * lam_max.max(1e-300) {
            // the exact-mode construction is undefined at lambda = 0;
            // report the projected mode instead
            phi.set_column(j, &(&basis_c * &w));
            warnings.push(ModelWarning::NonExactZeroMode { mode: j });
        } else {
            phi.set_column(j, &(&mode_map_c * &w));
        }
    }

    let mut omega = Vec::with_capacity(r);
    for (j, lam) in lambda.iter().enumerate() {
        if lam.norm() == 0.0 {
            omega.push(Complex64::new(f64::NEG_INFINITY, 0.0));
            continue;
        }
        let w = Complex64::new(lam.norm().ln() / dt, lam.arg() / dt);
        if w.im.abs() * dt > 0.9 * std::f64::consts::PI {
            warnings.push(ModelWarning::NyquistAliasing { mode: j });
        }
        omega.push(w);
    }

    let x1c = DMatrix::from_fn(x1.len(), 1, |i, _| Complex64::new(x1[i], 0.0));
    let b = lstsq_complex(&phi, &x1c, 1e-12)?;
    let amplitudes: Vec<Complex64> = (0..r).map(|j| b[(j, 0)]).collect();

    Ok(DmdModel {
        phi,
        lambda,
        omega,
        amplitudes,
        rank: r,
        dt,
        atilde,
        basis,
        warnings,
    })
}

pub(crate) fn validate_pair(x: &DMatrix<f64>, xp: &DMatrix<f64>) -> Result<()> {
    if x.shape() != xp.shape() || x.ncols() == 0 {
        return Err(Error::InvalidInput(format!(
            "snapshot matrices must share a nonempty shape, got {:?} and {:?}",
            x.shape(),
            xp.shape()
        )));
    }
    crate::numerics::check_finite("X", x)?;
    crate::numerics::check_finite("X'", xp)?;
    if x.amax() == 0.0 && xp.amax() == 0.0 {
        return Err(Error::DegenerateData("all-zero snapshot data".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Model JSON: {schema, dt, r, lambda, omega, b, phi} with complex numbers
// stored as [re, im] pairs and phi row-major.
// ---------------------------------------------------------------------------

const DMD_SCHEMA: &str = "dmd/1";

#[derive(Serialize, Deserialize)]
struct DmdJson {
    schema: String,
    dt: f64,
    r: usize,
    lambda: Vec<[f64; 2]>,
    omega: Vec<[Option<f64>; 2]>,
    b: Vec<[f64; 2]>,
    phi: Vec<Vec<[f64; 2]>>,
}

fn c2p(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn p2c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl DmdModel {
    pub fn to_json(&self) -> serde_json::Value {
        let j = DmdJson {
            schema: DMD_SCHEMA.into(),
            dt: self.dt,
            r: self.rank,
            lambda: self.lambda.iter().copied().map(c2p).collect(),
            omega: self
                .omega
                .iter()
                .map(|w| {
                    [
                        w.re.is_finite().then_some(w.re),
                        w.im.is_finite().then_some(w.im),
                    ]
                })
                .collect(),
            b: self.amplitudes.iter().copied().map(c2p).collect(),
            phi: (0..self.phi.nrows())
                .map(|i| (0..self.phi.ncols()).map(|j| c2p(self.phi[(i, j)])).collect())
                .collect(),
        };
        serde_json::to_value(j).expect("dmd model serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let found = v
            .get("schema")
            .and_then(|s| s.as_str())
            .unwrap_or("<missing>")
            .to_string();
        if found != DMD_SCHEMA {
            return Err(Error::VersionError {
                expected: DMD_SCHEMA.into(),
                found,
            });
        }
        let j: DmdJson = serde_json::from_value(v.clone())?;
        let n = j.phi.len();
        let r = j.r;
        if j.lambda.len() != r || j.b.len() != r || j.phi.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidInput("inconsistent dmd model file".into()));
        }
        let phi = DMatrix::from_fn(n, r, |i, jj| p2c(j.phi[i][jj]));
        let lambda: Vec<Complex64> = j.lambda.into_iter().map(p2c).collect();
        let omega = j
            .omega
            .iter()
            .map(|w| Complex64::new(w[0].unwrap_or(f64::NEG_INFINITY), w[1].unwrap_or(0.0)))
            .collect();
        Ok(DmdModel {
            phi,
            lambda,
            omega,
            amplitudes: j.b.into_iter().map(p2c).collect(),
            rank: r,
            dt: j.dt,
            atilde: DMatrix::zeros(0, 0),
            basis: DMatrix::zeros(0, 0),
            warnings: Vec::new(),
        })
    }
}
