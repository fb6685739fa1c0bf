//! Dictionary-lifted Koopman approximation: eDMD, eDMDc, eigenfunction
//! extraction and validation, harmonic averages, and Ulam transfer matrices.

mod eigenfunctions;
mod harmonic;
mod ulam;

pub use eigenfunctions::{
    dedup_validated, extract_eigenfunctions, fit_continuous_eigenfunctions, Eigenfunction,
};
pub use harmonic::{harmonic_average, HarmonicAverage};
pub use ulam::{ulam_matrix, GridPartition, UlamMatrix};

use crate::numerics::{eig_dense, ridge_solve, EigResult};
use crate::observables::Dictionary;
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Lifted linear operator with its spectral data and state recovery.
#[derive(Debug, Clone)]
pub struct EdmdModel {
    /// p x p lifted operator.
    pub a_z: DMatrix<f64>,
    /// p x q lifted input matrix, when fitted with control.
    pub b_z: Option<DMatrix<f64>>,
    pub dict: Dictionary,
    /// Recovery of the dictionary input vector from the lifted state.
    pub c: DMatrix<f64>,
    /// Spectrum of A_Z with right vectors (eDMD modes) and left vectors
    /// (eigenfunction coefficient columns xi).
    pub eigen: EigResult,
    pub dt: f64,
    /// Ridge value actually used by the regression.
    pub ridge: f64,
    /// Holdout validation scores, filled in by eigenfunction extraction.
    pub validation: Option<Vec<f64>>,
}

/// Resolve the ridge: `None` takes the 1e-8 trace-scale default, fitting
/// lifted regressions on finite data without hand tuning.
fn resolve_ridge(z: &DMatrix<f64>, ridge: Option<f64>) -> f64 {
    match ridge {
        Some(g) => g,
        None => 1e-8 * z.norm_squared() / z.nrows() as f64,
    }
}

fn recovery_matrix(
    dict: &Dictionary,
    z: &DMatrix<f64>,
    x: &DMatrix<f64>,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    if let Some(rows) = dict.state_selector() {
        let mut c = DMatrix::zeros(rows.len(), dict.p());
        for (i, &r) in rows.iter().enumerate() {
            c[(i, r)] = 1.0;
        }
        Ok(c)
    } else {
        ridge_solve(z, x, gamma)
    }
}

/// eDMD: lifted regression Z' ~ A_Z Z with Tikhonov ridge.
pub fn fit_edmd(
    x: &DMatrix<f64>,
    xp: &DMatrix<f64>,
    dict: &Dictionary,
    dt: f64,
    ridge: Option<f64>,
) -> Result<EdmdModel> {
    crate::dmd::validate_pair(x, xp)?;
    let z = dict.eval_batch(x)?;
    let zp = dict.eval_batch(xp)?;
    let gamma = resolve_ridge(&z, ridge);
    if gamma == 0.0 && dict.p() > z.ncols() {
        return Err(Error::IllPosed(format!(
            "p = {} observables exceed m = {} samples; a positive ridge is required",
            dict.p(),
            z.ncols()
        )));
    }
    let a_z = ridge_solve(&z, &zp, gamma)?;
    let eigen = eig_dense(&a_z, true)?;
    let c = recovery_matrix(dict, &z, x, gamma)?;
    Ok(EdmdModel {
        a_z,
        b_z: None,
        dict: dict.clone(),
        c,
        eigen,
        dt,
        ridge: gamma,
        validation: None,
    })
}

/// eDMDc: joint lifted regression Z' ~ A_Z Z + B_Z Upsilon. Observables are
/// nonlinearly built from the state (or delay vector); the current input
/// enters only through B_Z.
pub fn fit_edmdc(
    x: &DMatrix<f64>,
    xp: &DMatrix<f64>,
    upsilon: &DMatrix<f64>,
    dict: &Dictionary,
    dt: f64,
    ridge: Option<f64>,
) -> Result<EdmdModel> {
    crate::dmd::validate_pair(x, xp)?;
    let q = upsilon.nrows();
    if q == 0 {
        let mut model = fit_edmd(x, xp, dict, dt, ridge)?;
        model.b_z = Some(DMatrix::zeros(dict.p(), 0));
        return Ok(model);
    }
    if upsilon.ncols() != x.ncols() {
        return Err(Error::InvalidInput(format!(
            "input matrix has {} columns, snapshots have {}",
            upsilon.ncols(),
            x.ncols()
        )));
    }
    let z = dict.eval_batch(x)?;
    let zp = dict.eval_batch(xp)?;
    let p = dict.p();
    let gamma = resolve_ridge(&z, ridge);
    if gamma == 0.0 && p + q > z.ncols() {
        return Err(Error::IllPosed(format!(
            "p + q = {} regressors exceed m = {} samples; a positive ridge is required",
            p + q,
            z.ncols()
        )));
    }
    let mut g = DMatrix::<f64>::zeros(p + q, z.ncols());
    g.rows_mut(0, p).copy_from(&z);
    g.rows_mut(p, q).copy_from(upsilon);
    let ab = ridge_solve(&g, &zp, gamma)?;
    let a_z = ab.columns(0, p).into_owned();
    let b_z = ab.columns(p, q).into_owned();
    let eigen = eig_dense(&a_z, true)?;
    let c = recovery_matrix(dict, &z, x, gamma)?;
    Ok(EdmdModel {
        a_z,
        b_z: Some(b_z),
        dict: dict.clone(),
        c,
        eigen,
        dt,
        ridge: gamma,
        validation: None,
    })
}

// ---------------------------------------------------------------------------
// JSON schema: {schema, dict, a_z, b_z?, c, dt, eigen: {lambda, xi}, validation}
// ---------------------------------------------------------------------------

const EDMD_SCHEMA: &str = "edmd/1";

#[derive(Serialize, Deserialize)]
struct EdmdJson {
    schema: String,
    dict: serde_json::Value,
    a_z: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_z: Option<Vec<Vec<f64>>>,
    c: Vec<Vec<f64>>,
    dt: f64,
    ridge: f64,
    eigen: EigenJson,
    validation: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EigenJson {
    lambda: Vec<[f64; 2]>,
    /// Left-eigenvector coefficient rows xi^T, row-major [re, im] pairs.
    xi: Vec<Vec<[f64; 2]>>,
}

impl EdmdModel {
    pub fn to_json(&self) -> serde_json::Value {
        use num_complex::Complex64;
        let r = self.eigen.values.len();
        let lv = self
            .eigen
            .left_vectors
            .as_ref()
            .expect("edmd models keep left vectors");
        let xi: Vec<Vec<[f64; 2]>> = (0..r)
            .map(|j| {
                (0..lv.nrows())
                    .map(|i| {
                        let z: Complex64 = lv[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_value(EdmdJson {
            schema: EDMD_SCHEMA.into(),
            dict: self.dict.to_json(),
            a_z: crate::numerics::to_rows(&self.a_z),
            b_z: self.b_z.as_ref().map(crate::numerics::to_rows),
            c: crate::numerics::to_rows(&self.c),
            dt: self.dt,
            ridge: self.ridge,
            eigen: EigenJson {
                lambda: self.eigen.values.iter().map(|z| [z.re, z.im]).collect(),
                xi,
            },
            validation: self.validation.clone(),
        })
        .expect("edmd model serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        use num_complex::Complex64;
        let found = v
            .get("schema")
            .and_then(|s| s.as_str())
            .unwrap_or("<missing>")
            .to_string();
        if found != EDMD_SCHEMA {
            return Err(Error::VersionError {
                expected: EDMD_SCHEMA.into(),
                found,
            });
        }
        let j: EdmdJson = serde_json::from_value(v.clone())?;
        let dict = Dictionary::from_json(&j.dict)?;
        let a_z = crate::numerics::from_rows(&j.a_z)?;
        let p = a_z.nrows();
        let r = j.eigen.lambda.len();
        let values: Vec<Complex64> = j
            .eigen
            .lambda
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        let mut lv = DMatrix::<Complex64>::zeros(p, r);
        for (jc, col) in j.eigen.xi.iter().enumerate() {
            for (i, pr) in col.iter().enumerate() {
                lv[(i, jc)] = Complex64::new(pr[0], pr[1]);
            }
        }
        // right vectors are not persisted; recompute from A_Z on demand
        let eigen = EigResult {
            values,
            vectors: DMatrix::zeros(p, 0),
            left_vectors: Some(lv),
        };
        Ok(EdmdModel {
            b_z: match j.b_z {
                Some(rows) => Some(crate::numerics::from_rows(&rows)?),
                None => None,
            },
            a_z,
            dict,
            c: crate::numerics::from_rows(&j.c)?,
            eigen,
            dt: j.dt,
            ridge: j.ridge,
            validation: j.validation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::full_operator;
    use crate::observables::{monomial_from_exponents, Dictionary};
    use crate::systems::{integrate_rk4, InputSignal, SystemSpec};
    use nalgebra::{DMatrix, DVector};

    pub(crate) fn slow_manifold_data() -> (DMatrix<f64>, DMatrix<f64>, f64) {
        let sys = SystemSpec::slow_manifold(-0.05, 1.0, false);
        let dt = 0.01;
        let ics = [
            [1.0, 0.5],
            [-0.8, 0.9],
            [0.4, -0.7],
            [1.2, 1.1],
            [-0.3, -0.2],
            [0.7, -1.0],
        ];
        let mut xs = Vec::new();
        let mut xps = Vec::new();
        for ic in ics {
            let traj = integrate_rk4(
                &sys,
                &DVector::from_vec(ic.to_vec()),
                &InputSignal::Zero,
                0.0,
                2.0,
                dt,
            )
            .unwrap();
            let (x, xp) = traj.snapshot_pair();
            xs.push(x);
            xps.push(xp);
        }
        let m: usize = xs.iter().map(|x| x.ncols()).sum();
        let mut x = DMatrix::zeros(2, m);
        let mut xp = DMatrix::zeros(2, m);
        let mut col = 0;
        for (a, b) in xs.iter().zip(&xps) {
            x.columns_mut(col, a.ncols()).copy_from(a);
            xp.columns_mut(col, b.ncols()).copy_from(b);
            col += a.ncols();
        }
        (x, xp, dt)
    }

    pub(crate) fn slow_manifold_dict() -> Dictionary {
        monomial_from_exponents(2, vec![vec![1, 0], vec![0, 1], vec![2, 0]]).unwrap()
    }

    #[test]
    fn slow_manifold_golden_eigenvalues() {
        let (x, xp, dt) = slow_manifold_data();
        let model = fit_edmd(&x, &xp, &slow_manifold_dict(), dt, Some(0.0)).unwrap();
        let mut cont: Vec<f64> = model
            .eigen
            .values
            .iter()
            .map(|lam| lam.norm().ln() / dt)
            .collect();
        cont.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((cont[0] - 1.0).abs() < 1e-6, "lambda: {}", cont[0]);
        assert!((cont[1] - (-0.05)).abs() < 1e-6, "mu: {}", cont[1]);
        assert!((cont[2] - (-0.1)).abs() < 1e-6, "2mu: {}", cont[2]);
        for lam in &model.eigen.values {
            assert!(lam.im.abs() < 1e-9);
        }
    }

    #[test]
    fn identity_dictionary_reduces_to_dmd() {
        let (x, xp, dt) = slow_manifold_data();
        let dict = Dictionary::identity(2);
        let model = fit_edmd(&x, &xp, &dict, dt, Some(0.0)).unwrap();
        let full = full_operator(&x, &xp, crate::numerics::DEFAULT_RCOND).unwrap();
        assert!((model.a_z - full).amax() < 1e-10);
    }

    #[test]
    fn monomials_on_linear_decay() {
        // dx = -x: x and x^2 evolve with rates -1 and -2
        let sys = SystemSpec::linear(nalgebra::dmatrix![-1.0], DMatrix::zeros(1, 0));
        let dt = 0.05;
        let mut xs = Vec::new();
        for ic in [1.0, 0.6, -0.8, 1.4] {
            let traj = integrate_rk4(
                &sys,
                &DVector::from_element(1, ic),
                &InputSignal::Zero,
                0.0,
                2.0,
                dt,
            )
            .unwrap();
            xs.push(traj);
        }
        let m: usize = xs.iter().map(|t| t.len() - 1).sum();
        let mut x = DMatrix::zeros(1, m);
        let mut xp = DMatrix::zeros(1, m);
        let mut col = 0;
        for t in &xs {
            let (a, b) = t.snapshot_pair();
            x.columns_mut(col, a.ncols()).copy_from(&a);
            xp.columns_mut(col, b.ncols()).copy_from(&b);
            col += a.ncols();
        }
        let dict = crate::observables::monomial_dictionary(1, 2, true);
        let model = fit_edmd(&x, &xp, &dict, dt, Some(0.0)).unwrap();
        let mut cont: Vec<f64> = model
            .eigen
            .values
            .iter()
            .map(|lam| lam.norm().ln() / dt)
            .collect();
        cont.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((cont[0] + 1.0).abs() < 1e-6);
        assert!((cont[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn edmdc_identity_matches_dmdc() {
        use crate::dmd::fit_dmdc;
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, -0.05, 0.8]);
        let b = DMatrix::from_column_slice(2, 1, &[0.3, 0.7]);
        let m = 200;
        let mut x = DMatrix::zeros(2, m);
        let mut xp = DMatrix::zeros(2, m);
        let mut ups = DMatrix::zeros(1, m);
        let mut state = DVector::from_vec(vec![1.0, -1.0]);
        for k in 0..m {
            let u = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            x.set_column(k, &state);
            ups[(0, k)] = u;
            state = &a * &state + &b * u;
            xp.set_column(k, &state);
        }
        let dict = Dictionary::identity(2);
        let em = fit_edmdc(&x, &xp, &ups, &dict, 0.1, Some(0.0)).unwrap();
        let dm = fit_dmdc(&x, &xp, &ups, 0.1, crate::numerics::RankRule::Default).unwrap();
        assert!((em.a_z.clone() - &a).norm() < 1e-8);
        assert!((em.b_z.clone().unwrap() - &b).norm() < 1e-8);
        assert!((em.a_z - dm.a).norm() < 1e-8);
        assert!((em.b_z.unwrap() - dm.b).norm() < 1e-8);
    }

    #[test]
    fn ill_posed_without_ridge() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let xp = DMatrix::from_row_slice(1, 2, &[2.0, 3.0]);
        let dict = crate::observables::monomial_dictionary(1, 5, true);
        assert!(matches!(
            fit_edmd(&x, &xp, &dict, 0.1, Some(0.0)),
            Err(Error::IllPosed(_))
        ));
        // default ridge makes it solvable
        assert!(fit_edmd(&x, &xp, &dict, 0.1, None).is_ok());
    }

    #[test]
    fn json_roundtrip_with_tps() {
        let (x, xp, dt) = slow_manifold_data();
        let base = Dictionary::identity(2);
        let domain = crate::systems::Box::new(vec![-1.5, -1.5], vec![1.5, 1.5]);
        let dict = crate::observables::tps_rbf_dictionary(base, 10, &domain, 77).unwrap();
        let model = fit_edmd(&x, &xp, &dict, dt, None).unwrap();
        let v = model.to_json();
        let model2 = EdmdModel::from_json(&v).unwrap();
        assert_eq!(model.a_z, model2.a_z);
        assert_eq!(model.c, model2.c);
        let probe = DVector::from_vec(vec![0.3, -0.2]);
        assert_eq!(model.dict.eval(&probe), model2.dict.eval(&probe));
    }
}
