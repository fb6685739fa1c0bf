//! Dictionary construction and evaluation.
//!
//! A dictionary is a vector-valued observable map z = g(x). Construction
//! stores kind + parameters + seed (never closures), so every dictionary
//! serializes losslessly into the model files.

use crate::systems::Box as DomainBox;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Marks a dictionary whose input space is the delay vector
/// [y_k, (y,u)_{k-1}, ..., (y,u)_{k-m}] rather than the raw state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayMeta {
    pub m: usize,
    /// Input channels interleaved into the history.
    pub q: usize,
    /// Measured output channels (first block of the delay vector).
    pub n_y: usize,
}

impl DelayMeta {
    pub fn vector_len(&self) -> usize {
        self.n_y + self.m * (self.n_y + self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DictKind {
    /// z = x.
    Identity { n: usize },
    /// Multivariate monomials given by explicit exponent rows.
    Monomial {
        n: usize,
        exponents: Vec<Vec<u32>>,
        include_state: bool,
    },
    /// Base observables with appended thin-plate spline bumps
    /// s^2 ln s, s = || g_base(x) - c_j ||, and s^2 ln s := 0 at s = 0.
    TpsRbf {
        base: std::boxed::Box<Dictionary>,
        /// One center per column, in base-output coordinates.
        centers: DMatrix<f64>,
        seed: u64,
    },
}

/// How the state (or measured output) is recovered from a lifted vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Recovery {
    /// States appear verbatim among the observables at these rows.
    Selector(Vec<usize>),
    /// Recovery matrix learned by least squares during fitting.
    Learned(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub kind: DictKind,
    pub delay: Option<DelayMeta>,
}

impl Dictionary {
    pub fn identity(n: usize) -> Self {
        Dictionary {
            kind: DictKind::Identity { n },
            delay: None,
        }
    }

    /// Dimension of the input vector g consumes.
    pub fn input_dim(&self) -> usize {
        match &self.kind {
            DictKind::Identity { n } => *n,
            DictKind::Monomial { n, .. } => *n,
            DictKind::TpsRbf { base, .. } => base.input_dim(),
        }
    }

    /// Lifted dimension p.
    pub fn p(&self) -> usize {
        match &self.kind {
            DictKind::Identity { n } => *n,
            DictKind::Monomial { exponents, .. } => exponents.len(),
            DictKind::TpsRbf { base, centers, .. } => base.p() + centers.ncols(),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.input_dim());
        match &self.kind {
            DictKind::Identity { .. } => x.clone(),
            DictKind::Monomial { exponents, .. } => DVector::from_fn(exponents.len(), |r, _| {
                exponents[r]
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| x[i].powi(e as i32))
                    .product()
            }),
            DictKind::TpsRbf { base, centers, .. } => {
                let zb = base.eval(x);
                let mut z = DVector::zeros(base.p() + centers.ncols());
                z.rows_mut(0, zb.len()).copy_from(&zb);
                for j in 0..centers.ncols() {
                    let s = (&zb - centers.column(j)).norm();
                    z[zb.len() + j] = tps_kernel(s);
                }
                z
            }
        }
    }

    /// Column-wise lifting of a snapshot matrix: Z = g(X).
    pub fn eval_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "dictionary expects input dim {}, snapshots have {} rows",
                self.input_dim(),
                x.nrows()
            )));
        }
        let mut z = DMatrix::zeros(self.p(), x.ncols());
        for k in 0..x.ncols() {
            z.set_column(k, &self.eval(&x.column(k).into_owned()));
        }
        Ok(z)
    }

    /// p x n Jacobian of g at x, when available in closed form.
    pub fn grad(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        match &self.kind {
            DictKind::Identity { n } => Some(DMatrix::identity(*n, *n)),
            DictKind::Monomial { n, exponents, .. } => {
                let mut g = DMatrix::zeros(exponents.len(), *n);
                for (r, exps) in exponents.iter().enumerate() {
                    for j in 0..*n {
                        let e = exps[j];
                        if e == 0 {
                            continue;
                        }
                        let mut v = e as f64 * x[j].powi(e as i32 - 1);
                        for (i, &ei) in exps.iter().enumerate() {
                            if i != j {
                                v *= x[i].powi(ei as i32);
                            }
                        }
                        g[(r, j)] = v;
                    }
                }
                Some(g)
            }
            DictKind::TpsRbf { base, centers, .. } => {
                let gb = base.grad(x)?;
                let zb = base.eval(x);
                let pb = base.p();
                let mut g = DMatrix::zeros(self.p(), self.input_dim());
                g.rows_mut(0, pb).copy_from(&gb);
                for j in 0..centers.ncols() {
                    let d = &zb - centers.column(j);
                    let s = d.norm();
                    if s > 0.0 {
                        // d/dz [s^2 ln s] = (2 ln s + 1) (z - c)
                        let row = (d * (2.0 * s.ln() + 1.0)).transpose() * &gb;
                        g.row_mut(pb + j).copy_from(&row);
                    }
                }
                Some(g)
            }
        }
    }

    /// Rows at which the raw input coordinates appear verbatim, when they do.
    pub fn state_selector(&self) -> Option<Vec<usize>> {
        match &self.kind {
            DictKind::Identity { n } => Some((0..*n).collect()),
            DictKind::Monomial { n, exponents, include_state } => {
                if !include_state {
                    return None;
                }
                let mut rows = Vec::with_capacity(*n);
                for i in 0..*n {
                    let unit: Vec<u32> = (0..*n).map(|k| u32::from(k == i)).collect();
                    rows.push(exponents.iter().position(|e| *e == unit)?);
                }
                Some(rows)
            }
            DictKind::TpsRbf { base, .. } => base.state_selector(),
        }
    }

    /// Selector-based recovery, if the dictionary embeds the state.
    pub fn recovery(&self) -> Option<Recovery> {
        self.state_selector().map(Recovery::Selector)
    }
}

/// s^2 ln s with the removable singularity filled in at s = 0.
fn tps_kernel(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * s * s.ln()
    }
}

/// All multivariate monomials of total degree 1..=d in graded
/// lexicographic order (constant excluded). With `include_state` the
/// degree-1 block leads and doubles as the state-recovery selector;
/// without it only degrees 2..=d are kept.
pub fn monomial_dictionary(n: usize, max_degree: u32, include_state: bool) -> Dictionary {
    assert!(max_degree >= 1, "max_degree must be >= 1");
    let mut exponents = Vec::new();
    let lo = if include_state { 1 } else { 2 };
    for deg in lo..=max_degree {
        push_exponents_of_degree(n, deg, &mut exponents);
    }
    Dictionary {
        kind: DictKind::Monomial {
            n,
            exponents,
            include_state,
        },
        delay: None,
    }
}

/// Dictionary from an explicit list of exponent rows.
pub fn monomial_from_exponents(n: usize, exponents: Vec<Vec<u32>>) -> Result<Dictionary> {
    if exponents.iter().any(|e| e.len() != n) {
        return Err(Error::InvalidInput("exponent rows must have length n".into()));
    }
    let dict = Dictionary {
        kind: DictKind::Monomial {
            n,
            exponents,
            include_state: true,
        },
        delay: None,
    };
    Ok(dict)
}

fn push_exponents_of_degree(n: usize, deg: u32, out: &mut Vec<Vec<u32>>) {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            rec(prefix, remaining - e, slots - 1, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::new(), deg, n, out);
}

/// Append `n_centers` thin-plate spline observables to `base`, with centers
/// drawn uniformly in `domain` (a box in base-output coordinates).
pub fn tps_rbf_dictionary(
    base: Dictionary,
    n_centers: usize,
    domain: &DomainBox,
    seed: u64,
) -> Result<Dictionary> {
    if n_centers == 0 {
        return Err(Error::InvalidInput("n_centers must be >= 1".into()));
    }
    if domain.dim() != base.p() {
        return Err(Error::InvalidInput(format!(
            "center box dim {} must match base output dim {}",
            domain.dim(),
            base.p()
        )));
    }
    if (0..domain.dim()).any(|i| domain.hi[i] <= domain.lo[i]) {
        return Err(Error::InvalidInput("degenerate center box".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = DMatrix::zeros(base.p(), n_centers);
    for j in 0..n_centers {
        let c = domain.sample(&mut rng);
        centers.set_column(j, &c);
    }
    let delay = base.delay;
    Ok(Dictionary {
        kind: DictKind::TpsRbf {
            base: std::boxed::Box::new(base),
            centers,
            seed,
        },
        delay,
    })
}

// ---------------------------------------------------------------------------
// JSON schema: {kind, params..., seed, centers?, degree?/exponents, m?,
// include_state} -- kinds tagged, centers stored column-wise.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DictJson {
    Identity {
        n: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        delay: Option<DelayMeta>,
    },
    Monomial {
        n: usize,
        exponents: Vec<Vec<u32>>,
        include_state: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        delay: Option<DelayMeta>,
    },
    TpsRbf {
        base: std::boxed::Box<DictJson>,
        seed: u64,
        centers: Vec<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        delay: Option<DelayMeta>,
    },
}

impl Dictionary {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.as_json()).expect("dictionary serializes")
    }

    fn as_json(&self) -> DictJson {
        match &self.kind {
            DictKind::Identity { n } => DictJson::Identity {
                n: *n,
                delay: self.delay,
            },
            DictKind::Monomial { n, exponents, include_state } => DictJson::Monomial {
                n: *n,
                exponents: exponents.clone(),
                include_state: *include_state,
                delay: self.delay,
            },
            DictKind::TpsRbf { base, centers, seed } => DictJson::TpsRbf {
                base: std::boxed::Box::new(base.as_json()),
                seed: *seed,
                centers: (0..centers.ncols())
                    .map(|j| centers.column(j).iter().copied().collect())
                    .collect(),
                delay: self.delay,
            },
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let parsed: DictJson = serde_json::from_value(v.clone())?;
        Ok(Self::from_json_inner(parsed))
    }

    fn from_json_inner(j: DictJson) -> Self {
        match j {
            DictJson::Identity { n, delay } => Dictionary {
                kind: DictKind::Identity { n },
                delay,
            },
            DictJson::Monomial { n, exponents, include_state, delay } => Dictionary {
                kind: DictKind::Monomial { n, exponents, include_state },
                delay,
            },
            DictJson::TpsRbf { base, seed, centers, delay } => {
                let base = Self::from_json_inner(*base);
                let pb = base.p();
                let mut cm = DMatrix::zeros(pb, centers.len());
                for (jc, col) in centers.iter().enumerate() {
                    for (i, &v) in col.iter().enumerate() {
                        cm[(i, jc)] = v;
                    }
                }
                Dictionary {
                    kind: DictKind::TpsRbf { base: std::boxed::Box::new(base), centers: cm, seed },
                    delay,
                }
            }
        }
    }
}
