//! Catalog of benchmark systems with their default parameters.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde_json::Value;

/// Right-hand sides are dispatched over this enum so that system
/// descriptions stay serializable (no closures in model files).
#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    /// dx1 = mu x1, dx2 = lambda (x2 - x1^2) [+ u on x2].
    SlowManifold { mu: f64, lambda: f64, controlled: bool },
    /// dx1 = x2, dx2 = a x1 + b x1^3 + d x2 + f0 cos(omega t) + u.
    DuffingForced { a: f64, b: f64, d: f64, f0: f64, omega: f64 },
    /// dx1 = x2, dx2 = mu (1 - x1^2) x2 - x1 + u.
    VanDerPol { mu: f64 },
    /// Bilinear DC motor; u multiplies the cross terms.
    DcMotorBilinear {
        la: f64,
        ra: f64,
        km: f64,
        jm: f64,
        bm: f64,
        tau_l: f64,
        ua: f64,
    },
    /// Lorenz'63.
    Lorenz63 { sigma: f64, rho: f64, beta: f64 },
    /// dx1 = x2, dx2 = -w0^2 sin(x1) - d x2 + u.
    Pendulum { omega0: f64, damping: f64 },
    /// dx = A x + B u with explicit matrices.
    LinearGeneric { a: DMatrix<f64>, b: DMatrix<f64> },
}

#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: String,
    pub state_dim: usize,
    pub input_dim: usize,
    /// Measured output rows (y = x[output_rows]); default full state.
    pub output_rows: Vec<usize>,
    pub kind: SystemKind,
}

impl SystemSpec {
    pub fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>, t: f64) -> DVector<f64> {
        let u0 = |i: usize| if u.len() > i { u[i] } else { 0.0 };
        match &self.kind {
            SystemKind::SlowManifold { mu, lambda, controlled } => {
                let forcing = if *controlled { u0(0) } else { 0.0 };
                DVector::from_vec(vec![
                    mu * x[0],
                    lambda * (x[1] - x[0] * x[0]) + forcing,
                ])
            }
            SystemKind::DuffingForced { a, b, d, f0, omega } => DVector::from_vec(vec![
                x[1],
                a * x[0] + b * x[0].powi(3) + d * x[1] + f0 * (omega * t).cos() + u0(0),
            ]),
            SystemKind::VanDerPol { mu } => DVector::from_vec(vec![
                x[1],
                mu * (1.0 - x[0] * x[0]) * x[1] - x[0] + u0(0),
            ]),
            SystemKind::DcMotorBilinear { la, ra, km, jm, bm, tau_l, ua } => {
                let u = u0(0);
                DVector::from_vec(vec![
                    -(ra / la) * x[0] - (km / la) * x[1] * u + ua / la,
                    -(bm / jm) * x[1] + (km / jm) * x[0] * u - tau_l / jm,
                ])
            }
            SystemKind::Lorenz63 { sigma, rho, beta } => DVector::from_vec(vec![
                sigma * (x[1] - x[0]),
                x[0] * (rho - x[2]) - x[1],
                x[0] * x[1] - beta * x[2],
            ]),
            SystemKind::Pendulum { omega0, damping } => DVector::from_vec(vec![
                x[1],
                -omega0 * omega0 * x[0].sin() - damping * x[1] + u0(0),
            ]),
            SystemKind::LinearGeneric { a, b } => {
                let mut dx = a * x;
                if b.ncols() > 0 && u.len() == b.ncols() {
                    dx += b * u;
                }
                dx
            }
        }
    }

    /// Measured output y = x[output_rows].
    pub fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.output_rows.len(), |i, _| x[self.output_rows[i]])
    }

    pub fn output_matrix(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.output_rows.len(), self.state_dim);
        for (i, &r) in self.output_rows.iter().enumerate() {
            c[(i, r)] = 1.0;
        }
        c
    }

    pub fn linear(a: DMatrix<f64>, b: DMatrix<f64>) -> Self {
        let n = a.nrows();
        let q = b.ncols();
        SystemSpec {
            name: "linear_generic".into(),
            state_dim: n,
            input_dim: q,
            output_rows: (0..n).collect(),
            kind: SystemKind::LinearGeneric { a, b },
        }
    }

    pub fn slow_manifold(mu: f64, lambda: f64, controlled: bool) -> Self {
        SystemSpec {
            name: "slow_manifold".into(),
            state_dim: 2,
            input_dim: if controlled { 1 } else { 0 },
            output_rows: vec![0, 1],
            kind: SystemKind::SlowManifold { mu, lambda, controlled },
        }
    }

    pub fn lorenz63() -> Self {
        make_system("lorenz63", &Value::Null).unwrap()
    }

    pub fn van_der_pol() -> Self {
        make_system("van_der_pol", &Value::Null).unwrap()
    }

    pub fn duffing() -> Self {
        make_system("duffing_forced", &Value::Null).unwrap()
    }

    pub fn dc_motor() -> Self {
        make_system("dc_motor_bilinear", &Value::Null).unwrap()
    }
}

fn param(params: &Value, key: &str, default: f64) -> f64 {
    params
        .get(key)
        .and_then(Value::as_f64)
        .unwrap_or(default)
}

fn param_bool(params: &Value, key: &str, default: bool) -> bool {
    match params.get(key) {
        Some(Value::Bool(b)) => *b,
        Some(v) => v.as_f64().map(|x| x != 0.0).unwrap_or(default),
        None => default,
    }
}

fn param_matrix(params: &Value, key: &str) -> Result<DMatrix<f64>> {
    let rows = params
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput(format!("linear_generic needs `{key}` matrix")))?;
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .map(|cells| cells.iter().filter_map(Value::as_f64).collect())
                .ok_or_else(|| Error::InvalidInput(format!("`{key}` rows must be arrays")))
        })
        .collect::<Result<_>>()?;
    crate::numerics::from_rows(&data)
}

/// Construct a catalog system. `params` overrides the published defaults;
/// pass `Value::Null` (or `{}`) to take them all.
pub fn make_system(name: &str, params: &Value) -> Result<SystemSpec> {
    let spec = match name {
        "slow_manifold" => SystemSpec::slow_manifold(
            param(params, "mu", -0.05),
            param(params, "lambda", 1.0),
            param_bool(params, "controlled", false),
        ),
        "duffing_forced" => SystemSpec {
            name: name.into(),
            state_dim: 2,
            input_dim: 1,
            output_rows: vec![0],
            kind: SystemKind::DuffingForced {
                a: param(params, "a", 1.0),
                b: param(params, "b", -1.0),
                d: param(params, "d", -0.3),
                f0: param(params, "f0", 0.5),
                omega: param(params, "omega", 1.2),
            },
        },
        "van_der_pol" => SystemSpec {
            name: name.into(),
            state_dim: 2,
            input_dim: 1,
            output_rows: vec![0],
            kind: SystemKind::VanDerPol {
                mu: param(params, "mu", 2.0),
            },
        },
        "dc_motor_bilinear" => SystemSpec {
            name: name.into(),
            state_dim: 2,
            input_dim: 1,
            output_rows: vec![1],
            kind: SystemKind::DcMotorBilinear {
                la: param(params, "la", 0.314),
                ra: param(params, "ra", 12.345),
                km: param(params, "km", 0.253),
                jm: param(params, "j", 0.00441),
                bm: param(params, "b", 0.00732),
                tau_l: param(params, "tau_l", 1.47),
                ua: param(params, "ua", 60.0),
            },
        },
        "lorenz63" => SystemSpec {
            name: name.into(),
            state_dim: 3,
            input_dim: 0,
            output_rows: vec![0, 1, 2],
            kind: SystemKind::Lorenz63 {
                sigma: param(params, "sigma", 10.0),
                rho: param(params, "rho", 28.0),
                beta: param(params, "beta", 8.0 / 3.0),
            },
        },
        "pendulum" => SystemSpec {
            name: name.into(),
            state_dim: 2,
            input_dim: 1,
            output_rows: vec![0],
            kind: SystemKind::Pendulum {
                omega0: param(params, "omega0", 1.0),
                damping: param(params, "damping", 0.0),
            },
        },
        "linear_generic" => {
            let a = param_matrix(params, "a")?;
            if !a.is_square() {
                return Err(Error::InvalidInput("linear_generic `a` must be square".into()));
            }
            let b = match params.get("b") {
                Some(_) => param_matrix(params, "b")?,
                None => DMatrix::zeros(a.nrows(), 0),
            };
            if b.ncols() > 0 && b.nrows() != a.nrows() {
                return Err(Error::InvalidInput("linear_generic `b` row mismatch".into()));
            }
            SystemSpec::linear(a, b)
        }
        other => return Err(Error::UnknownSystem(other.into())),
    };
    Ok(spec)
}
