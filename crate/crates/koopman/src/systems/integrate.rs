//! Fixed-step RK4 integration with zero-order-hold inputs.

use super::SystemSpec;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Input applied over the integration window, held constant across each step.
#[derive(Debug, Clone)]
pub enum InputSignal {
    Zero,
    Constant(DVector<f64>),
    /// One column per step (q x n_steps), zero-order hold.
    ZeroOrderHold(DMatrix<f64>),
}

impl InputSignal {
    fn at_step(&self, k: usize, q: usize) -> DVector<f64> {
        match self {
            InputSignal::Zero => DVector::zeros(q),
            InputSignal::Constant(u) => u.clone(),
            InputSignal::ZeroOrderHold(m) => m.column(k.min(m.ncols().saturating_sub(1))).into_owned(),
        }
    }
}

/// Uniformly sampled trajectory: states as columns, inputs aligned to the
/// steps between consecutive samples.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    /// n x m state samples.
    pub states: DMatrix<f64>,
    /// q x (m-1) applied inputs (empty matrix when autonomous).
    pub inputs: DMatrix<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t0 + k as f64 * self.dt).collect()
    }

    /// Snapshot pair (X, X') of consecutive state columns.
    pub fn snapshot_pair(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let m = self.len();
        (
            self.states.columns(0, m - 1).into_owned(),
            self.states.columns(1, m - 1).into_owned(),
        )
    }

    /// Output series through a row selector (one row per selected state).
    pub fn output_series(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), self.len(), |i, k| self.states[(rows[i], k)])
    }
}

/// Classical 4th-order Runge-Kutta with the input held constant over each
/// step. `(t1 - t0) / dt` must be an integer within 1e-9 relative.
pub fn integrate_rk4(
    sys: &SystemSpec,
    x0: &DVector<f64>,
    u: &InputSignal,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    if dt <= 0.0 {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    if x0.len() != sys.state_dim {
        return Err(Error::InvalidInput(format!(
            "x0 has {} entries, system `{}` has state dim {}",
            x0.len(),
            sys.name,
            sys.state_dim
        )));
    }
    let span = t1 - t0;
    let steps_f = span / dt;
    let steps = steps_f.round();
    if steps < 0.0 || (steps_f - steps).abs() > 1e-9 * steps.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "(t1 - t0) / dt = {steps_f} is not an integer step count"
        )));
    }
    let steps = steps as usize;
    let q = sys.input_dim;
    let mut states = DMatrix::<f64>::zeros(sys.state_dim, steps + 1);
    let mut inputs = DMatrix::<f64>::zeros(q, steps);
    states.set_column(0, x0);
    let mut x = x0.clone();
    for k in 0..steps {
        let uk = u.at_step(k, q);
        if q > 0 {
            inputs.set_column(k, &uk);
        }
        let t = t0 + k as f64 * dt;
        x = rk4_step(sys, &x, &uk, t, dt);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergedTrajectory { last_finite: k });
        }
        states.set_column(k + 1, &x);
    }
    Ok(Trajectory {
        t0,
        dt,
        states,
        inputs,
    })
}

pub(crate) fn rk4_step(
    sys: &SystemSpec,
    x: &DVector<f64>,
    u: &DVector<f64>,
    t: f64,
    dt: f64,
) -> DVector<f64> {
    let k1 = sys.rhs(x, u, t);
    let k2 = sys.rhs(&(x + &k1 * (dt / 2.0)), u, t + dt / 2.0);
    let k3 = sys.rhs(&(x + &k2 * (dt / 2.0)), u, t + dt / 2.0);
    let k4 = sys.rhs(&(x + &k3 * dt), u, t + dt);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn scalar_growth() -> SystemSpec {
        SystemSpec::linear(dmatrix![1.0], DMatrix::zeros(1, 0))
    }

    #[test]
    fn exponential_endpoint() {
        let sys = scalar_growth();
        let traj = integrate_rk4(
            &sys,
            &DVector::from_element(1, 1.0),
            &InputSignal::Zero,
            0.0,
            1.0,
            1e-3,
        )
        .unwrap();
        assert_eq!(traj.len(), 1001);
        assert!((traj.states[(0, 1000)] - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn zero_rhs_constant() {
        let sys = SystemSpec::linear(dmatrix![0.0], DMatrix::zeros(1, 0));
        let traj = integrate_rk4(
            &sys,
            &DVector::from_element(1, 3.5),
            &InputSignal::Zero,
            0.0,
            0.5,
            0.01,
        )
        .unwrap();
        for k in 0..traj.len() {
            assert_eq!(traj.states[(0, k)], 3.5);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let sys = scalar_growth();
        let x0 = DVector::from_element(1, 1.0);
        let exact = 1f64.exp();
        let err = |dt: f64| {
            let traj = integrate_rk4(&sys, &x0, &InputSignal::Zero, 0.0, 1.0, dt).unwrap();
            (traj.states[(0, traj.len() - 1)] - exact).abs()
        };
        let ratio = err(0.05) / err(0.025);
        assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn lorenz_step_halving() {
        let sys = SystemSpec::lorenz63();
        let x0 = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let endpoint = |dt: f64| {
            integrate_rk4(&sys, &x0, &InputSignal::Zero, 0.0, 1.0, dt)
                .unwrap()
                .states
                .column(((1.0 / dt).round()) as usize)
                .into_owned()
        };
        let e1 = endpoint(1e-3);
        let e2 = endpoint(5e-4);
        let e3 = endpoint(2.5e-4);
        let d12 = (e1 - &e2).norm();
        let d23 = (&e2 - e3).norm();
        let ratio = d12 / d23;
        assert!(ratio > 10.0 && ratio < 26.0, "ratio {ratio}");
    }

    #[test]
    fn duffing_hamiltonian_conserved() {
        // undamped, unforced: H = x2^2/2 - x1^2/2 + x1^4/4 is constant
        let sys = make_duffing_conservative();
        let x0 = DVector::from_vec(vec![0.5, 0.3]);
        let traj = integrate_rk4(&sys, &x0, &InputSignal::Zero, 0.0, 10.0, 1e-3).unwrap();
        let h = |x1: f64, x2: f64| x2 * x2 / 2.0 - x1 * x1 / 2.0 + x1.powi(4) / 4.0;
        let h0 = h(x0[0], x0[1]);
        let mut drift = 0.0f64;
        for k in 0..traj.len() {
            drift = drift.max((h(traj.states[(0, k)], traj.states[(1, k)]) - h0).abs());
        }
        assert!(drift < 1e-6, "drift {drift}");
    }

    fn make_duffing_conservative() -> SystemSpec {
        super::super::make_system(
            "duffing_forced",
            &serde_json::json!({"d": 0.0, "f0": 0.0}),
        )
        .unwrap()
    }

    #[test]
    fn zero_order_hold_reconstruction() {
        let sys = super::super::make_system("pendulum", &serde_json::Value::Null).unwrap();
        let u = DMatrix::from_row_slice(1, 4, &[0.3, 0.3, -0.7, 0.5]);
        let traj = integrate_rk4(
            &sys,
            &DVector::zeros(2),
            &InputSignal::ZeroOrderHold(u.clone()),
            0.0,
            0.4,
            0.1,
        )
        .unwrap();
        assert_eq!(traj.inputs, u);
    }

    #[test]
    fn divergence_reported() {
        // dx = x^2 from x0 = 1 blows up at t = 1
        let sys = super::super::make_system(
            "linear_generic",
            &serde_json::json!({"a": [[0.0]]}),
        )
        .unwrap();
        let mut sys = sys;
        sys.kind = super::super::SystemKind::LinearGeneric {
            a: dmatrix![60.0],
            b: DMatrix::zeros(1, 0),
        };
        let r = integrate_rk4(
            &sys,
            &DVector::from_element(1, 1e300),
            &InputSignal::Zero,
            0.0,
            20.0,
            0.1,
        );
        assert!(matches!(r, Err(Error::DivergedTrajectory { .. })));
    }

    #[test]
    fn non_integer_step_count_rejected() {
        let sys = scalar_growth();
        let r = integrate_rk4(
            &sys,
            &DVector::from_element(1, 1.0),
            &InputSignal::Zero,
            0.0,
            1.0,
            0.3,
        );
        assert!(r.is_err());
    }
}
