//! Training-set generation: uniformly sampled initial conditions inside a
//! domain box, excited by a seeded random binary input.

use super::{integrate_rk4, InputSignal, SystemSpec, Trajectory};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Box {
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
}

impl Box {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Box {
            lo: DVector::from_vec(lo),
            hi: DVector::from_vec(hi),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| rng.gen_range(self.lo[i]..=self.hi[i]))
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }
}

#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub trajectories: Vec<Trajectory>,
    pub domain: Box,
    pub input_box: Option<Box>,
    pub seed: u64,
}

impl TrainingSet {
    pub fn total_samples(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    /// Concatenated snapshot pairs (X, X', Upsilon) across trajectories;
    /// pairs never straddle a trajectory boundary.
    pub fn snapshot_pairs(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.trajectories[0].states.nrows();
        let q = self.trajectories[0].inputs.nrows();
        let total: usize = self.trajectories.iter().map(|t| t.len() - 1).sum();
        let mut x = DMatrix::<f64>::zeros(n, total);
        let mut xp = DMatrix::<f64>::zeros(n, total);
        let mut ups = DMatrix::<f64>::zeros(q, total);
        let mut col = 0;
        for traj in &self.trajectories {
            for k in 0..traj.len() - 1 {
                x.set_column(col, &traj.states.column(k));
                xp.set_column(col, &traj.states.column(k + 1));
                if q > 0 {
                    ups.set_column(col, &traj.inputs.column(k));
                }
                col += 1;
            }
        }
        (x, xp, ups)
    }
}

/// Per-step random binary signal switching between the input-box extremes
/// with probability 0.1, started at a random extreme.
fn binary_signal(rng: &mut impl Rng, input_box: &Box, steps: usize) -> DMatrix<f64> {
    let q = input_box.dim();
    let mut u = DMatrix::<f64>::zeros(q, steps);
    let mut level: Vec<bool> = (0..q).map(|_| rng.gen_bool(0.5)).collect();
    for k in 0..steps {
        for i in 0..q {
            if k > 0 && rng.gen_bool(0.1) {
                level[i] = !level[i];
            }
            u[(i, k)] = if level[i] { input_box.hi[i] } else { input_box.lo[i] };
        }
    }
    u
}

pub fn generate_training_set(
    sys: &SystemSpec,
    n_ic: usize,
    n_samples: usize,
    dt: f64,
    domain: &Box,
    input_box: Option<&Box>,
    seed: u64,
) -> Result<TrainingSet> {
    if n_ic == 0 || n_samples == 0 {
        return Err(Error::InvalidInput("n_ic and n_samples must be >= 1".into()));
    }
    if domain.dim() != sys.state_dim {
        return Err(Error::InvalidInput(format!(
            "domain dim {} does not match state dim {}",
            domain.dim(),
            sys.state_dim
        )));
    }
    if sys.input_dim > 0 {
        match input_box {
            None => {
                return Err(Error::InvalidInput(
                    "system has inputs but no input box given".into(),
                ))
            }
            Some(b) if b.dim() != sys.input_dim => {
                return Err(Error::InvalidInput("input box dim mismatch".into()))
            }
            _ => {}
        }
    }

    let steps = n_samples - 1;
    let t1 = steps as f64 * dt;
    let mut trajectories = Vec::with_capacity(n_ic);
    for i in 0..n_ic {
        // independent substream per trajectory, reproducible and mergeable
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let x0 = domain.sample(&mut rng);
        let signal = match (sys.input_dim, input_box) {
            (0, _) | (_, None) => InputSignal::Zero,
            (_, Some(b)) => InputSignal::ZeroOrderHold(binary_signal(&mut rng, b, steps)),
        };
        let traj = integrate_rk4(sys, &x0, &signal, 0.0, t1, dt)?;
        trajectories.push(traj);
    }
    Ok(TrainingSet {
        trajectories,
        domain: domain.clone(),
        input_box: input_box.cloned(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_sample_count() {
        let sys = SystemSpec::slow_manifold(-0.05, 1.0, false);
        let domain = Box::new(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let ts = generate_training_set(&sys, 10, 100, 0.01, &domain, None, 1).unwrap();
        assert_eq!(ts.total_samples(), 1000);
        assert_eq!(ts.trajectories.len(), 10);
    }

    #[test]
    fn autonomous_has_empty_inputs() {
        let sys = SystemSpec::lorenz63();
        let domain = Box::new(vec![-5.0; 3], vec![5.0; 3]);
        let ts = generate_training_set(&sys, 2, 50, 0.01, &domain, None, 1).unwrap();
        assert_eq!(ts.trajectories[0].inputs.nrows(), 0);
    }

    #[test]
    fn seeded_reproducibility_is_bit_exact() {
        let sys = SystemSpec::van_der_pol();
        let domain = Box::new(vec![-2.0, -2.0], vec![2.0, 2.0]);
        let ubox = Box::new(vec![-5.0], vec![5.0]);
        let a = generate_training_set(&sys, 3, 40, 0.1, &domain, Some(&ubox), 99).unwrap();
        let b = generate_training_set(&sys, 3, 40, 0.1, &domain, Some(&ubox), 99).unwrap();
        for (ta, tb) in a.trajectories.iter().zip(&b.trajectories) {
            assert_eq!(ta.states, tb.states);
            assert_eq!(ta.inputs, tb.inputs);
        }
    }

    #[test]
    fn initial_conditions_inside_domain_and_inputs_binary() {
        let sys = SystemSpec::van_der_pol();
        let domain = Box::new(vec![-2.0, -2.0], vec![2.0, 2.0]);
        let ubox = Box::new(vec![-5.0], vec![5.0]);
        let ts = generate_training_set(&sys, 5, 30, 0.1, &domain, Some(&ubox), 7).unwrap();
        for traj in &ts.trajectories {
            assert!(domain.contains(&traj.states.column(0).into_owned()));
            for k in 0..traj.inputs.ncols() {
                let u = traj.inputs[(0, k)];
                assert!(u == -5.0 || u == 5.0);
            }
        }
    }

    #[test]
    fn domain_mismatch_rejected() {
        let sys = SystemSpec::lorenz63();
        let domain = Box::new(vec![-1.0], vec![1.0]);
        assert!(generate_training_set(&sys, 1, 10, 0.01, &domain, None, 0).is_err());
    }
}
