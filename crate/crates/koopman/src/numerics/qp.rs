//! Box-constrained quadratic programming by accelerated projected gradient
//! with an active-set polish. Projection makes feasibility exact; optimality
//! is measured by the projected-gradient fixed-point residual.

use super::{check_finite, check_finite_vec};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

fn clip(x: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| x[i].max(lower[i]).min(upper[i]))
}

/// Projected-gradient fixed-point residual `|| x - clip(x - g(x)) ||_inf`.
fn pg_residual(
    x: &DVector<f64>,
    grad: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> f64 {
    let step = clip(&(x - grad), lower, upper);
    (x - step).amax()
}

/// FISTA with adaptive restart on a smooth convex objective over a box.
///
/// Returns the iterate, its projected-gradient residual, and the iteration
/// count. Shared by the pure QP solver and the soft-constrained MPC solve.
pub fn minimize_box(
    grad: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    lipschitz: f64,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    x0: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> (DVector<f64>, f64, usize) {
    let n = x0.len();
    let mut x = clip(x0, lower, upper);
    if lipschitz <= 1e-300 {
        // flat quadratic part: the minimizer follows the linear term's sign
        let g = grad(&x);
        for i in 0..n {
            if g[i] > 0.0 {
                x[i] = lower[i];
            } else if g[i] < 0.0 {
                x[i] = upper[i];
            }
        }
        let g = grad(&x);
        let res = pg_residual(&x, &g, lower, upper);
        return (x, res, 0);
    }
    let step = 1.0 / lipschitz;
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best = x.clone();
    let mut best_res = f64::INFINITY;
    for iter in 0..max_iter {
        let g = grad(&y);
        let x_next = clip(&(&y - &g * step), lower, upper);
        let res = pg_residual(&x_next, &grad(&x_next), lower, upper);
        if res < best_res {
            best_res = res;
            best = x_next.clone();
        }
        if res <= tol {
            return (x_next, res, iter + 1);
        }
        // gradient-mapping restart
        if (&y - &x_next).dot(&(&x_next - &x)) > 0.0 {
            t = 1.0;
            y = x_next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
            t = t_next;
        }
        x = x_next;
    }
    (best, best_res, max_iter)
}

/// Exact solve on the inactive set, clipped back into the box. Drives the
/// residual to machine precision once the active set settles.
fn active_set_polish(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    x_in: &DVector<f64>,
) -> DVector<f64> {
    let n = q.len();
    let mut x = clip(x_in, lower, upper);
    let mut best = x.clone();
    let mut best_res = pg_residual(&x, &(p * &x + q), lower, upper);
    let mut prev_active: Option<Vec<i8>> = None;

    for _ in 0..40 {
        let g = p * &x + q;
        let mut active = vec![0i8; n];
        let mut free: Vec<usize> = Vec::new();
        for i in 0..n {
            let at_lo = x[i] <= lower[i] + 1e-14 * (1.0 + lower[i].abs());
            let at_hi = x[i] >= upper[i] - 1e-14 * (1.0 + upper[i].abs());
            if at_lo && g[i] > 0.0 {
                active[i] = -1;
            } else if at_hi && g[i] < 0.0 {
                active[i] = 1;
            } else {
                free.push(i);
            }
        }
        if prev_active.as_ref() == Some(&active) {
            break;
        }
        prev_active = Some(active.clone());
        if free.is_empty() {
            break;
        }
        let nf = free.len();
        let mut pf = DMatrix::<f64>::zeros(nf, nf);
        let mut rhs = DVector::<f64>::zeros(nf);
        for (a, &i) in free.iter().enumerate() {
            let mut acc = q[i];
            for j in 0..n {
                if active[j] != 0 {
                    acc += p[(i, j)] * x[j];
                }
            }
            rhs[a] = -acc;
            for (b, &j) in free.iter().enumerate() {
                pf[(a, b)] = p[(i, j)];
            }
        }
        let sol = match pf.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match pf.lu().solve(&rhs) {
                Some(s) => s,
                None => break,
            },
        };
        let mut x_new = x.clone();
        for (a, &i) in free.iter().enumerate() {
            x_new[i] = sol[a];
        }
        for i in 0..n {
            if active[i] == -1 {
                x_new[i] = lower[i];
            } else if active[i] == 1 {
                x_new[i] = upper[i];
            }
        }
        x = clip(&x_new, lower, upper);
        let res = pg_residual(&x, &(p * &x + q), lower, upper);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
        if res <= 1e-12 {
            break;
        }
    }
    best
}

/// Minimizer of `0.5 u^T P u + q^T u` over `lower <= u <= upper`.
///
/// `P` must be symmetric positive semidefinite within tolerance; feasibility
/// of the result is exact and the projected-gradient residual is at most
/// 1e-6 (typically far smaller after the polish step).
pub fn solve_box_qp(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Result<DVector<f64>> {
    solve_box_qp_warm(p, q, lower, upper, None)
}

pub fn solve_box_qp_warm(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    warm: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let n = q.len();
    if p.nrows() != n || p.ncols() != n || lower.len() != n || upper.len() != n {
        return Err(Error::InvalidInput("solve_box_qp dimension mismatch".into()));
    }
    check_finite("qp hessian", p)?;
    check_finite_vec("qp linear term", q)?;
    if (0..n).any(|i| lower[i] > upper[i]) {
        return Err(Error::InvalidProblem("lower bound exceeds upper".into()));
    }
    let scale = p.amax().max(1.0);
    let asym = (p - p.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::InvalidProblem(format!(
            "P not symmetric: max asymmetry {asym:.3e}"
        )));
    }
    let ps = (p + p.transpose()) * 0.5;
    let eigs = ps.clone().symmetric_eigen();
    let min_eig = eigs.eigenvalues.min();
    let max_eig = eigs.eigenvalues.max().max(0.0);
    if min_eig < -1e-10 * scale {
        return Err(Error::InvalidProblem(format!(
            "P indefinite: min eigenvalue {min_eig:.3e}"
        )));
    }

    let x0 = warm.cloned().unwrap_or_else(|| {
        clip(&DVector::zeros(n), lower, upper)
    });
    let tol = 1e-9 * (1.0 + q.amax());
    let grad = |x: &DVector<f64>| &ps * x + q;
    let (x, _res, iters) = minimize_box(&grad, max_eig, lower, upper, &x0, tol, 50_000);
    let x = active_set_polish(&ps, q, lower, upper, &x);
    let res = pg_residual(&x, &(&ps * &x + q), lower, upper);
    if res > 1e-6 && iters >= 50_000 {
        return Err(Error::QpIterationCap {
            best: x.as_slice().to_vec(),
            residual: res,
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clamped_scalar_optimum() {
        // min (u - 1)^2 = 0.5 * u^T (2) u + (-2) u + const on [-0.5, 0.5]
        let p = DMatrix::from_element(1, 1, 2.0);
        let q = DVector::from_element(1, -2.0);
        let u = solve_box_qp(
            &p,
            &q,
            &DVector::from_element(1, -0.5),
            &DVector::from_element(1, 0.5),
        )
        .unwrap();
        assert!((u[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_zero_linear() {
        let n = 6;
        let p = DMatrix::<f64>::identity(n, n);
        let q = DVector::zeros(n);
        let u = solve_box_qp(
            &p,
            &q,
            &DVector::from_element(n, -1.0),
            &DVector::from_element(n, 1.0),
        )
        .unwrap();
        assert!(u.amax() < 1e-9);
    }

    #[test]
    fn random_psd_beats_random_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 5;
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let p = &a * a.transpose();
        let q = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let lower = DVector::from_element(n, -2.0);
        let upper = DVector::from_element(n, 2.0);
        let u = solve_box_qp(&p, &q, &lower, &upper).unwrap();
        let obj = |x: &DVector<f64>| 0.5 * (x.transpose() * &p * x)[(0, 0)] + q.dot(x);
        let fstar = obj(&u);
        for _ in 0..10_000 {
            let x = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            assert!(fstar <= obj(&x) + 1e-8);
        }
    }

    #[test]
    fn kkt_residual_and_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(2..10);
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let p = &a * a.transpose() * 3.0;
            let q = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
            let lower = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..0.0));
            let upper = DVector::from_fn(n, |_, _| rng.gen_range(0.0..2.0));
            let u = solve_box_qp(&p, &q, &lower, &upper).unwrap();
            for i in 0..n {
                assert!(u[i] >= lower[i] && u[i] <= upper[i]);
            }
            let g = &p * &u + &q;
            assert!(pg_residual(&u, &g, &lower, &upper) <= 1e-6);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let q = DVector::zeros(2);
        let lo = DVector::from_element(2, -1.0);
        let hi = DVector::from_element(2, 1.0);
        assert!(matches!(
            solve_box_qp(&p, &q, &lo, &hi),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn asymmetric_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let q = DVector::zeros(2);
        let lo = DVector::from_element(2, -1.0);
        let hi = DVector::from_element(2, 1.0);
        assert!(solve_box_qp(&p, &q, &lo, &hi).is_err());
    }
}
