//! Truncated singular value decomposition with selectable rank rules.

use super::check_finite;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// How many singular triplets to retain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// Keep exactly `k` triplets.
    Fixed(usize),
    /// Keep the smallest r with cumulative squared singular-value energy
    /// >= tau * total (tau in (0, 1]).
    Energy(f64),
    /// Keep singular values strictly above an absolute threshold.
    Threshold(f64),
    /// Hard threshold at 1e-10 * s_max.
    Default,
}

/// Rank-r SVD: `m ~ u * diag(s) * v^T` with orthonormal `u`, `v` columns.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
    pub rank: usize,
}

impl SvdResult {
    /// `u * diag(s) * v^T` at the retained rank.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for j in 0..self.rank {
            us.column_mut(j).scale_mut(self.s[j]);
        }
        &us * self.v.transpose()
    }

    /// Pseudo-inverse action `v * diag(1/s) * u^T * b` at the retained rank.
    pub fn pinv_apply(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut ub = self.u.transpose() * b;
        for i in 0..self.rank {
            ub.row_mut(i).scale_mut(1.0 / self.s[i]);
        }
        &self.v * ub
    }
}

pub fn svd_truncated(m: &DMatrix<f64>, rule: RankRule) -> Result<SvdResult> {
    if m.is_empty() {
        return Err(Error::InvalidInput("empty matrix in svd_truncated".into()));
    }
    check_finite("svd input", m)?;
    let min_dim = m.nrows().min(m.ncols());
    if let RankRule::Fixed(k) = rule {
        if k == 0 || k > min_dim {
            return Err(Error::InvalidRank {
                requested: k,
                max: min_dim,
            });
        }
    }
    if let RankRule::Energy(tau) = rule {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "energy fraction {tau} outside (0, 1]"
            )));
        }
    }

    let svd = m.clone().svd(true, true);
    let mut u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut v = v_t.transpose();
    let mut s = svd.singular_values;

    // nalgebra sorts descending, but do not rely on it.
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    if order.windows(2).any(|w| w[0] > w[1]) {
        let s_old = s.clone();
        let u_old = u.clone();
        let v_old = v.clone();
        for (new_j, &old_j) in order.iter().enumerate() {
            s[new_j] = s_old[old_j];
            u.set_column(new_j, &u_old.column(old_j));
            v.set_column(new_j, &v_old.column(old_j));
        }
    }

    let smax = s[0];
    let rank = match rule {
        RankRule::Fixed(k) => k,
        RankRule::Threshold(t) => s.iter().filter(|&&x| x > t).count(),
        RankRule::Default => s.iter().filter(|&&x| x > 1e-10 * smax).count(),
        RankRule::Energy(tau) => {
            let total: f64 = s.iter().map(|x| x * x).sum();
            if total == 0.0 {
                0
            } else {
                let mut acc = 0.0;
                let mut r = s.len();
                for (i, x) in s.iter().enumerate() {
                    acc += x * x;
                    if acc >= tau * total {
                        r = i + 1;
                        break;
                    }
                }
                r
            }
        }
    };

    Ok(SvdResult {
        u: u.columns(0, rank).into_owned(),
        s: DVector::from_fn(rank, |i, _| s[i]),
        v: v.columns(0, rank).into_owned(),
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_fixed_rank() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let r = svd_truncated(&m, RankRule::Fixed(2)).unwrap();
        assert_eq!(r.rank, 2);
        assert!((r.s[0] - 3.0).abs() < 1e-12);
        assert!((r.s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_full_energy() {
        let m = DMatrix::<f64>::identity(4, 4);
        let r = svd_truncated(&m, RankRule::Energy(1.0)).unwrap();
        assert_eq!(r.rank, 4);
        for i in 0..4 {
            assert!((r.s[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outer_product_rank_three() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut m = DMatrix::<f64>::zeros(10, 8);
        for _ in 0..3 {
            let a = DVector::from_fn(10, |_, _| rng.gen_range(-1.0..1.0));
            let b = DVector::from_fn(8, |_, _| rng.gen_range(-1.0..1.0));
            m += a * b.transpose();
        }
        let r = svd_truncated(&m, RankRule::Threshold(1e-10)).unwrap();
        assert_eq!(r.rank, 3);
    }

    #[test]
    fn reconstruction_error_matches_tail_energy() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(12, 9, |_, _| rng.gen_range(-1.0..1.0));
        let full = svd_truncated(&m, RankRule::Threshold(0.0)).unwrap();
        let r = svd_truncated(&m, RankRule::Fixed(4)).unwrap();
        let err = (&m - r.reconstruct()).norm();
        let tail: f64 = (4..full.rank).map(|i| full.s[i] * full.s[i]).sum::<f64>();
        assert!((err - tail.sqrt()).abs() <= 1e-9 * err.max(1.0));
    }

    #[test]
    fn orthonormal_columns() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DMatrix::from_fn(30, 17, |_, _| rng.gen_range(-2.0..2.0));
        let r = svd_truncated(&m, RankRule::Default).unwrap();
        let iu = r.u.transpose() * &r.u - DMatrix::identity(r.rank, r.rank);
        let iv = r.v.transpose() * &r.v - DMatrix::identity(r.rank, r.rank);
        assert!(iu.amax() < 1e-10);
        assert!(iv.amax() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = DMatrix::<f64>::zeros(3, 3);
        assert!(matches!(
            svd_truncated(&m, RankRule::Fixed(4)),
            Err(Error::InvalidRank { .. })
        ));
        let empty = DMatrix::<f64>::zeros(0, 0);
        assert!(svd_truncated(&empty, RankRule::Default).is_err());
    }
}
