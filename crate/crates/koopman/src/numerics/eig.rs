//! Dense nonsymmetric eigendecomposition.
//!
//! Works in complex arithmetic throughout: the matrix is balanced, reduced to
//! upper Hessenberg form by Householder reflections, triangularized by a
//! shifted QR iteration with Givens rotations, and eigenvectors are recovered
//! by back-substitution on the triangular factor. Real inputs get an extra
//! pass that snaps the spectrum to exact conjugate symmetry.

use super::{check_finite, complexify};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Spectrum and eigenvectors of a square matrix.
///
/// Right vectors have unit 2-norm columns with `a * v = lambda * v`; the
/// optional left vectors satisfy the transpose relation
/// `xi^T * a = lambda * xi^T` (no conjugation).
#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub left_vectors: Option<DMatrix<Complex64>>,
}

const MAX_SWEEPS_PER_EIG: usize = 60;

pub fn eig_dense(m: &DMatrix<f64>, want_left: bool) -> Result<EigResult> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "eig_dense needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite("eig input", m)?;
    let mut out = eig_core(&complexify(m), want_left)?;
    symmetrize_conjugates(&mut out, matrix_scale_c(&complexify(m)));
    sort_eig(&mut out);
    Ok(out)
}

pub fn eig_dense_complex(m: &DMatrix<Complex64>, want_left: bool) -> Result<EigResult> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "eig_dense_complex needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(
            "matrix contains NaN or Inf entries".into(),
        ));
    }
    let mut out = eig_core(m, want_left)?;
    sort_eig(&mut out);
    Ok(out)
}

fn matrix_scale_c(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300)
}

fn eig_core(a: &DMatrix<Complex64>, want_left: bool) -> Result<EigResult> {
    let n = a.nrows();
    if n == 0 {
        return Ok(EigResult {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
            left_vectors: want_left.then(|| DMatrix::zeros(0, 0)),
        });
    }

    let (mut h, d) = balance(a);
    let mut q = hessenberg(&mut h);
    qr_triangularize(&mut h, &mut q)?;

    let values: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let scale = matrix_scale_c(a).max(values.iter().map(|z| z.norm()).fold(0.0, f64::max));

    let mut vectors = right_vectors_from_schur(&h, &q, scale);
    // undo balancing: v = D v_b, xi = D^{-1} xi_b
    for j in 0..n {
        for i in 0..n {
            vectors[(i, j)] *= d[i];
        }
    }
    normalize_columns(&mut vectors);

    let left_vectors = if want_left {
        let mut lv = left_vectors_from_schur(&h, &q, scale);
        for j in 0..n {
            for i in 0..n {
                lv[(i, j)] /= d[i];
            }
        }
        normalize_columns(&mut lv);
        Some(lv)
    } else {
        None
    };

    Ok(EigResult {
        values,
        vectors,
        left_vectors,
    })
}

/// Diagonal similarity scaling with powers of two (no permutation step).
fn balance(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut d = vec![1.0f64; n];
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| m[(j, i)].norm()).sum();
            let mut r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if (c + r) < 0.95 * s && f != 1.0 {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (m, d)
}

/// Householder reduction to upper Hessenberg form; returns the accumulated Q.
fn hessenberg(h: &mut DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = h.nrows();
    let mut q = DMatrix::<Complex64>::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k, rows k+1..n
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += h[(i, k)].norm_sqr();
        }
        let alpha = h[(k + 1, k)];
        let norm = norm2.sqrt();
        if norm <= 1e-300 {
            continue;
        }
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let beta = -phase * norm;
        let mut v = DVector::<Complex64>::zeros(n);
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= beta;
        let vnorm = v.norm();
        if vnorm <= 1e-300 {
            continue;
        }
        v /= Complex64::new(vnorm, 0.0);

        // H := (I - 2 v v^H) H
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in k + 1..n {
                dot += v[i].conj() * h[(i, j)];
            }
            let two_dot = 2.0 * dot;
            for i in k + 1..n {
                h[(i, j)] -= two_dot * v[i];
            }
        }
        // H := H (I - 2 v v^H)
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += h[(i, j)] * v[j];
            }
            let two_dot = 2.0 * dot;
            for j in k + 1..n {
                h[(i, j)] -= two_dot * v[j].conj();
            }
        }
        // Q := Q (I - 2 v v^H)
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += q[(i, j)] * v[j];
            }
            let two_dot = 2.0 * dot;
            for j in k + 1..n {
                q[(i, j)] -= two_dot * v[j].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    q
}

/// Complex Givens rotation zeroing g: G [f; g] = [r; 0] with real c.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), f);
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm(), Complex64::new(g.norm(), 0.0));
    }
    let hyp = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / hyp;
    let s = (f / f.norm()) * g.conj() / hyp;
    let r = (f / f.norm()) * hyp;
    (c, s, r)
}

/// Shifted QR iteration driving a Hessenberg matrix to triangular form.
fn qr_triangularize(h: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>) -> Result<()> {
    let n = h.nrows();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter_count = 0usize;
    let mut total_cap = MAX_SWEEPS_PER_EIG * n;

    loop {
        // deflate converged eigenvalues at the bottom
        while hi > 0 {
            let small = eps * (h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm()).max(1e-300);
            if h[(hi, hi - 1)].norm() <= small {
                h[(hi, hi - 1)] = Complex64::new(0.0, 0.0);
                hi -= 1;
                iter_count = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            return Ok(());
        }
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let small = eps * (h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm()).max(1e-300);
            if h[(lo, lo - 1)].norm() <= small {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        if total_cap == 0 {
            return Err(Error::NumericalFailure(format!(
                "QR iteration did not converge (block {lo}..{hi}, subdiagonal {:.3e})",
                h[(hi, hi - 1)].norm()
            )));
        }
        total_cap -= 1;
        iter_count += 1;

        // Wilkinson shift from the trailing 2x2, exceptional shift on stalls
        let mu = if iter_count % 12 == 0 {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let dd = h[(hi, hi)];
            let tr_half = (a + dd) * 0.5;
            let disc = ((a - dd) * (a - dd) * 0.25 + b * c).sqrt();
            let l1 = tr_half + disc;
            let l2 = tr_half - disc;
            if (l1 - dd).norm() <= (l2 - dd).norm() {
                l1
            } else {
                l2
            }
        };

        // implicit single-shift sweep over the active block
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s, _) = givens(x, y);
            let sc = s.conj();
            // left: rows k, k+1
            let col_start = k.saturating_sub(1).max(lo.saturating_sub(1));
            for j in col_start..n {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = c * t1 + s * t2;
                h[(k + 1, j)] = -sc * t1 + c * t2;
            }
            // right: columns k, k+1
            let row_end = (k + 2).min(hi) + 1;
            for i in 0..row_end {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = c * t1 + sc * t2;
                h[(i, k + 1)] = -s * t1 + c * t2;
            }
            // accumulate
            for i in 0..n {
                let t1 = q[(i, k)];
                let t2 = q[(i, k + 1)];
                q[(i, k)] = c * t1 + sc * t2;
                q[(i, k + 1)] = -s * t1 + c * t2;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
}

/// Eigenvectors of the upper-triangular factor mapped back through Q.
fn right_vectors_from_schur(
    t: &DMatrix<Complex64>,
    q: &DMatrix<Complex64>,
    scale: f64,
) -> DMatrix<Complex64> {
    let n = t.nrows();
    let smallnum = f64::EPSILON * scale.max(1e-300);
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let lambda = t[(j, j)];
        let mut v = DVector::<Complex64>::zeros(n);
        v[j] = Complex64::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut num = Complex64::new(0.0, 0.0);
            for k in i + 1..=j {
                num += t[(i, k)] * v[k];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < smallnum {
                den = Complex64::new(smallnum, 0.0);
            }
            v[i] = -num / den;
            if v[i].norm() > 1e120 {
                let inv = Complex64::new(1e-120, 0.0);
                for k in i..=j {
                    v[k] *= inv;
                }
            }
        }
        let full = q * v;
        vecs.set_column(j, &full);
    }
    vecs
}

/// Transpose-sense left eigenvectors (xi^T a = lambda xi^T) from the Schur
/// factorization: row vector l solves l T = lambda l, then xi = conj(Q) l.
fn left_vectors_from_schur(
    t: &DMatrix<Complex64>,
    q: &DMatrix<Complex64>,
    scale: f64,
) -> DMatrix<Complex64> {
    let n = t.nrows();
    let smallnum = f64::EPSILON * scale.max(1e-300);
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let lambda = t[(j, j)];
        let mut l = DVector::<Complex64>::zeros(n);
        l[j] = Complex64::new(1.0, 0.0);
        for i in j + 1..n {
            let mut num = Complex64::new(0.0, 0.0);
            for k in j..i {
                num += l[k] * t[(k, i)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < smallnum {
                den = Complex64::new(smallnum, 0.0);
            }
            l[i] = -num / den;
            if l[i].norm() > 1e120 {
                let inv = Complex64::new(1e-120, 0.0);
                for k in j..=i {
                    l[k] *= inv;
                }
            }
        }
        // w^H = l Q^H  =>  xi = conj(w) = conj(Q) l
        let mut xi = DVector::<Complex64>::zeros(n);
        for r in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += q[(r, k)].conj() * l[k];
            }
            xi[r] = acc;
        }
        vecs.set_column(j, &xi);
    }
    vecs
}

/// Unit 2-norm columns with the largest-magnitude entry rotated real-positive.
fn normalize_columns(m: &mut DMatrix<Complex64>) {
    let (n, cols) = m.shape();
    for j in 0..cols {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        let mut norm2 = 0.0;
        for i in 0..n {
            let a = m[(i, j)].norm();
            norm2 += a * a;
            if a > best_norm {
                best_norm = a;
                best = i;
            }
        }
        if norm2 <= 0.0 {
            continue;
        }
        let phase = m[(best, j)] / best_norm;
        let factor = phase.conj() / norm2.sqrt();
        for i in 0..n {
            m[(i, j)] *= factor;
        }
    }
}

/// Snap the spectrum of a real matrix to exact conjugate symmetry.
fn symmetrize_conjugates(out: &mut EigResult, scale: f64) {
    let n = out.values.len();
    let pair_tol = 1e-8 * scale + 1e-300;
    let real_tol = 1e-10 * scale;
    let mut paired = vec![false; n];

    for j in 0..n {
        if paired[j] || out.values[j].im.abs() <= real_tol {
            continue;
        }
        let target = out.values[j].conj();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..n {
            if k == j || paired[k] {
                continue;
            }
            if out.values[k].im.signum() == out.values[j].im.signum() {
                continue;
            }
            let d = (out.values[k] - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        if let Some((k, d)) = best {
            if d <= pair_tol {
                let avg = (out.values[j] + out.values[k].conj()) * 0.5;
                out.values[j] = avg;
                out.values[k] = avg.conj();
                let vj = out.vectors.column(j).map(|z| z.conj());
                out.vectors.set_column(k, &vj);
                if let Some(lv) = out.left_vectors.as_mut() {
                    let lj = lv.column(j).map(|z| z.conj());
                    lv.set_column(k, &lj);
                }
                paired[j] = true;
                paired[k] = true;
            }
        }
    }

    for j in 0..n {
        if paired[j] {
            continue;
        }
        if out.values[j].im.abs() <= real_tol {
            out.values[j].im = 0.0;
            realify_column(&mut out.vectors, j);
            if let Some(lv) = out.left_vectors.as_mut() {
                realify_column(lv, j);
            }
        }
    }
}

/// For a simple real eigenvalue the eigenvector is a phase times a real
/// vector; normalization already rotated the phase away, so dropping the
/// imaginary part is safe whenever it is negligible.
fn realify_column(m: &mut DMatrix<Complex64>, j: usize) {
    let n = m.nrows();
    let imag_norm: f64 = (0..n).map(|i| m[(i, j)].im.powi(2)).sum::<f64>().sqrt();
    if imag_norm < 1e-8 {
        let mut norm2 = 0.0;
        for i in 0..n {
            m[(i, j)].im = 0.0;
            norm2 += m[(i, j)].re * m[(i, j)].re;
        }
        if norm2 > 0.0 {
            let inv = Complex64::new(1.0 / norm2.sqrt(), 0.0);
            for i in 0..n {
                m[(i, j)] *= inv;
            }
        }
    }
}

/// Deterministic ordering: |lambda| descending, then argument ascending.
fn sort_eig(out: &mut EigResult) {
    let n = out.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (out.values[a], out.values[b]);
        lb.norm()
            .partial_cmp(&la.norm())
            .unwrap()
            .then(la.arg().partial_cmp(&lb.arg()).unwrap())
    });
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return;
    }
    let values_old = out.values.clone();
    let vectors_old = out.vectors.clone();
    let left_old = out.left_vectors.clone();
    for (new_j, &old_j) in order.iter().enumerate() {
        out.values[new_j] = values_old[old_j];
        out.vectors.set_column(new_j, &vectors_old.column(old_j));
        if let (Some(lv), Some(lo)) = (out.left_vectors.as_mut(), left_old.as_ref()) {
            lv.set_column(new_j, &lo.column(old_j));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DMatrix<f64>, r: &EigResult) -> f64 {
        let ac = complexify(a);
        let mut worst = 0.0f64;
        for j in 0..r.values.len() {
            let v = r.vectors.column(j).into_owned();
            let diff = &ac * &v - v * r.values[j];
            worst = worst.max(diff.norm());
        }
        worst
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 5.0]));
        let r = eig_dense(&m, false).unwrap();
        let mut vals: Vec<f64> = r.values.iter().map(|z| z.re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 5.0).abs() < 1e-12);
        for j in 0..3 {
            let v = r.vectors.column(j);
            let mut big = 0;
            for i in 0..3 {
                if v[i].norm() > v[big].norm() {
                    big = i;
                }
            }
            assert!((v[big].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_spectrum() {
        let th: f64 = 0.3;
        let m = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let r = eig_dense(&m, false).unwrap();
        let expect = Complex64::new(th.cos(), th.sin());
        let found_pos = r
            .values
            .iter()
            .find(|z| z.im > 0.0)
            .expect("complex pair present");
        assert!((found_pos - expect).norm() < 1e-12);
        assert!(residual(&m, &r) < 1e-12);
        // conjugate pairing is exact
        assert_eq!(r.values[0].re, r.values[1].re);
        assert_eq!(r.values[0].im, -r.values[1].im);
    }

    #[test]
    fn skew_symmetric_left_vectors() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let r = eig_dense(&m, true).unwrap();
        let lv = r.left_vectors.as_ref().unwrap();
        let mc = complexify(&m);
        for j in 0..2 {
            let xi = lv.column(j).into_owned();
            let lhs = xi.transpose() * &mc;
            let rhs = xi.transpose() * r.values[j];
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn random_matrices_small_residual_and_trace() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [3usize, 8, 20, 50] {
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let r = eig_dense(&m, true).unwrap();
            let nrm = m.norm();
            assert!(residual(&m, &r) <= 1e-8 * nrm, "n={n}");
            let tr: Complex64 = r.values.iter().sum();
            assert!((tr.re - m.trace()).abs() <= 1e-8 * nrm.max(1.0));
            assert!(tr.im.abs() <= 1e-8 * nrm.max(1.0));
            // left vectors
            let mc = complexify(&m);
            let lv = r.left_vectors.as_ref().unwrap();
            for j in 0..n {
                let xi = lv.column(j).into_owned();
                let diff = xi.transpose() * &mc - xi.transpose() * r.values[j];
                assert!(diff.norm() <= 1e-8 * nrm, "left residual n={n}");
            }
        }
    }

    #[test]
    fn conjugate_closure_of_real_spectrum() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DMatrix::from_fn(12, 12, |_, _| rng.gen_range(-1.0..1.0));
        let r = eig_dense(&m, false).unwrap();
        for z in &r.values {
            if z.im != 0.0 {
                assert!(
                    r.values
                        .iter()
                        .any(|w| (w - z.conj()).norm() <= 1e-10 * m.norm()),
                    "unpaired eigenvalue {z}"
                );
            }
        }
    }

    #[test]
    fn complex_matrix_spectrum() {
        let i = Complex64::new(0.0, 1.0);
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = 2.0 * i;
        m[(0, 1)] = Complex64::new(1.0, 0.5);
        m[(1, 1)] = Complex64::new(-1.0, 0.0);
        let r = eig_dense_complex(&m, true).unwrap();
        assert!(r.values.iter().any(|z| (z - 2.0 * i).norm() < 1e-12));
        assert!(r
            .values
            .iter()
            .any(|z| (z - Complex64::new(-1.0, 0.0)).norm() < 1e-12));
        for j in 0..2 {
            let v = r.vectors.column(j).into_owned();
            let diff = &m * &v - v * r.values[j];
            assert!(diff.norm() < 1e-12);
        }
    }

    #[test]
    fn defective_jordan_block_does_not_blow_up() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0]);
        let r = eig_dense(&m, false).unwrap();
        for z in &r.values {
            assert!((z - Complex64::new(2.0, 0.0)).norm() < 1e-4);
        }
    }

    #[test]
    fn rejects_non_square() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(eig_dense(&m, false).is_err());
    }
}
