use koopman::numerics::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn large_random_eig_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for n in [100usize, 200] {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0f64));
        let t0 = std::time::Instant::now();
        let r = eig_dense(&m, true).unwrap();
        let dt = t0.elapsed();
        let mc = complexify(&m);
        let mut worst = 0.0f64;
        let mut worst_left = 0.0f64;
        let lv = r.left_vectors.as_ref().unwrap();
        for j in 0..n {
            let v = r.vectors.column(j).into_owned();
            worst = worst.max((&mc * &v - &v * r.values[j]).norm());
            let xi = lv.column(j).into_owned();
            worst_left =
                worst_left.max((xi.transpose() * &mc - xi.transpose() * r.values[j]).norm());
        }
        let tr: Complex64 = r.values.iter().sum();
        println!(
            "n={n}: {dt:?} right {worst:.2e} left {worst_left:.2e} trace {:.2e}",
            (tr.re - m.trace()).abs()
        );
        let nrm = m.norm();
        assert!(worst <= 1e-8 * nrm);
        assert!(worst_left <= 1e-8 * nrm);
        assert!((tr.re - m.trace()).abs() <= 1e-8 * nrm);
    }
}

#[test]
fn companion_matrix_eig() {
    let n = 60;
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..n {
        comp[(i, n - 1)] = rng.gen_range(-1.0..1.0f64);
    }
    let r = eig_dense(&comp, false).unwrap();
    let cc = complexify(&comp);
    let mut worst = 0.0f64;
    for j in 0..n {
        let v = r.vectors.column(j).into_owned();
        worst = worst.max((&cc * &v - &v * r.values[j]).norm());
    }
    println!("companion n={n}: res {worst:.2e}");
    assert!(worst <= 1e-8 * comp.norm());
}

#[test]
fn exp_available() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let e = (a * 0.3f64).exp();
    assert!((e[(0, 0)] - 0.3f64.cos()).abs() < 1e-12);
    assert!((e[(0, 1)] - 0.3f64.sin()).abs() < 1e-12);
}
