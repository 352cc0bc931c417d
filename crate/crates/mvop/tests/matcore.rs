use approx::assert_relative_eq;
use mvop::matcore::{c, gram_eig, herm_eig, herm_eig_graded, inv, sqrt_psd, CMatrix, MatError, C64};
use proptest::prelude::*;

fn close(a: &CMatrix, b: &CMatrix, tol: f64) {
    let d = (a - b).fro_norm();
    assert!(d <= tol, "difference {d:e} exceeds {tol:e}\n{a:?}\n{b:?}");
}

#[test]
fn eig_of_identity() {
    let e = herm_eig(&CMatrix::identity(2)).unwrap();
    assert_eq!(e.values, vec![1.0, 1.0]);
    close(&e.vectors, &CMatrix::identity(2), 0.0);
}

#[test]
fn eig_of_diagonal_sorts_ascending() {
    let e = herm_eig(&CMatrix::diag_real(&[3.0, 2.0])).unwrap();
    assert_eq!(e.values, vec![2.0, 3.0]);
    let swapped = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    close(&e.vectors, &swapped, 0.0);
}

#[test]
fn eig_of_jacobi_weight_at_origin() {
    let a = CMatrix::from_real_rows(&[vec![6.0, 2.0], vec![2.0, 1.0]]).scale_re(0.25);
    let e = herm_eig(&a).unwrap();
    // roots of lambda^2 - (7/4) lambda + 1/8
    let s = 41f64.sqrt();
    assert_relative_eq!(e.values[0], (7.0 - s) / 8.0, max_relative = 1e-14);
    assert_relative_eq!(e.values[1], (7.0 + s) / 8.0, max_relative = 1e-14);
    // brute-force 2x2 formula
    let (p, q, r) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)].re);
    let disc = ((p - q) * (p - q) + 4.0 * r * r).sqrt();
    assert_relative_eq!(e.values[0], (p + q - disc) / 2.0, max_relative = 1e-14);
    close(&e.reconstruct(), &a, 1e-15);
}

#[test]
fn eig_rejects_non_hermitian() {
    let a = CMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
    assert!(matches!(herm_eig(&a), Err(MatError::NotHermitian(_))));
}

#[test]
fn construction_checks_shape() {
    assert_eq!(CMatrix::new(0, vec![]), Err(MatError::Empty));
    assert_eq!(CMatrix::new(2, vec![c(1.0); 3]), Err(MatError::Dimension { expected: 4, got: 3 }));
    assert_eq!(CMatrix::new(2, vec![c(1.0); 4]).unwrap().as_slice().len(), 4);
}

#[test]
fn graded_eig_resolves_tiny_eigenvalues() {
    // S B S with S = diag(1, 1e-6, 1e-12): eigenvalues spread over 24 orders of magnitude
    let b = CMatrix::from_real_rows(&[vec![2.0, 0.5, 0.1], vec![0.5, 1.5, 0.3], vec![0.1, 0.3, 1.0]]);
    let s = CMatrix::diag_real(&[1.0, 1e-6, 1e-12]);
    let a = &(&s * &b) * &s;
    let e = herm_eig_graded(&a).unwrap();
    let det_b = b.det().re;
    let prod: f64 = e.values.iter().product();
    assert_relative_eq!(prod, det_b * 1e-36, max_relative = 1e-12);
    let z = &b.sqrt_psd().unwrap() * &s;
    let g = gram_eig(&z.adjoint()).unwrap();
    let gp: f64 = g.values.iter().product();
    assert_relative_eq!(gp, det_b * 1e-36, max_relative = 1e-12);
}

#[test]
fn sqrt_examples() {
    close(&sqrt_psd(&CMatrix::identity(3)).unwrap(), &CMatrix::identity(3), 1e-15);
    close(&sqrt_psd(&CMatrix::diag_real(&[4.0, 9.0])).unwrap(), &CMatrix::diag_real(&[2.0, 3.0]), 1e-15);
    assert!(matches!(sqrt_psd(&CMatrix::diag_real(&[1.0, -1.0])), Err(MatError::NotPsd(_))));
}

#[test]
fn sqrt_clips_roundoff_negatives() {
    let a = CMatrix::diag_real(&[1.0, -1e-14]);
    let s = sqrt_psd(&a).unwrap();
    assert_eq!(s[(1, 1)], c(0.0));
}

#[test]
fn inverse_examples() {
    close(&inv(&CMatrix::identity(2)).unwrap(), &CMatrix::identity(2), 0.0);
    close(&inv(&CMatrix::diag_real(&[2.0, 4.0])).unwrap(), &CMatrix::diag_real(&[0.5, 0.25]), 1e-16);
    let (a, b, cc, d) = (C64::new(1.0, 2.0), C64::new(-0.5, 0.3), C64::new(0.7, -1.1), C64::new(2.0, 0.4));
    let m = CMatrix::new(2, vec![a, b, cc, d]).unwrap();
    let det = a * d - b * cc;
    let want = CMatrix::new(2, vec![d / det, -b / det, -cc / det, a / det]).unwrap();
    close(&inv(&m).unwrap(), &want, 1e-15);
    assert!(matches!(inv(&CMatrix::zeros(2)), Err(MatError::Singular(_))));
}

#[test]
fn determinant_of_triangular() {
    let m = CMatrix::new(2, vec![c(2.0), C64::new(5.0, 1.0), c(0.0), C64::new(0.0, 3.0)]).unwrap();
    assert_eq!(m.det(), C64::new(0.0, 6.0));
}

fn hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(move |v| {
        let a = CMatrix::from_fn(dim, |i, j| C64::new(v[i * dim + j].0, v[i * dim + j].1));
        &a + &a.adjoint()
    })
}

fn any_hermitian() -> impl Strategy<Value = CMatrix> {
    (1usize..=6).prop_flat_map(hermitian)
}

proptest! {
    #[test]
    fn reconstruction_holds(a in any_hermitian()) {
        let e = herm_eig(&a).unwrap();
        let r = a.dim() as f64;
        prop_assert!((&a - &e.reconstruct()).fro_norm() <= 1e-11 * a.fro_norm().max(1e-300));
        let q = &e.vectors;
        prop_assert!((&(&q.adjoint() * q) - &CMatrix::identity(a.dim())).fro_norm() <= 1e-12 * r);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sqrt_squares_back(a in any_hermitian()) {
        let p = &a * &a;
        let s = sqrt_psd(&p).unwrap();
        prop_assert!((&(&s * &s) - &p).fro_norm() <= 1e-10 * p.fro_norm().max(1e-300));
        prop_assert!(s.hermitian_defect() <= 1e-14);
    }

    #[test]
    fn inverse_is_an_involution(a in any_hermitian()) {
        // spectrum in [1.5, 2.5] keeps the condition number small
        let scale = 0.5 / a.fro_norm().max(1.0);
        let m = &a.scale_re(scale) + &CMatrix::identity(a.dim()).scale_re(2.0);
        let back = inv(&inv(&m).unwrap()).unwrap();
        prop_assert!((&back - &m).fro_norm() <= 1e-9 * m.fro_norm());
    }
}
