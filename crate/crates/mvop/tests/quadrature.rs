use std::f64::consts::PI;

use approx::assert_relative_eq;
use mvop::exact::stieltjes;
use mvop::matcore::CMatrix;
use mvop::quadrature::{default_nodes, gauss_jacobi, jacobi_mass, matrix_inner, QuadError};
use mvop::specfun::gamma_real;
use mvop::weights::{custom_family, gegenbauer_family, jacobi_family};
use proptest::prelude::*;

#[test]
fn one_point_legendre() {
    let r = gauss_jacobi(1, 0.0, 0.0).unwrap();
    assert_eq!(r.nodes.len(), 1);
    assert!(r.nodes[0].abs() < 1e-15);
    assert_relative_eq!(r.weights[0], 2.0, max_relative = 1e-15);
}

#[test]
fn two_point_legendre() {
    let r = gauss_jacobi(2, 0.0, 0.0).unwrap();
    let x = 1.0 / 3f64.sqrt();
    assert_relative_eq!(r.nodes[0], -x, max_relative = 1e-15);
    assert_relative_eq!(r.nodes[1], x, max_relative = 1e-15);
    assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-15);
    assert_relative_eq!(r.weights[1], 1.0, max_relative = 1e-15);
}

#[test]
fn one_point_chebyshev() {
    let r = gauss_jacobi(1, -0.5, -0.5).unwrap();
    assert!(r.nodes[0].abs() < 1e-15);
    assert_relative_eq!(r.weights[0], PI, max_relative = 1e-15);
}

#[test]
fn rejects_bad_parameters() {
    assert!(matches!(gauss_jacobi(3, -1.0, 0.0), Err(QuadError::Domain { .. })));
    assert!(matches!(gauss_jacobi(3, 0.0, -1.5), Err(QuadError::Domain { .. })));
    assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
}

#[test]
fn mass_matches_beta_function() {
    for (a, b) in [(0.0, 0.0), (1.0, 2.0), (-0.5, 0.5), (3.5, 0.25)] {
        let beta = gamma_real(a + 1.0).unwrap() * gamma_real(b + 1.0).unwrap() / gamma_real(a + b + 2.0).unwrap();
        assert_relative_eq!(jacobi_mass(a, b), 2f64.powf(a + b + 1.0) * beta, max_relative = 1e-13);
    }
}

#[test]
fn large_rules_keep_tiny_endpoint_weights() {
    let r = gauss_jacobi(320, 1.0, 2.0).unwrap();
    assert_relative_eq!(r.weights.iter().sum::<f64>(), jacobi_mass(1.0, 2.0), max_relative = 1e-12);
    assert!(r.weights.iter().all(|&w| w > 0.0));
}

#[test]
fn scalar_inner_product_of_ones() {
    let fam = custom_family(0.0, 0.0, &[vec![vec![1.0]]]).unwrap();
    let one = |_: f64| CMatrix::identity(1);
    let g = matrix_inner(one, one, &fam, 4).unwrap();
    assert_relative_eq!(g[(0, 0)].re, 2.0, max_relative = 1e-15);
}

#[test]
fn first_two_monic_polynomials_are_orthogonal() {
    for fam in [jacobi_family(1.0, 2.0, 1.0, 1).unwrap(), gegenbauer_family(0.5, 2).unwrap()] {
        let tab = stieltjes(&fam, 2, 20).unwrap();
        let p0 = |_: f64| CMatrix::identity(fam.r);
        let p1 = |x: f64| &CMatrix::identity(fam.r).scale_re(x) - &tab.b[0];
        let m = matrix_inner(p0, p1, &fam, 20).unwrap();
        assert!(m.fro_norm() <= 1e-12 * tab.gamma[0].fro_norm(), "{}", m.fro_norm());
    }
}

#[test]
fn gamma0_converged_under_node_doubling() {
    let fam = jacobi_family(1.0, 2.0, 1.0, 1).unwrap();
    let one = |_: f64| CMatrix::identity(2);
    let m = default_nodes(10, fam.deg_h());
    let a = matrix_inner(one, one, &fam, m).unwrap();
    let b = matrix_inner(one, one, &fam, 2 * m).unwrap();
    assert!((&a - &b).fro_norm() <= 1e-13 * b.fro_norm());
}

#[test]
fn rule_and_family_exponents_must_agree() {
    let fam = jacobi_family(1.0, 2.0, 1.0, 1).unwrap();
    let rule = gauss_jacobi(5, 0.0, 0.0).unwrap();
    let one = |_: f64| CMatrix::identity(2);
    assert!(matches!(mvop::quadrature::matrix_inner_with(one, one, &fam, &rule), Err(QuadError::Mismatch { .. })));
}

/// Moments of (1-x)^a (1+x)^b from the recurrence (d + a + b + 2) mu_{d+1} = d mu_{d-1} + (b - a) mu_d.
fn moments(a: f64, b: f64, count: usize) -> Vec<f64> {
    let mut mu = vec![jacobi_mass(a, b), (b - a) * jacobi_mass(a, b) / (a + b + 2.0)];
    for d in 1..count - 1 {
        let df = d as f64;
        mu.push((df * mu[d - 1] + (b - a) * mu[d]) / (df + a + b + 2.0));
    }
    mu.truncate(count);
    mu
}

proptest! {
    #[test]
    fn exact_for_monomials(m in 1usize..24, a in -0.9f64..4.0, b in -0.9f64..4.0) {
        let rule = gauss_jacobi(m, a, b).unwrap();
        let mu = moments(a, b, 2 * m);
        for (d, &want) in mu.iter().enumerate() {
            let got = rule.integrate(|x| x.powi(d as i32));
            let scale = if want.abs() > 1e-14 * mu[0] { want.abs() } else { mu[0] };
            prop_assert!((got - want).abs() <= 1e-12 * scale, "d = {}: {} vs {}", d, got, want);
        }
    }

    #[test]
    fn nodes_ascend_inside_and_weights_sum_to_mass(m in 1usize..200, a in -0.9f64..4.0, b in -0.9f64..4.0) {
        let rule = gauss_jacobi(m, a, b).unwrap();
        prop_assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(rule.nodes.iter().all(|x| x.abs() < 1.0));
        let s: f64 = rule.weights.iter().sum();
        prop_assert!((s - jacobi_mass(a, b)).abs() <= 1e-12 * jacobi_mass(a, b));
    }

    #[test]
    fn doubling_and_psd(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, c3 in -2.0f64..2.0) {
        let fam = jacobi_family(1.0, 2.0, 1.0, 1).unwrap();
        let a1 = CMatrix::from_real_rows(&[vec![c1, c2], vec![c3, 1.0]]);
        let p = |x: f64| &CMatrix::identity(2) + &a1.scale_re(x * x);
        let g1 = matrix_inner(p, p, &fam, 6).unwrap();
        let g2 = matrix_inner(p, p, &fam, 12).unwrap();
        prop_assert!((&g1 - &g2).fro_norm() <= 1e-12 * g2.fro_norm());
        prop_assert!(g2.hermitian_defect() <= 1e-14);
        prop_assert!(g2.herm_eig().unwrap().values[0] >= -1e-12 * g2.fro_norm());
    }
}
