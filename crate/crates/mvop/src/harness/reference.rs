//! Closed-form recurrence coefficients used as references by the recurrence checks.

use std::f64::consts::SQRT_2;

use crate::matcore::CMatrix;

/// Monic `C_n` of the 2x2 Jacobi family `(alpha, beta, k)` in lower-upper-lower factored form.
pub fn jacobi_c(alpha: f64, beta: f64, k: f64, n: usize) -> CMatrix {
    let (a, b, n) = (alpha, beta, n as f64);
    let s = a + b;
    let pref = 4.0 * n * (a + n + 1.0) / ((k + n) * (s + 2.0 * n + 1.0) * (s + 2.0 * n + 2.0));
    let l = (a - k + 1.0) / (a + n + b - k + 2.0);
    let r = (a - k + 1.0) / (a + n + 1.0 + b - k);
    let m11 = (s + n + 1.0) * (s + n - k + 2.0) * (b + n) * (k + n - 1.0)
        / ((s + 2.0 * n + 1.0) * (s + 2.0 * n) * (s + n + 1.0 - k));
    let m22 = (s + n + 2.0) * (s + n + 1.0 - k) * (b + n + 1.0) * (k + n + 1.0)
        / ((s + n - k + 2.0) * (s + 2.0 * n + 2.0) * (s + 2.0 * n + 3.0));
    let lower = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![l, 1.0]]);
    let mid = CMatrix::from_real_rows(&[vec![m11, -k / (k + n)], vec![0.0, m22]]);
    let upper = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![-r, 1.0]]);
    (&(&lower * &mid) * &upper).scale_re(pref)
}

/// `B_n` of the 3x3 Gegenbauer family.
pub fn gegenbauer3_b(nu: f64, n: usize) -> CMatrix {
    let n = n as f64;
    let a = (nu + 1.0) / ((n + nu + 1.0) * (n + nu + 2.0));
    let b = nu / (2.0 * (n + nu) * (n + nu + 1.0));
    CMatrix::from_real_rows(&[vec![0.0, a, 0.0], vec![b, 0.0, b], vec![0.0, a, 0.0]])
}

/// `C_n` of the 3x3 Gegenbauer family.
pub fn gegenbauer3_c(nu: f64, n: usize) -> CMatrix {
    let n = n as f64;
    let pref = n * (n + 2.0 * nu + 1.0) / (4.0 * (n + nu) * (n + nu + 1.0));
    let mid = (n + nu - 1.0) * (n + nu + 2.0) / ((n + nu) * (n + nu + 1.0));
    CMatrix::diag_real(&[pref, pref * mid, pref])
}

/// `B_n` of the 2x2 Gegenbauer block, the nonzero part of `Y B_n Y^T`.
pub fn gegenbauer_block_b(nu: f64, n: usize) -> CMatrix {
    let n = n as f64;
    CMatrix::from_real_rows(&[
        vec![0.0, SQRT_2 * (nu + 1.0) / ((n + nu + 1.0) * (n + nu + 2.0))],
        vec![nu / (SQRT_2 * (n + nu) * (n + nu + 1.0)), 0.0],
    ])
}
