//! Gauss-Jacobi rules and matrix inner products against `W(x) = (1-x)^a (1+x)^b H(x)`.
//!
//! Nodes come from the Golub-Welsch eigenproblem (implicit QL with Wilkinson shifts)
//! and are polished by Newton steps on the orthonormal Jacobi polynomial. Weights are
//! Christoffel numbers `1 / sum_j p_j(x_k)^2`, which keep full relative accuracy even
//! for the tiny weights next to the endpoints.

use thiserror::Error;

use crate::matcore::{CMatrix, C64};
use crate::specfun::gamma_real;
use crate::weights::WeightFamily;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("Jacobi exponents must exceed -1 (a = {a}, b = {b})")]
    Domain { a: f64, b: f64 },
    #[error("a quadrature rule needs at least one node")]
    NoNodes,
    #[error("tridiagonal QL iteration did not converge at index {0}")]
    NoConvergence(usize),
    #[error("rule exponents ({ra}, {rb}) differ from the weight exponents ({fa}, {fb})")]
    Mismatch { ra: f64, rb: f64, fa: f64, fb: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` against `(1-x)^a (1+x)^b`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Total mass `2^{a+b+1} B(a+1, b+1)`.
pub fn jacobi_mass(a: f64, b: f64) -> f64 {
    let g = |x: f64| gamma_real(x).expect("gamma argument in range");
    2f64.powf(a + b + 1.0) * g(a + 1.0) * g(b + 1.0) / g(a + b + 2.0)
}

/// Monic Jacobi recurrence: diagonal `a_n` and squared off-diagonal `b_n^2` for n >= 1.
pub fn jacobi_recurrence(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = Vec::with_capacity(m);
    let mut off2 = vec![0.0; m];
    let s = a + b;
    for n in 0..m {
        let nf = n as f64;
        let d = if n == 0 { (b - a) / (s + 2.0) } else { (b * b - a * a) / ((2.0 * nf + s) * (2.0 * nf + s + 2.0)) };
        diag.push(d);
        if n >= 1 {
            off2[n] = if n == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                let t = 2.0 * nf + s;
                4.0 * nf * (nf + a) * (nf + b) * (nf + s) / (t * t * (t + 1.0) * (t - 1.0))
            };
        }
    }
    (diag, off2)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// Returns eigenvalues and the first components of the normalized eigenvectors.
fn tridiagonal_ql(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>), QuadError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[1..n]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(QuadError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let t = z[i + 1];
                z[i + 1] = s * z[i] + c * t;
                z[i] = c * z[i] - s * t;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Orthonormal Jacobi values `p_0..p_{m}` at `x` and the derivative of `p_m`.
fn orthonormal_eval(x: f64, diag: &[f64], off: &[f64], p0: f64, m: usize) -> (f64, f64, f64) {
    // returns (p_m, p_m', sum_{j<m} p_j^2)
    let mut pm1 = 0.0;
    let mut p = p0;
    let mut dpm1 = 0.0;
    let mut dp = 0.0;
    let mut sum = p0 * p0;
    for j in 0..m {
        let bj = if j == 0 { 0.0 } else { off[j] };
        let bj1 = off[j + 1];
        let pn = ((x - diag[j]) * p - bj * pm1) / bj1;
        let dpn = (p + (x - diag[j]) * dp - bj * dpm1) / bj1;
        pm1 = p;
        p = pn;
        dpm1 = dp;
        dp = dpn;
        if j + 1 < m {
            sum += p * p;
        }
    }
    (p, dp, sum)
}

/// Gauss-Jacobi rule with `m` nodes for the weight `(1-x)^a (1+x)^b`.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Result<QuadRule, QuadError> {
    if !(a > -1.0 && b > -1.0) {
        return Err(QuadError::Domain { a, b });
    }
    if m == 0 {
        return Err(QuadError::NoNodes);
    }
    let mu0 = jacobi_mass(a, b);
    let (diag, off2) = jacobi_recurrence(m + 1, a, b);
    let off: Vec<f64> = off2.iter().map(|v| v.sqrt()).collect();
    let (mut nodes, first) = tridiagonal_ql(&diag[..m], &off[..m])?;
    let mut weights: Vec<f64> = first.iter().map(|v| mu0 * v * v).collect();
    let p0 = 1.0 / mu0.sqrt();
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let (p, dp, _) = orthonormal_eval(*x, &diag, &off, p0, m);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() > 1e-3 {
                break;
            }
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1e-3) {
                break;
            }
        }
        let (_, _, sum) = orthonormal_eval(*x, &diag, &off, p0, m);
        if sum.is_finite() && sum > 0.0 {
            *w = 1.0 / sum;
        }
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
    Ok(QuadRule {
        a,
        b,
        nodes: idx.iter().map(|&i| nodes[i]).collect(),
        weights: idx.iter().map(|&i| weights[i]).collect(),
    })
}

/// Default node count `nmax + 2 + ceil(deg H / 2) + 8`.
pub fn default_nodes(nmax: usize, deg_h: usize) -> usize {
    nmax + 2 + deg_h.div_ceil(2) + 8
}

/// Node-count override from `MVOP_QUAD_NODES`, if set to a positive integer.
pub fn nodes_from_env() -> Option<usize> {
    std::env::var("MVOP_QUAD_NODES").ok()?.trim().parse().ok().filter(|&m: &usize| m > 0)
}

/// `sum_k w_k P(x_k) H(x_k) Q(x_k)^*` with the family's own Gauss-Jacobi rule.
pub fn matrix_inner_with(
    p: impl Fn(f64) -> CMatrix,
    q: impl Fn(f64) -> CMatrix,
    fam: &WeightFamily,
    rule: &QuadRule,
) -> Result<CMatrix, QuadError> {
    if rule.a != fam.alpha || rule.b != fam.beta {
        return Err(QuadError::Mismatch { ra: rule.a, rb: rule.b, fa: fam.alpha, fb: fam.beta });
    }
    let mut acc = CMatrix::zeros(fam.r);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let h = fam.h_real(x);
        let term = &(&p(x) * &h) * &q(x).adjoint();
        acc = &acc + &term.scale(C64::new(w, 0.0));
    }
    Ok(acc)
}

pub fn matrix_inner(
    p: impl Fn(f64) -> CMatrix,
    q: impl Fn(f64) -> CMatrix,
    fam: &WeightFamily,
    m: usize,
) -> Result<CMatrix, QuadError> {
    let rule = gauss_jacobi(m, fam.alpha, fam.beta)?;
    matrix_inner_with(p, q, fam, &rule)
}
