//! Matrix weights `W(x) = (1-x)^alpha (1+x)^beta H(x)` on [-1, 1].
//!
//! Every family stores `H` as real polynomial coefficient matrices. The built-in
//! families also keep their factorized form, which is exact at the endpoints
//! where several eigenvalues of `H` vanish.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{c, gram_eig, herm_eig_graded, CMatrix, HermEig, MatError, C64, ONE, ZERO};
use crate::specfun::{binomial, krawtchouk, pochhammer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("parameter {name} = {value} outside its domain ({domain})")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error("H is not Hermitian at x = {x} (relative defect {defect:.3e})")]
    NotHermitian { x: f64, defect: f64 },
    #[error("H is not positive definite at x = {x} (min eigenvalue {min_eig:.3e})")]
    NotPositive { x: f64, min_eig: f64 },
    #[error("H vanishes identically at the endpoint x = {0}")]
    VanishesAtEndpoint(f64),
    #[error("coefficient matrices must be non-empty and square of one common size")]
    BadCoefficients,
    #[error("grid must be ascending in [-1, 1] with spacing at most 0.02 (gap {0:.3e})")]
    BadGrid(f64),
    #[error("eigenvector overlap is ambiguous at x = {0}; refine the grid near the crossing")]
    AmbiguousOverlap(f64),
    #[error("vanishing order of eigenvalue {index} at {endpoint} is ambiguous (slope {slope:.3})")]
    AmbiguousOrder { index: usize, endpoint: f64, slope: f64 },
    #[error("analytic eigen-evaluator unavailable for this family at z = {0}")]
    EigenUnavailable(C64),
    #[error(transparent)]
    Mat(#[from] MatError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    Jacobi { k: f64, ell: usize },
    Gegenbauer { nu: f64, two_ell: usize },
    GegenbauerBlock { nu: f64 },
    Custom,
}

#[derive(Debug, Clone)]
pub struct WeightFamily {
    pub r: usize,
    pub alpha: f64,
    pub beta: f64,
    pub kind: FamilyKind,
    pub label: String,
    pub scalar_factor_note: String,
    /// Constant `s` with `s * H` equal to the reference normalization named in the note.
    pub dropped_scalar: f64,
    coeffs: Vec<CMatrix>,
    jacobi_r: Option<Vec<Vec<f64>>>,
}

/// Endpoint +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Plus,
    Minus,
}

impl Endpoint {
    pub fn x(self) -> f64 {
        match self {
            Endpoint::Plus => 1.0,
            Endpoint::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointSpectralData {
    pub endpoint: Endpoint,
    pub orders: Vec<usize>,
    pub exponents: Vec<f64>,
    /// Mehler-Heine constants `c_j`; empty at -1.
    pub constants: Vec<f64>,
}

type Poly = Vec<f64>;

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[f64], e: usize) -> Poly {
    let mut out = vec![1.0];
    for _ in 0..e {
        out = poly_mul(&out, base);
    }
    out
}

/// Coefficients of `(1-x)^a (1+x)^b`.
fn endpoint_poly(a: usize, b: usize) -> Poly {
    poly_mul(&poly_pow(&[1.0, -1.0], a), &poly_pow(&[1.0, 1.0], b))
}

fn poly_axpy(acc: &mut Poly, s: f64, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, v) in acc.iter_mut().zip(p) {
        *a += s * v;
    }
}

fn to_coeff_matrices(r: usize, entries: &[Vec<Poly>]) -> Vec<CMatrix> {
    let deg = entries.iter().flatten().map(|p| p.len()).max().unwrap_or(1);
    (0..deg).map(|d| CMatrix::from_fn(r, |i, j| c(entries[i][j].get(d).copied().unwrap_or(0.0)))).collect()
}

fn check_domain(name: &'static str, value: f64, ok: bool, domain: &'static str) -> Result<(), WeightError> {
    if ok {
        Ok(())
    } else {
        Err(WeightError::Domain { name, value, domain })
    }
}

/// Diagonal of `T` for the Jacobi family of size `ell + 1`.
pub fn jacobi_t(alpha: f64, k: f64, ell: usize) -> Vec<f64> {
    (0..=ell)
        .map(|j| {
            pochhammer(k, ell - j) / pochhammer(1.0, ell - j) * pochhammer(alpha - k + 1.0, j) / pochhammer(1.0, j)
        })
        .collect()
}

/// Upper triangular `R` with `R_ij = C(j, i) 2^{-(ell-j)/2 - i} sqrt(T_jj)`.
pub fn jacobi_r(alpha: f64, k: f64, ell: usize) -> Vec<Vec<f64>> {
    let t = jacobi_t(alpha, k, ell);
    (0..=ell)
        .map(|i| {
            (0..=ell)
                .map(|j| {
                    if i > j {
                        0.0
                    } else {
                        binomial(j as f64, i) * 2f64.powf(-((ell - j) as f64) / 2.0 - i as f64) * t[j].sqrt()
                    }
                })
                .collect()
        })
        .collect()
}

/// Krawtchouk matrix `K_ij = K_i(j; 1/2, N)`.
pub fn krawtchouk_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..=n).map(|i| (0..=n).map(|j| krawtchouk(i, j, 0.5, n).expect("i <= N")).collect()).collect()
}

/// Diagonal of `T` for the Gegenbauer family with `N = 2 ell`.
pub fn gegenbauer_t(nu: f64, n: usize) -> Vec<f64> {
    let pref = 2f64.powi(-3 * n as i32 - 1) * pochhammer(2.0 * nu + n as f64, n + 1) / pochhammer(nu + 0.5, n);
    (0..=n).map(|j| pref * binomial(n as f64, j) * pochhammer(nu, j) / pochhammer(nu + (n - j) as f64, j)).collect()
}

/// `R = diag((-1)^j C(N, j)) K T^{1/2}` for the Gegenbauer Szego function.
pub fn gegenbauer_r(nu: f64, n: usize) -> CMatrix {
    let k = krawtchouk_matrix(n);
    let t = gegenbauer_t(nu, n);
    CMatrix::from_fn(n + 1, |i, j| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        c(s * binomial(n as f64, i) * k[i][j] * t[j].sqrt())
    })
}

/// Orthogonal `Y` that splits the Gegenbauer weight of size `N + 1` into two blocks.
pub fn gegenbauer_y(n: usize) -> CMatrix {
    let r = n + 1;
    let h = r / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut y = CMatrix::zeros(r);
    for i in 0..h {
        y[(i, i)] = c(s);
        y[(i, r - 1 - i)] = c(s);
        y[(r - 1 - i, i)] = c(-s);
        y[(r - 1 - i, r - 1 - i)] = c(s);
    }
    if r % 2 == 1 {
        y[(h, h)] = ONE;
    }
    y
}

/// Size of the upper block of `Y W Y^T`.
pub fn gegenbauer_upper_block(n: usize) -> usize {
    (n + 2) / 2
}

impl WeightFamily {
    pub fn coefficients(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn deg_h(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `H(z)` by Horner's rule on the coefficient matrices.
    pub fn h_poly(&self, z: C64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.r);
        for m in self.coeffs.iter().rev() {
            acc = &acc.scale(z) + m;
        }
        acc
    }

    /// `H(z)` through the family's factorized form where one exists.
    pub fn h(&self, z: C64) -> CMatrix {
        match &self.kind {
            FamilyKind::Jacobi { ell, .. } => {
                let r = self.jacobi_r.as_ref().expect("jacobi family stores R");
                let ell = *ell;
                let a: Vec<C64> = (0..=ell).map(|i| (1.0 - z).powu(i as u32)).collect();
                let d: Vec<C64> = (0..=ell).map(|j| (1.0 + z).powu((ell - j) as u32)).collect();
                CMatrix::from_fn(ell + 1, |i, j| {
                    let mut s = ZERO;
                    for (m, dm) in d.iter().enumerate() {
                        s += r[i][m] * r[j][m] * dm;
                    }
                    a[i] * a[j] * s
                })
                .scale_re(1.0 / self.dropped_scalar)
            }
            FamilyKind::GegenbauerBlock { nu } => {
                let nu = *nu;
                let off = (2.0 * nu + 1.0) * std::f64::consts::SQRT_2 * z;
                CMatrix::new(2, vec![2.0 * (nu + 1.0) * z * z + 2.0 * nu, off, off, nu * z * z + nu + 1.0])
                    .expect("2x2")
            }
            _ => self.h_poly(z),
        }
    }

    pub fn h_real(&self, x: f64) -> CMatrix {
        self.h(c(x))
    }

    /// `H(x)` from its defining product: `Psi T Psi^T / T_ll` (Jacobi) or `Psi T Psi^*` (Gegenbauer).
    pub fn h_direct(&self, x: f64) -> CMatrix {
        match &self.kind {
            FamilyKind::Jacobi { k, ell } => {
                let ell = *ell;
                let t = jacobi_t(self.alpha, *k, ell);
                let psi = CMatrix::from_fn(ell + 1, |i, j| {
                    if i > j {
                        return ZERO;
                    }
                    c(binomial(j as f64, i)
                        * 2f64.powf(-((ell - j) as f64) / 2.0 - i as f64)
                        * (1.0 - x).powi(i as i32)
                        * (1.0 + x).powf((ell - j) as f64 / 2.0))
                });
                (&(&psi * &CMatrix::diag_real(&t)) * &psi.transpose()).scale_re(1.0 / t[ell])
            }
            FamilyKind::Gegenbauer { nu, two_ell } => {
                let n = *two_ell;
                let ell = n as f64 / 2.0;
                let k = krawtchouk_matrix(n);
                let km = CMatrix::from_fn(n + 1, |i, j| c(k[i][j]));
                let ups: Vec<C64> = (0..=n)
                    .map(|m| {
                        C64::new(0.0, 1.0).powu(m as u32)
                            * binomial(n as f64, m)
                            * (1.0 - x).powf(m as f64 / 2.0)
                            * (1.0 + x).powf(ell - m as f64 / 2.0)
                    })
                    .collect();
                let psi = &(&km * &CMatrix::diag(&ups)) * &km;
                &(&psi * &CMatrix::diag_real(&gegenbauer_t(*nu, n))) * &psi.adjoint()
            }
            _ => self.h_real(x),
        }
    }

    /// A factor `F(x)` with `F F^* = H(x)` in which the endpoint vanishing appears as explicit
    /// powers of `1 -+ x`, so the small eigenvalues of `H` next to the endpoints keep their
    /// relative accuracy. `None` for custom families.
    pub fn h_factor(&self, x: f64) -> Option<CMatrix> {
        match &self.kind {
            FamilyKind::Jacobi { ell, .. } => {
                let r = self.jacobi_r.as_ref()?;
                let ell = *ell;
                let norm = 1.0 / self.dropped_scalar.sqrt();
                Some(CMatrix::from_fn(ell + 1, |i, m| {
                    c((1.0 - x).powi(i as i32) * r[i][m] * (1.0 + x).powf((ell - m) as f64 / 2.0) * norm)
                }))
            }
            FamilyKind::Gegenbauer { nu, two_ell } => {
                let n = *two_ell;
                let ell = n as f64 / 2.0;
                let k = krawtchouk_matrix(n);
                let km = CMatrix::from_fn(n + 1, |i, j| c(k[i][j]));
                let ups: Vec<C64> = (0..=n)
                    .map(|m| {
                        C64::new(0.0, 1.0).powu(m as u32)
                            * binomial(n as f64, m)
                            * (1.0 - x).powf(m as f64 / 2.0)
                            * (1.0 + x).powf(ell - m as f64 / 2.0)
                    })
                    .collect();
                let roots: Vec<f64> = gegenbauer_t(*nu, n).iter().map(|t| t.sqrt()).collect();
                Some(&(&(&km * &CMatrix::diag(&ups)) * &km) * &CMatrix::diag_real(&roots))
            }
            FamilyKind::GegenbauerBlock { nu } => {
                let nu = *nu;
                Some(CMatrix::from_real_rows(&[
                    vec![(2.0 * (nu + 1.0)).sqrt() * x, (2.0 * nu).sqrt()],
                    vec![(nu + 1.0).sqrt(), nu.sqrt() * x],
                ]))
            }
            FamilyKind::Custom => None,
        }
    }

    /// Scalar part `(1-x)^alpha (1+x)^beta`.
    pub fn scalar_weight(&self, x: f64) -> f64 {
        (1.0 - x).powf(self.alpha) * (1.0 + x).powf(self.beta)
    }

    pub fn weight(&self, x: f64) -> CMatrix {
        self.h_real(x).scale_re(self.scalar_weight(x))
    }

    /// True when every coefficient matrix is real, so `W` is real symmetric.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|m| m.max_imag() == 0.0)
    }

    /// Analytic eigenvalues and eigenvectors of `H(z)`, labeled to match the vanishing orders.
    ///
    /// The 2x2 built-ins use closed forms valid for complex `z`. Other families use the
    /// Hermitian solver on the real axis, sorted by decreasing modulus so that the label
    /// follows the vanishing order next to the endpoints, with each column's largest
    /// component made positive.
    pub fn eig_analytic(&self, z: C64) -> Result<(Vec<C64>, CMatrix), WeightError> {
        match &self.kind {
            FamilyKind::Jacobi { k, ell: 1 } => Ok(jacobi1_eig(self.alpha, *k, z)),
            FamilyKind::GegenbauerBlock { nu } => Ok(gegenbauer_block_eig(*nu, z)),
            FamilyKind::Custom if self.r == 2 => Ok(quadratic_eig(&self.h(z))),
            _ => {
                if z.im != 0.0 {
                    return Err(WeightError::EigenUnavailable(z));
                }
                if let Some(eig) = self.eig_graded(z.re) {
                    return Ok(label_by_modulus(eig?, self.r));
                }
                let h = self.h(z).re();
                let eig = h.herm_eig()?;
                let mut idx: Vec<usize> = (0..self.r).collect();
                idx.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()));
                let lam = idx.iter().map(|&i| c(eig.values[i])).collect();
                let mut q = CMatrix::from_fn(self.r, |i, j| c(eig.vectors[(i, idx[j])].re));
                fix_column_signs(&mut q);
                Ok((lam, q))
            }
        }
    }

    /// Eigenpairs of `H(x)`, `-1 < x < 1`, with the small eigenvalues next to the endpoints
    /// resolved to full relative accuracy. Only the Jacobi and full Gegenbauer families
    /// have the structure this needs; `None` otherwise.
    ///
    /// Jacobi near +1: `H = A S A` with `A = diag((1-x)^i)`, graded on both sides. Jacobi
    /// near -1: `H = F F^T` with `F` graded by columns, handled through `F^T F`. Gegenbauer:
    /// `H = K (Ups M Ups^*) K^T` with the inner factor graded on both sides at either end.
    pub fn eig_graded(&self, x: f64) -> Option<Result<HermEig, WeightError>> {
        if !(x > -1.0 && x < 1.0) {
            return None;
        }
        match &self.kind {
            FamilyKind::Jacobi { ell, .. } if *ell >= 2 => {
                if x >= 0.0 {
                    Some(herm_eig_graded(&self.h(c(x))).map_err(Into::into))
                } else {
                    Some(gram_eig(&self.h_factor(x)?).map_err(Into::into))
                }
            }
            FamilyKind::Gegenbauer { nu, two_ell } => {
                let n = *two_ell;
                let ell = n as f64 / 2.0;
                let k = krawtchouk_matrix(n);
                let km = CMatrix::from_fn(n + 1, |i, j| c(k[i][j]));
                let t = gegenbauer_t(*nu, n);
                let m = &(&km * &CMatrix::diag_real(&t)) * &km.transpose();
                let ups: Vec<C64> = (0..=n)
                    .map(|j| {
                        C64::new(0.0, 1.0).powu(j as u32)
                            * binomial(n as f64, j)
                            * (1.0 - x).powf(j as f64 / 2.0)
                            * (1.0 + x).powf(ell - j as f64 / 2.0)
                    })
                    .collect();
                let e = CMatrix::from_fn(n + 1, |a, b| ups[a] * m[(a, b)] * ups[b].conj());
                let run = || -> Result<HermEig, WeightError> {
                    let inner = herm_eig_graded(&e)?;
                    let roots: Vec<f64> = inner.values.iter().map(|v| v.max(0.0).sqrt()).collect();
                    let z = &(&km * &inner.vectors) * &CMatrix::diag_real(&roots);
                    Ok(gram_eig(&z)?)
                };
                Some(run())
            }
            _ => None,
        }
    }

    /// Built-in vanishing orders at the endpoint, when known in closed form.
    pub fn analytic_orders(&self, endpoint: Endpoint) -> Option<Vec<usize>> {
        match &self.kind {
            FamilyKind::Jacobi { ell, .. } => Some(match endpoint {
                Endpoint::Plus => (0..=*ell).map(|j| 2 * j).collect(),
                Endpoint::Minus => (0..=*ell).collect(),
            }),
            FamilyKind::Gegenbauer { two_ell, .. } => Some((0..=*two_ell).collect()),
            FamilyKind::GegenbauerBlock { .. } => Some(vec![0, 2]),
            FamilyKind::Custom => None,
        }
    }

    /// Closed-form Mehler-Heine constants for the 2x2 built-ins.
    pub fn analytic_constants(&self) -> Option<Vec<f64>> {
        match &self.kind {
            FamilyKind::Jacobi { k, ell: 1 } => {
                let p = k / (self.alpha + 1.0 - k);
                let s = 2f64.powf(-self.alpha + self.beta);
                Some(vec![s * (1.0 + p), s / 16.0 * p / (1.0 + p)])
            }
            FamilyKind::GegenbauerBlock { nu } => {
                Some(vec![3.0 * (1.0 + 2.0 * nu), 2.0 * nu * (1.0 + nu) / (3.0 * (1.0 + 2.0 * nu))])
            }
            _ => None,
        }
    }
}

/// Sorts by decreasing modulus and rotates each column so its largest entry is real positive.
fn label_by_modulus(eig: HermEig, r: usize) -> (Vec<C64>, CMatrix) {
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()));
    let lam = idx.iter().map(|&i| c(eig.values[i])).collect();
    let mut q = CMatrix::from_fn(r, |i, j| eig.vectors[(i, idx[j])]);
    for j in 0..r {
        let col = q.column(j);
        let big = col.iter().copied().fold(ZERO, |m, v| if v.norm() > m.norm() { v } else { m });
        if big.norm() > 0.0 {
            let ph = big.conj() / big.norm();
            let rotated: Vec<C64> = col.iter().map(|v| v * ph).collect();
            q.set_column(j, &rotated);
        }
    }
    (lam, q)
}

fn fix_column_signs(q: &mut CMatrix) {
    let r = q.dim();
    for j in 0..r {
        let col = q.column(j);
        let big = col.iter().map(|v| v.re).fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if big < 0.0 {
            let flipped: Vec<C64> = col.iter().map(|v| -v).collect();
            q.set_column(j, &flipped);
        }
    }
}

/// Jacobi family with `ell = 1`: eigenpairs in the labeling `(lambda_1, lambda_2)` with orders (0, 2) at +1.
fn jacobi1_eig(alpha: f64, k: f64, z: C64) -> (Vec<C64>, CMatrix) {
    let p = k / (alpha + 1.0 - k);
    let h11 = (4.0 + 2.0 * p + 2.0 * p * z) * 0.25;
    let h12 = (1.0 - z) * 0.5;
    let h22 = (1.0 - z) * (1.0 - z) * 0.25;
    let tr = h11 + h22;
    let disc = (h11 - h22) * (h11 - h22) + 4.0 * h12 * h12;
    let l1 = (tr + disc.sqrt()) * 0.5;
    let det = p * (1.0 + z) * (1.0 - z) * (1.0 - z) / 8.0;
    let l2 = det / l1;
    let m1 = -h12 / (l2 - h11);
    let n1 = (1.0 + m1 * m1).sqrt();
    let n2v = 2.0 * (l2 - h11);
    let n2 = ((z - 1.0) * (z - 1.0) + n2v * n2v).sqrt();
    let q = CMatrix::new(2, vec![1.0 / n1, (z - 1.0) / n2, m1 / n1, -n2v / n2]).expect("2x2");
    (vec![l1, l2], q)
}

/// Gegenbauer 2x2 block: eigenpairs with orders (0, 2) at both endpoints.
fn gegenbauer_block_eig(nu: f64, z: C64) -> (Vec<C64>, CMatrix) {
    let s2 = std::f64::consts::SQRT_2;
    let h11 = 2.0 * (nu + 1.0) * z * z + 2.0 * nu;
    let h12 = (2.0 * nu + 1.0) * s2 * z;
    let h22 = nu * z * z + nu + 1.0;
    let tr = h11 + h22;
    let disc = (h11 - h22) * (h11 - h22) + 4.0 * h12 * h12;
    let l1 = (tr + disc.sqrt()) * 0.5;
    let det = 2.0 * nu * (nu + 1.0) * (z * z - 1.0) * (z * z - 1.0);
    let l2 = det / l1;
    // (h12, l1 - h11) and (l1 - h22, h12) are both lambda_1 eigenvectors; the first vanishes
    // at z = 0 when nu > 1, the second when nu < 1
    let (mut u, mut v) = (h12, l1 - h11);
    let scale = h11.norm() + h22.norm();
    if (u.norm() + v.norm()) < 1e-12 * scale {
        (u, v) = (l1 - h22, h12);
    }
    let n1 = (u * u + v * v).sqrt();
    let (a, b) = (u / n1, v / n1);
    let q = CMatrix::new(2, vec![a, -b, b, a]).expect("2x2");
    (vec![l1, l2], q)
}

/// Generic 2x2 eigenpairs by the quadratic formula, `lambda_1` the larger root on the real axis.
fn quadratic_eig(h: &CMatrix) -> (Vec<C64>, CMatrix) {
    let (h11, h12, h22) = (h[(0, 0)], h[(0, 1)], h[(1, 1)]);
    let tr = h11 + h22;
    let det = h11 * h22 - h12 * h[(1, 0)];
    let disc = ((h11 - h22) * (h11 - h22) + 4.0 * h12 * h[(1, 0)]).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = if l1.norm() > 0.0 { det / l1 } else { (tr - disc) * 0.5 };
    let col = |l: C64, fallback: (C64, C64)| {
        let (a, b) = (h12, l - h11);
        let n = (a * a + b * b).sqrt();
        if n.norm() < 1e-14 * (h11.norm() + h22.norm() + 1e-300) {
            fallback
        } else {
            (a / n, b / n)
        }
    };
    let (a1, b1) = col(l1, (ONE, ZERO));
    let (a2, b2) = col(l2, (ZERO, ONE));
    (vec![l1, l2], CMatrix::new(2, vec![a1, a2, b1, b2]).expect("2x2"))
}

/// Jacobi-type family of size `ell + 1` with `H = Psi T Psi^T`, normalized by `T_ll`.
pub fn jacobi_family(alpha: f64, beta: f64, k: f64, ell: usize) -> Result<WeightFamily, WeightError> {
    check_domain("alpha", alpha, alpha > -1.0, "alpha > -1")?;
    check_domain("beta", beta, beta > -1.0, "beta > -1")?;
    check_domain("k", k, k > 0.0 && k < alpha + 1.0, "0 < k < alpha + 1")?;
    let r = jacobi_r(alpha, k, ell);
    let t = jacobi_t(alpha, k, ell);
    let t_ll = t[ell];
    let mut entries = vec![vec![Poly::new(); ell + 1]; ell + 1];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let mut acc = vec![0.0];
            for m in 0..=ell {
                let s = r[i][m] * r[j][m] / t_ll;
                if s != 0.0 {
                    poly_axpy(&mut acc, s, &endpoint_poly(i + j, ell - m));
                }
            }
            *e = acc;
        }
    }
    let p = k / (alpha + 1.0 - k);
    Ok(WeightFamily {
        r: ell + 1,
        alpha,
        beta,
        kind: FamilyKind::Jacobi { k, ell },
        label: format!("jacobi(alpha={alpha}, beta={beta}, k={k}, ell={ell})"),
        scalar_factor_note: format!(
            "H = Psi T Psi^T / T_ll with T_ll = {t_ll}; for ell = 1 this is k/p = {}, and the \
             2x2 closed form in (4+2p+2px, 2(1-x); 2(1-x), (1-x)^2)/4 with p = {p} is recovered exactly. \
             Gamma_n of Psi T Psi^T equals T_ll times the stored Gamma_n.",
            k / p
        ),
        dropped_scalar: t_ll,
        coeffs: to_coeff_matrices(ell + 1, &entries),
        jacobi_r: Some(r),
    })
}

/// Gegenbauer-type family of size `2 ell + 1` with `alpha = beta = nu - 1/2`.
pub fn gegenbauer_family(nu: f64, two_ell: usize) -> Result<WeightFamily, WeightError> {
    check_domain("nu", nu, nu > 0.0, "nu > 0")?;
    check_domain("2 ell", two_ell as f64, two_ell >= 1, "2 ell >= 1")?;
    let n = two_ell;
    let k = krawtchouk_matrix(n);
    let t = gegenbauer_t(nu, n);
    let mut g = vec![vec![0.0; n + 1]; n + 1];
    for (m, row) in g.iter_mut().enumerate() {
        for (mp, v) in row.iter_mut().enumerate() {
            *v = (0..=n).map(|a| k[m][a] * t[a] * k[mp][a]).sum();
        }
    }
    let mut entries = vec![vec![Poly::new(); n + 1]; n + 1];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let mut acc = vec![0.0];
            for m in 0..=n {
                for mp in 0..=n {
                    if (m + mp) % 2 == 1 {
                        continue;
                    }
                    let phase = if ((m as i64 - mp as i64) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let s = phase * k[i][m] * k[j][mp] * g[m][mp] * binomial(n as f64, m) * binomial(n as f64, mp);
                    let h = (m + mp) / 2;
                    poly_axpy(&mut acc, s, &endpoint_poly(h, n - h));
                }
            }
            *e = acc;
        }
    }
    Ok(WeightFamily {
        r: n + 1,
        alpha: nu - 0.5,
        beta: nu - 0.5,
        kind: FamilyKind::Gegenbauer { nu, two_ell },
        label: format!("gegenbauer(nu={nu}, ell={})", n as f64 / 2.0),
        scalar_factor_note: "H = Psi T Psi^* with Psi = K Upsilon K; no scalar dropped".to_string(),
        dropped_scalar: 1.0,
        coeffs: to_coeff_matrices(n + 1, &entries),
        jacobi_r: None,
    })
}

/// Irreducible 2x2 block of the `ell = 1` Gegenbauer weight.
pub fn gegenbauer_block2(nu: f64) -> Result<WeightFamily, WeightError> {
    check_domain("nu", nu, nu > 0.0, "nu > 0")?;
    let s2 = std::f64::consts::SQRT_2;
    let entries = vec![
        vec![vec![2.0 * nu, 0.0, 2.0 * (nu + 1.0)], vec![0.0, (2.0 * nu + 1.0) * s2]],
        vec![vec![0.0, (2.0 * nu + 1.0) * s2], vec![nu + 1.0, 0.0, nu]],
    ];
    let ratio = (2.0 + nu) / (2.0 * nu + 1.0);
    Ok(WeightFamily {
        r: 2,
        alpha: nu - 0.5,
        beta: nu - 0.5,
        kind: FamilyKind::GegenbauerBlock { nu },
        label: format!("gegenbauer_block(nu={nu})"),
        scalar_factor_note: format!(
            "upper block of Y W Y^T for the 3x3 Gegenbauer weight equals {ratio} = (2+nu)/(2nu+1) times this H"
        ),
        dropped_scalar: ratio,
        coeffs: to_coeff_matrices(2, &entries),
        jacobi_r: None,
    })
}

/// Chebyshev points of the second kind on [-1, 1], ascending, endpoints included.
pub fn chebyshev_grid(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.0];
    }
    (0..m).map(|i| -(std::f64::consts::PI * i as f64 / (m - 1) as f64).cos()).collect()
}

/// Checks Hermitian symmetry, interior positivity and endpoint non-vanishing on a grid.
pub fn validate_family(fam: &WeightFamily) -> Result<(), WeightError> {
    for &x in &chebyshev_grid(101) {
        let h = fam.h_real(x);
        let defect = h.hermitian_defect();
        if defect > 1e-12 {
            return Err(WeightError::NotHermitian { x, defect });
        }
    }
    for &x in chebyshev_grid(201).iter().filter(|x| x.abs() < 0.99) {
        let min_eig = fam.h_real(x).herm_eig()?.values[0];
        if min_eig <= 0.0 {
            return Err(WeightError::NotPositive { x, min_eig });
        }
    }
    for x in [-1.0, 1.0] {
        if fam.h_real(x).fro_norm() <= 1e-12 {
            return Err(WeightError::VanishesAtEndpoint(x));
        }
    }
    Ok(())
}

/// Family from real coefficient matrices: `H(x) = sum_d coeffs[d] x^d`.
pub fn custom_family(alpha: f64, beta: f64, coeffs: &[Vec<Vec<f64>>]) -> Result<WeightFamily, WeightError> {
    check_domain("alpha", alpha, alpha > -1.0, "alpha > -1")?;
    check_domain("beta", beta, beta > -1.0, "beta > -1")?;
    let r = coeffs.first().map(|m| m.len()).unwrap_or(0);
    if r == 0 || coeffs.iter().any(|m| m.len() != r || m.iter().any(|row| row.len() != r)) {
        return Err(WeightError::BadCoefficients);
    }
    let fam = WeightFamily {
        r,
        alpha,
        beta,
        kind: FamilyKind::Custom,
        label: format!("custom(alpha={alpha}, beta={beta}, r={r}, deg={})", coeffs.len() - 1),
        scalar_factor_note: String::new(),
        dropped_scalar: 1.0,
        coeffs: coeffs.iter().map(|m| CMatrix::from_real_rows(m)).collect(),
        jacobi_r: None,
    };
    validate_family(&fam)?;
    Ok(fam)
}

/// One point of an eigenvalue path.
#[derive(Debug, Clone)]
pub struct EigPoint {
    pub x: f64,
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Eigendecomposition along a grid with labels and phases carried by maximal overlap.
pub fn eig_path(fam: &WeightFamily, grid: &[f64]) -> Result<Vec<EigPoint>, WeightError> {
    for w in grid.windows(2) {
        let gap = w[1] - w[0];
        if !(gap > 0.0 && gap <= 0.02 + 1e-12) {
            return Err(WeightError::BadGrid(gap));
        }
    }
    if grid.iter().any(|x| x.abs() > 1.0) {
        return Err(WeightError::BadGrid(f64::NAN));
    }
    let r = fam.r;
    let mut out: Vec<EigPoint> = Vec::with_capacity(grid.len());
    for &x in grid {
        let eig = fam.h_real(x).herm_eig()?;
        let mut q = eig.vectors.clone();
        let mut lam = eig.values.clone();
        match out.last() {
            None => {
                for j in 0..r {
                    let col = q.column(j);
                    let big = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ONE);
                    let ph = if big.norm() > 0.0 { big.conj() / big.norm() } else { ONE };
                    let fixed: Vec<C64> = col.iter().map(|v| v * ph).collect();
                    q.set_column(j, &fixed);
                }
            }
            Some(prev) => {
                let mut used = vec![false; r];
                let mut newq = CMatrix::zeros(r);
                let mut newl = vec![0.0; r];
                for j in 0..r {
                    let pj = prev.vectors.column(j);
                    let mut ov: Vec<(usize, C64)> = (0..r)
                        .filter(|&m| !used[m])
                        .map(|m| {
                            let qm = q.column(m);
                            (m, pj.iter().zip(&qm).map(|(a, b)| a.conj() * b).sum::<C64>())
                        })
                        .collect();
                    ov.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
                    if ov.len() > 1 && (ov[0].1.norm() - ov[1].1.norm()).abs() < 1e-3 {
                        return Err(WeightError::AmbiguousOverlap(x));
                    }
                    let (m, o) = ov[0];
                    used[m] = true;
                    let ph = if o.norm() > 0.0 { o.conj() / o.norm() } else { ONE };
                    let col: Vec<C64> = q.column(m).iter().map(|v| v * ph).collect();
                    newq.set_column(j, &col);
                    newl[j] = lam[m];
                }
                q = newq;
                lam = newl;
            }
        }
        out.push(EigPoint { x, values: lam, vectors: q });
    }
    Ok(out)
}

/// Neville extrapolation to `h = 0` of samples `(h_i, v_i)`.
pub fn neville_zero(h: &[f64], v: &[f64]) -> f64 {
    let n = h.len();
    let mut t = v.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            t[i] = (h[i] * t[i - 1] - h[i - j] * t[i]) / (h[i] - h[i - j]);
        }
    }
    t[n - 1]
}

/// Vanishing orders, exponents and Mehler-Heine constants at an endpoint.
pub fn endpoint_data(fam: &WeightFamily, endpoint: Endpoint) -> Result<EndpointSpectralData, WeightError> {
    let hs = [1e-2, 1e-3, 1e-4];
    let e = endpoint.x();
    let samples: Vec<Vec<f64>> = hs
        .iter()
        .map(|&h| -> Result<Vec<f64>, WeightError> {
            let x = e - e * h;
            match fam.analytic_orders(endpoint) {
                Some(_) => Ok(fam.eig_analytic(c(x))?.0.iter().map(|l| l.re).collect()),
                None => {
                    let mut v = fam.h_real(x).herm_eig()?.values;
                    v.reverse();
                    Ok(v)
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let r = fam.r;
    let orders = match fam.analytic_orders(endpoint) {
        Some(o) => o,
        None => {
            let mut o = Vec::with_capacity(r);
            for j in 0..r {
                let s1 = (samples[0][j].abs() / samples[1][j].abs()).log10();
                let s2 = (samples[1][j].abs() / samples[2][j].abs()).log10();
                let slope = 0.5 * (s1 + s2);
                let n = slope.round().max(0.0);
                if (slope - n).abs() > 0.2 || !slope.is_finite() {
                    return Err(WeightError::AmbiguousOrder { index: j, endpoint: e, slope });
                }
                o.push(n as usize);
            }
            o
        }
    };
    let base = match endpoint {
        Endpoint::Plus => fam.alpha,
        Endpoint::Minus => fam.beta,
    };
    let exponents: Vec<f64> = orders.iter().map(|&n| base + n as f64).collect();
    let constants = match endpoint {
        Endpoint::Minus => Vec::new(),
        Endpoint::Plus => match fam.analytic_constants() {
            Some(cs) => cs,
            None => (0..r)
                .map(|j| {
                    let v: Vec<f64> = (0..3).map(|i| samples[i][j].abs() / hs[i].powi(orders[j] as i32)).collect();
                    2f64.powf(-exponents[j] + fam.beta) * neville_zero(&hs, &v)
                })
                .collect(),
        },
    };
    Ok(EndpointSpectralData { endpoint, orders, exponents, constants })
}
