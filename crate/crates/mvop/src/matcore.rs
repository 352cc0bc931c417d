//! Small dense complex matrices.
//!
//! Everything here is sized for r <= 8: O(r^3) algorithms with no blocking,
//! row-major storage and value semantics.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

const MAX_SWEEPS: usize = 100;
const EIG_TOL: f64 = 1e-14;
const GRADED_TOL: f64 = 1e-15;
const PSD_CLIP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("matrix is singular to working precision (pivot {0:.3e})")]
    Singular(f64),
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self, MatError> {
        if dim == 0 {
            return Err(MatError::Empty);
        }
        if data.len() != dim * dim {
            return Err(MatError::Dimension { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        for row in rows {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
        }
        Self::from_fn(dim, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        for (i, v) in col.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn re(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| C64::new(z.re, 0.0)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `A - A*` divided by the Frobenius norm of `A`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.fro_norm();
        if n == 0.0 {
            return 0.0;
        }
        (self - &self.adjoint()).fro_norm() / n
    }

    pub fn symmetrize(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> C64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ONE;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm())).unwrap_or(k);
            if a[p * n + k] == ZERO {
                return ZERO;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det *= piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        det
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix, MatError> {
        let n = self.dim;
        if rhs.dim != n {
            return Err(MatError::Dimension { expected: n, got: rhs.dim });
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm())).unwrap_or(k);
            let pivot = a[p * n + k].norm();
            if pivot <= 1e-300 || pivot <= scale * 1e-300 {
                return Err(MatError::Singular(pivot));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                    b.swap(k * n + j, p * n + j);
                }
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f == ZERO {
                    continue;
                }
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
                for j in 0..n {
                    let t = b[k * n + j];
                    b[i * n + j] -= f * t;
                }
            }
        }
        for k in (0..n).rev() {
            let piv = a[k * n + k];
            for j in 0..n {
                let mut s = b[k * n + j];
                for m in k + 1..n {
                    s -= a[k * n + m] * b[m * n + j];
                }
                b[k * n + j] = s / piv;
            }
        }
        Ok(CMatrix { dim: n, data: b })
    }

    pub fn inv(&self) -> Result<CMatrix, MatError> {
        self.solve(&CMatrix::identity(self.dim))
    }

    pub fn herm_eig(&self) -> Result<HermEig, MatError> {
        herm_eig(self)
    }

    pub fn sqrt_psd(&self) -> Result<CMatrix, MatError> {
        sqrt_psd(self)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in mul");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: CMatrix) -> CMatrix {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: &CMatrix) -> CMatrix {
                (&self).$m(rhs)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: CMatrix) -> CMatrix {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues, unitary eigenvectors by column.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn reconstruct(&self) -> CMatrix {
        let q = &self.vectors;
        q * &CMatrix::diag_real(&self.values) * q.adjoint()
    }
}

/// Cyclic Jacobi rotations for a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry with a diagonal
/// unitary and then applies a real Givens rotation, so the accumulated
/// transformation stays unitary to rounding.
pub fn herm_eig(a: &CMatrix) -> Result<HermEig, MatError> {
    jacobi_eig(a, false)
}

/// Jacobi rotations with the relative stopping rule `|a_pq| <= eps sqrt(|a_pp a_qq|)`.
///
/// For a positive definite `A = S B S` with `S` diagonal and `B` well conditioned, the
/// eigenvalues come out with small relative error however widely `S` is graded, provided
/// the entries of `A` themselves carry small relative errors.
pub fn herm_eig_graded(a: &CMatrix) -> Result<HermEig, MatError> {
    jacobi_eig(a, true)
}

/// Eigenpairs of `Z Z^*` from the graded Gram matrix `Z^* Z`.
///
/// Suited to a column-graded `Z = B S`: the Gram entries inherit the grading exactly,
/// and the eigenvectors of `Z Z^*` are `Z w / sqrt(mu)`.
pub fn gram_eig(z: &CMatrix) -> Result<HermEig, MatError> {
    let g = &z.adjoint() * z;
    let e = herm_eig_graded(&g)?;
    let n = z.dim();
    let w = z * &e.vectors;
    let mut vectors = CMatrix::zeros(n);
    for j in 0..n {
        let col = w.column(j);
        let nrm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            let scaled: Vec<C64> = col.iter().map(|v| v / nrm).collect();
            vectors.set_column(j, &scaled);
        }
    }
    Ok(HermEig { values: e.values, vectors })
}

fn jacobi_eig(a: &CMatrix, graded: bool) -> Result<HermEig, MatError> {
    let n = a.dim();
    let norm = a.fro_norm();
    if norm > 0.0 && a.hermitian_defect() > 1e-10 {
        return Err(MatError::NotHermitian(a.hermitian_defect()));
    }
    let mut m = a.symmetrize();
    let mut v = CMatrix::identity(n);
    let tol = EIG_TOL * norm;
    let small = |m: &CMatrix, p: usize, q: usize| -> bool {
        m[(p, q)].norm() <= GRADED_TOL * (m[(p, p)].re * m[(q, q)].re).abs().sqrt()
    };
    let off = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let converged = |m: &CMatrix| -> bool {
        if graded {
            (0..n).all(|p| (p + 1..n).all(|q| small(m, p, q)))
        } else {
            off(m) <= tol
        }
    };
    let mut sweeps = 0;
    while !converged(&m) {
        if sweeps == MAX_SWEEPS {
            return Err(MatError::NoConvergence { sweeps, off: off(&m) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE || (graded && small(&m, p, q)) {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = phase.conj();
                // columns p, q of the unitary U = diag(1, e) * G
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -e * s;
                let uqq = e * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * upp + mkq * uqp;
                    m[(k, q)] = mkp * upq + mkq * uqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = upp.conj() * mpk + uqp.conj() * mqk;
                    m[(q, k)] = upq.conj() * mpk + uqq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                if graded {
                    // exact diagonal update keeps tiny eigenvalues free of cancellation
                    m[(p, p)] = C64::new(app - t * mag, 0.0);
                    m[(q, q)] = C64::new(aqq + t * mag, 0.0);
                } else {
                    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Positive semidefinite square root; eigenvalues down to `-1e-12 * |A|` are clipped to zero.
pub fn sqrt_psd(a: &CMatrix) -> Result<CMatrix, MatError> {
    let eig = herm_eig(a)?;
    let scale = a.fro_norm();
    let mut roots = Vec::with_capacity(eig.values.len());
    for &l in &eig.values {
        if l < -PSD_CLIP * scale {
            return Err(MatError::NotPsd(l));
        }
        roots.push(l.max(0.0).sqrt());
    }
    let q = &eig.vectors;
    Ok((q * &CMatrix::diag_real(&roots) * q.adjoint()).symmetrize())
}

pub fn inv(a: &CMatrix) -> Result<CMatrix, MatError> {
    a.inv()
}

/// Real number as a complex scalar.
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
