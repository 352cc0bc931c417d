//! Exact monic MVOPs through the matrix Stieltjes procedure.
//!
//! With `<P, Q> = int P W Q^*` and `x P_n = P_{n+1} + B_n P_n + C_n P_{n-1}`,
//! right orthogonality gives
//!
//! ```text
//! B_n = <x P_n, P_n> Gamma_n^{-1},   C_n = <x P_n, P_{n-1}> Gamma_{n-1}^{-1}.
//! ```
//!
//! The loop works with `Phat_n = 2^n P_n` stored by its values at the quadrature nodes.
//! In these variables `Phat_{n+1} = 2 (x - B_n) Phat_n - 4 C_n Phat_{n-1}`, the inner
//! products stay of order one, and `C_n = <x Phat_n, Phat_{n-1}> Ghat_{n-1}^{-1} / 2`.

use serde_json::{json, Value};
use thiserror::Error;

use crate::matcore::{c, CMatrix, MatError, C64};
use crate::quadrature::{gauss_jacobi, QuadError, QuadRule};
use crate::specfun::{phi_map, SpecFunError};
use crate::weights::{FamilyKind, WeightFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("Gamma_{n} lost positive definiteness (min eigenvalue {min_eig:.3e}); increase the node count")]
    NotPositive { n: usize, min_eig: f64 },
    #[error("degree {n} exceeds the table size {nmax}")]
    DegreeTooLarge { n: usize, nmax: usize },
    #[error("z = {0} is closer than 1e-3 to [-1, 1]")]
    TooClose(C64),
    #[error("found {found} zeros of det P_{n}, more than r n = {bound}")]
    TooManyZeros { n: usize, found: usize, bound: usize },
    #[error("nmax must be at least 1")]
    EmptyTable,
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Recurrence coefficients `B_n`, `C_n` and norms `Gamma_n` for `n < nmax`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    pub family: WeightFamily,
    pub nmax: usize,
    /// `B_0 .. B_{nmax-1}`.
    pub b: Vec<CMatrix>,
    /// `C_0 .. C_{nmax-1}` with `C_0 = 0`.
    pub c: Vec<CMatrix>,
    /// `Gamma_0 .. Gamma_{nmax-1}`.
    pub gamma: Vec<CMatrix>,
    pub quad_nodes: usize,
}

/// Per-node weight matrices: a factor `F` with `F F^* = H` when the family has one, else `H`.
enum Kernel {
    Factor(Vec<CMatrix>),
    Full(Vec<CMatrix>),
}

impl Kernel {
    fn new(fam: &WeightFamily, nodes: &[f64]) -> Self {
        match nodes.iter().map(|&x| fam.h_factor(x)).collect::<Option<Vec<_>>>() {
            Some(f) => Kernel::Factor(f),
            None => Kernel::Full(nodes.iter().map(|&x| fam.h_real(x)).collect()),
        }
    }

    /// Left halves `P F` (or `P` itself for the full kernel).
    fn left(&self, p: &[CMatrix]) -> Vec<CMatrix> {
        match self {
            Kernel::Factor(f) => p.iter().zip(f).map(|(p, f)| p * f).collect(),
            Kernel::Full(_) => p.to_vec(),
        }
    }

    /// `sum_k w_k g(x_k) L_k M_k^*` where `L`, `M` are left halves.
    fn sum(&self, rule: &QuadRule, l: &[CMatrix], m: &[CMatrix], g: impl Fn(f64) -> f64, real: bool) -> CMatrix {
        let r = l[0].dim();
        let mut acc = CMatrix::zeros(r);
        for k in 0..rule.len() {
            let w = rule.weights[k] * g(rule.nodes[k]);
            let t = match self {
                Kernel::Factor(_) => &l[k] * &m[k].adjoint(),
                Kernel::Full(h) => &(&l[k] * &h[k]) * &m[k].adjoint(),
            };
            acc = &acc + &t.scale_re(w);
        }
        if real {
            acc.re()
        } else {
            acc
        }
    }
}

fn check_pd(g: &CMatrix, n: usize) -> Result<(), ExactError> {
    let min_eig = g.symmetrize().herm_eig()?.values[0];
    if !(min_eig > 0.0) {
        return Err(ExactError::NotPositive { n, min_eig });
    }
    Ok(())
}

/// Builds the recurrence table with an `m`-node Gauss-Jacobi rule.
pub fn stieltjes(fam: &WeightFamily, nmax: usize, m: usize) -> Result<RecurrenceTable, ExactError> {
    if nmax == 0 {
        return Err(ExactError::EmptyTable);
    }
    let rule = gauss_jacobi(m, fam.alpha, fam.beta)?;
    let r = fam.r;
    let real = fam.is_real();
    let kernel = Kernel::new(fam, &rule.nodes);
    let mut prev: Vec<CMatrix> = vec![CMatrix::zeros(r); m];
    let mut cur: Vec<CMatrix> = vec![CMatrix::identity(r); m];
    let mut half_prev = kernel.left(&prev);
    let mut ghat_prev: Option<CMatrix> = None;
    let (mut bs, mut cs, mut gs) = (Vec::with_capacity(nmax), Vec::with_capacity(nmax), Vec::with_capacity(nmax));
    for n in 0..nmax {
        let half = kernel.left(&cur);
        let ghat = kernel.sum(&rule, &half, &half, |_| 1.0, real).symmetrize();
        check_pd(&ghat, n)?;
        let bn = ghat.transpose().solve(&kernel.sum(&rule, &half, &half, |x| x, real).transpose())?.transpose();
        let cn = match &ghat_prev {
            None => CMatrix::zeros(r),
            Some(gp) => {
                let num = kernel.sum(&rule, &half, &half_prev, |x| x, real);
                gp.transpose().solve(&num.transpose())?.transpose().scale_re(0.5)
            }
        };
        let next: Vec<CMatrix> = (0..m)
            .map(|k| {
                let x = rule.nodes[k];
                let a = (&cur[k].scale_re(x) - &(&bn * &cur[k])).scale_re(2.0);
                &a - &(&cn * &prev[k]).scale_re(4.0)
            })
            .collect();
        gs.push(ghat.scale_re(0.25f64.powi(n as i32)));
        bs.push(bn);
        cs.push(cn);
        ghat_prev = Some(ghat);
        half_prev = half;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(RecurrenceTable { family: fam.clone(), nmax, b: bs, c: cs, gamma: gs, quad_nodes: m })
}

impl RecurrenceTable {
    fn check_degree(&self, n: usize) -> Result<(), ExactError> {
        if n > self.nmax {
            return Err(ExactError::DegreeTooLarge { n, nmax: self.nmax });
        }
        Ok(())
    }

    /// `Phat_0 .. Phat_n` at a complex point, by the scaled recurrence.
    fn scaled_sequence(&self, n: usize, z: C64) -> Vec<CMatrix> {
        let r = self.family.r;
        let mut out = Vec::with_capacity(n + 1);
        let mut prev = CMatrix::zeros(r);
        let mut cur = CMatrix::identity(r);
        out.push(cur.clone());
        for k in 0..n {
            let a = (&cur.scale(z) - &(&self.b[k] * &cur)).scale_re(2.0);
            let next = &a - &(&self.c[k] * &prev).scale_re(4.0);
            prev = std::mem::replace(&mut cur, next);
            out.push(cur.clone());
        }
        out
    }

    /// `2^n P_n(x)`.
    pub fn eval_scaled(&self, n: usize, x: f64) -> Result<CMatrix, ExactError> {
        self.eval_scaled_complex(n, c(x))
    }

    pub fn eval_scaled_complex(&self, n: usize, z: C64) -> Result<CMatrix, ExactError> {
        self.check_degree(n)?;
        Ok(self.scaled_sequence(n, z).pop().expect("non-empty"))
    }

    /// `2^n P_n(z) / phi(z)^n` through the ratio recurrence.
    pub fn eval_outer(&self, n: usize, z: C64) -> Result<CMatrix, ExactError> {
        self.check_degree(n)?;
        if dist_to_segment(z) < 1e-3 {
            return Err(ExactError::TooClose(z));
        }
        let f = phi_map(z)?;
        let (a, b) = (2.0 / f, 4.0 / (f * f));
        let r = self.family.r;
        let mut prev = CMatrix::zeros(r);
        let mut cur = CMatrix::identity(r);
        for k in 0..n {
            let t = (&cur.scale(z) - &(&self.b[k] * &cur)).scale(a);
            let next = &t - &(&self.c[k] * &prev).scale(b);
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(cur)
    }

    /// `det(2^n P_n(x))`, real part.
    pub fn det_scaled(&self, n: usize, x: f64) -> Result<f64, ExactError> {
        Ok(self.eval_scaled(n, x)?.det().re)
    }

    /// `max_{m < n < nmax} |<P_n, P_m>|_F / |Gamma_m|_F` with an independent rule of `nodes` nodes.
    pub fn orthogonality_residual(&self, nodes: usize) -> Result<f64, ExactError> {
        let fam = &self.family;
        let rule = gauss_jacobi(nodes, fam.alpha, fam.beta)?;
        let kernel = Kernel::new(fam, &rule.nodes);
        let seqs: Vec<Vec<CMatrix>> = rule.nodes.iter().map(|&x| self.scaled_sequence(self.nmax - 1, c(x))).collect();
        let halves: Vec<Vec<CMatrix>> =
            (0..self.nmax).map(|n| kernel.left(&seqs.iter().map(|s| s[n].clone()).collect::<Vec<_>>())).collect();
        let real = fam.is_real();
        let mut worst: f64 = 0.0;
        for n in 1..self.nmax {
            for m in 0..n {
                let acc = kernel.sum(&rule, &halves[n], &halves[m], |_| 1.0, real);
                // <P_n, P_m> = 2^{-n-m} <Phat_n, Phat_m>
                let val = acc.fro_norm() * 0.5f64.powi((n + m) as i32);
                worst = worst.max(val / self.gamma[m].fro_norm());
            }
        }
        Ok(worst)
    }

    /// JSON export `{family, nmax, quad_nodes, B, C, Gamma}` with entries as `[re, im]` pairs; `C` starts at `n = 1`.
    pub fn to_json(&self, number: &dyn Fn(f64) -> Value) -> Value {
        let mat = |m: &CMatrix| -> Value {
            let r = m.dim();
            Value::Array(
                (0..r)
                    .map(|i| {
                        Value::Array((0..r).map(|j| json!([number(m[(i, j)].re), number(m[(i, j)].im)])).collect())
                    })
                    .collect(),
            )
        };
        let family = serde_json::to_value(&self.family.kind).unwrap_or(Value::Null);
        json!({
            "family": family,
            "label": self.family.label,
            "alpha": number(self.family.alpha),
            "beta": number(self.family.beta),
            "nmax": self.nmax,
            "quad_nodes": self.quad_nodes,
            "B": self.b.iter().map(mat).collect::<Vec<_>>(),
            "C": self.c.iter().skip(1).map(mat).collect::<Vec<_>>(),
            "Gamma": self.gamma.iter().map(mat).collect::<Vec<_>>(),
        })
    }
}

pub fn dist_to_segment(z: C64) -> f64 {
    if z.re.abs() <= 1.0 {
        z.im.abs()
    } else {
        (z.re.abs() - 1.0).hypot(z.im)
    }
}

pub fn mvop_eval_scaled(tab: &RecurrenceTable, n: usize, x: f64) -> Result<CMatrix, ExactError> {
    tab.eval_scaled(n, x)
}

pub fn mvop_eval_outer(tab: &RecurrenceTable, n: usize, z: C64) -> Result<CMatrix, ExactError> {
    tab.eval_outer(n, z)
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    let mut fb = f(b);
    loop {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > 1e-13 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Ascending zeros of `det P_n` in (-1, 1).
///
/// A sign-change scan on `20 r n` Chebyshev points is refined by bisection. Local minima of
/// `|det|` without a sign change are refined by golden-section search: a sign flip at the
/// minimum yields a close pair, and a value below `1e-8` of the neighbours a double zero.
pub fn det_zeros(tab: &RecurrenceTable, n: usize) -> Result<Vec<f64>, ExactError> {
    tab.check_degree(n)?;
    let r = tab.family.r;
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = 20 * r * n;
    let xs: Vec<f64> = (0..m).map(|i| -(std::f64::consts::PI * (i as f64 + 0.5) / m as f64).cos()).collect();
    let f = |x: f64| tab.eval_scaled(n, x).map(|p| p.det().re).unwrap_or(f64::NAN);
    let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut zeros = Vec::new();
    for i in 0..m - 1 {
        if v[i] == 0.0 {
            zeros.push(xs[i]);
        } else if v[i] * v[i + 1] < 0.0 {
            zeros.push(bisect(&f, xs[i], xs[i + 1], v[i]));
        }
    }
    for i in 1..m - 1 {
        let (a, b, d) = (v[i - 1], v[i], v[i + 1]);
        if b.abs() < a.abs() && b.abs() <= d.abs() && a * b > 0.0 && b * d > 0.0 {
            let s = b.signum();
            let g = |x: f64| s * f(x);
            let xm = golden_min(&g, xs[i - 1], xs[i + 1]);
            let fm = f(xm);
            if fm * s < 0.0 {
                zeros.push(bisect(&f, xs[i - 1], xm, a));
                zeros.push(bisect(&f, xm, xs[i + 1], fm));
            } else if fm.abs() < 1e-8 * a.abs().max(d.abs()) {
                zeros.push(xm);
                zeros.push(xm);
            }
        }
    }
    zeros.sort_by(f64::total_cmp);
    if zeros.len() > r * n {
        return Err(ExactError::TooManyZeros { n, found: zeros.len(), bound: r * n });
    }
    Ok(zeros)
}

/// Default node count for a family and table size, honouring `MVOP_QUAD_NODES`.
pub fn nodes_for(fam: &WeightFamily, nmax: usize) -> usize {
    crate::quadrature::nodes_from_env().unwrap_or_else(|| crate::quadrature::default_nodes(nmax, fam.deg_h()))
}

/// True for families whose weight is real symmetric, so `det P_n` is real on the line.
pub fn real_symmetric(fam: &WeightFamily) -> bool {
    !matches!(fam.kind, FamilyKind::Custom) || fam.is_real()
}
