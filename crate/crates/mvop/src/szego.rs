//! Matrix Szego functions of the built-in families and the endpoint factorizations.
//!
//! Every evaluator works in the variable `s = 1/phi(z)` of the unit disk. The scalar
//! part `(z-1)^{alpha/2} (z+1)^{beta/2} / phi(z)^{(alpha+beta)/2}` equals
//! `((1-s)/sqrt2)^alpha ((1+s)/sqrt2)^beta`, which is branch free for `|s| < 1`, and
//! boundary values on (-1, 1) are the same expressions at `s = exp(-+ i arccos x)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{c, CMatrix, MatError, C64, ZERO};
use crate::specfun::{
    arccos, branch_pow, branch_pow_boundary, inv_phi, pow_principal, BranchCut, BranchSpec, Side, SpecFunError,
};
use crate::weights::{
    endpoint_data, gegenbauer_r, jacobi_r, jacobi_t, krawtchouk_matrix, Endpoint, FamilyKind, WeightError, WeightFamily,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SzegoError {
    #[error("{op} is not defined for family {label}")]
    WrongFamily { op: &'static str, label: String },
    #[error("no Szego function is available for family {0}")]
    Unavailable(String),
    #[error("extrapolated endpoint unitary fails unitarity ({0:.3e})")]
    NotUnitary(f64),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// `s` with `1 - s` and `1 + s` carried separately.
#[derive(Debug, Clone, Copy)]
struct Parts {
    s: C64,
    om: C64,
    op: C64,
}

impl Parts {
    fn of(s: C64) -> Self {
        Parts { s, om: 1.0 - s, op: 1.0 + s }
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Jacobi { r: Vec<Vec<f64>>, ell: usize, t_ll: f64 },
    Gegenbauer { k: CMatrix, r: CMatrix, n: usize },
    Block { nu: f64 },
}

/// Szego function `D` of a built-in family together with its limit at infinity.
#[derive(Debug, Clone)]
pub struct SzegoData {
    pub family: WeightFamily,
    pub dinf: CMatrix,
    factor: Factor,
}

impl SzegoData {
    fn build(family: &WeightFamily, factor: Factor) -> Self {
        let mut sd = SzegoData { family: family.clone(), dinf: CMatrix::identity(family.r), factor };
        sd.dinf = sd.d_at_s(ZERO);
        sd
    }

    /// `((1-s)/sqrt2)^alpha ((1+s)/sqrt2)^beta`.
    pub fn scalar(&self, s: C64) -> C64 {
        self.scalar_parts(Parts::of(s))
    }

    fn scalar_parts(&self, p: Parts) -> C64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        pow_principal(p.om * h, self.family.alpha) * pow_principal(p.op * h, self.family.beta)
    }

    /// Matrix part `D_H` as a function of `s`.
    pub fn d_h(&self, s: C64) -> CMatrix {
        self.d_h_parts(Parts::of(s))
    }

    fn d_h_parts(&self, p: Parts) -> CMatrix {
        let Parts { s, om, op } = p;
        match &self.factor {
            Factor::Jacobi { r, ell, t_ll } => {
                let ell = *ell;
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let norm = 1.0 / t_ll.sqrt();
                CMatrix::from_fn(ell + 1, |i, j| {
                    if i > j {
                        return ZERO;
                    }
                    // (1-z)^i s^j = (-1)^i (1-s)^{2i} s^{j-i} / 2^i
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let a = om.powu(2 * i as u32) * s.powu((j - i) as u32) * (sign / 2f64.powi(i as i32));
                    a * r[i][j] * (op * h).powu((ell - j) as u32) * norm
                })
            }
            Factor::Gegenbauer { k, r, n } => {
                let n = *n;
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let ratio = om / op;
                let d: Vec<C64> = (0..=n).map(|j| ratio.powu(j as u32)).collect();
                (&(k * &CMatrix::diag(&d)) * r).scale((op * h).powu(n as u32))
            }
            Factor::Block { nu } => {
                let nu = *nu;
                let w = (1.0 + s * s) * 0.5;
                CMatrix::new(
                    2,
                    vec![w * (2.0 * (nu + 1.0)).sqrt(), s * (2.0 * nu).sqrt(), s * (nu + 1.0).sqrt(), w * nu.sqrt()],
                )
                .expect("2x2")
            }
        }
    }

    pub fn d_at_s(&self, s: C64) -> CMatrix {
        self.d_h(s).scale(self.scalar(s))
    }

    /// `D(z)` for `z` off [-1, 1].
    pub fn d(&self, z: C64) -> Result<CMatrix, SzegoError> {
        Ok(self.d_at_s(inv_phi(z)?))
    }

    /// Boundary values `D_+-(x)` on (-1, 1).
    pub fn d_boundary(&self, x: f64, side: Side) -> Result<CMatrix, SzegoError> {
        if !(x > -1.0 && x < 1.0) {
            return Err(SpecFunError::OutsideInterval(x).into());
        }
        // 1 -+ s from 1 -+ x directly: forming them from s cancels next to the endpoints
        let sin = ((1.0 - x) * (1.0 + x)).sqrt();
        let im = side.sign() * sin;
        let p = Parts { s: C64::new(x, -im), om: C64::new(1.0 - x, im), op: C64::new(1.0 + x, -im) };
        Ok(self.d_h_parts(p).scale(self.scalar_parts(p)))
    }

    pub fn d_plus(&self, x: f64) -> Result<CMatrix, SzegoError> {
        self.d_boundary(x, Side::Plus)
    }

    pub fn d_minus(&self, x: f64) -> Result<CMatrix, SzegoError> {
        self.d_boundary(x, Side::Minus)
    }
}

fn wrong(op: &'static str, fam: &WeightFamily) -> SzegoError {
    SzegoError::WrongFamily { op, label: fam.label.clone() }
}

pub fn szego_jacobi(fam: &WeightFamily) -> Result<SzegoData, SzegoError> {
    match &fam.kind {
        FamilyKind::Jacobi { k, ell } => {
            let t = jacobi_t(fam.alpha, *k, *ell);
            let factor = Factor::Jacobi { r: jacobi_r(fam.alpha, *k, *ell), ell: *ell, t_ll: t[*ell] };
            Ok(SzegoData::build(fam, factor))
        }
        _ => Err(wrong("szego_jacobi", fam)),
    }
}

pub fn szego_gegenbauer(fam: &WeightFamily) -> Result<SzegoData, SzegoError> {
    match &fam.kind {
        FamilyKind::Gegenbauer { nu, two_ell } => {
            let n = *two_ell;
            let k = krawtchouk_matrix(n);
            let km = CMatrix::from_fn(n + 1, |i, j| c(k[i][j]));
            Ok(SzegoData::build(fam, Factor::Gegenbauer { k: km, r: gegenbauer_r(*nu, n), n }))
        }
        FamilyKind::GegenbauerBlock { nu } => Ok(SzegoData::build(fam, Factor::Block { nu: *nu })),
        _ => Err(wrong("szego_gegenbauer", fam)),
    }
}

/// Szego data for any built-in family; custom families have none.
pub fn szego_for(fam: &WeightFamily) -> Result<SzegoData, SzegoError> {
    match &fam.kind {
        FamilyKind::Jacobi { .. } => szego_jacobi(fam),
        FamilyKind::Gegenbauer { .. } | FamilyKind::GegenbauerBlock { .. } => szego_gegenbauer(fam),
        FamilyKind::Custom => Err(SzegoError::Unavailable(fam.label.clone())),
    }
}

fn orders(fam: &WeightFamily, e: Endpoint) -> Result<Vec<usize>, SzegoError> {
    match fam.analytic_orders(e) {
        Some(o) => Ok(o),
        None => Ok(endpoint_data(fam, e)?.orders),
    }
}

/// `((-1)^{n_j} lambda_j)^{1/2}` continued analytically off the cut: the factor `(z -+ 1)^{n_j/2}`
/// carries the branch and `lambda_j / (1 -+ z)^{n_j}` stays near the positive axis next to the endpoint.
fn modified_roots(lam: &[C64], ords: &[usize], z: C64, cut: BranchCut) -> Result<Vec<C64>, SzegoError> {
    let base = match cut {
        BranchCut::LeftOfOne => 1.0 - z,
        _ => 1.0 + z,
    };
    lam.iter()
        .zip(ords)
        .map(|(l, &n)| {
            let edge = branch_pow(z, BranchSpec::new(cut, n as f64 / 2.0))?;
            Ok(edge * (l / base.powu(n as u32)).sqrt())
        })
        .collect()
}

/// `V(z) = (z-1)^{alpha/2} (z+1)^{beta/2} Q(z) diag((-1)^{n_j} lambda_j)^{1/2}`, cut on `(-inf, 1]`.
pub fn v_eval(fam: &WeightFamily, z: C64) -> Result<CMatrix, SzegoError> {
    let a = branch_pow(z, BranchSpec::new(BranchCut::LeftOfOne, fam.alpha / 2.0))?;
    let b = pow_principal(z + 1.0, fam.beta / 2.0);
    let (lam, q) = fam.eig_analytic(z)?;
    let ords = orders(fam, Endpoint::Plus)?;
    let roots = modified_roots(&lam, &ords, z, BranchCut::LeftOfOne)?;
    Ok((&q * &CMatrix::diag(&roots)).scale(a * b))
}

/// `Vhat(z) = (1-z)^{alpha/2} (-1-z)^{beta/2} Q(z) diag((-1)^{m_j} lambda_j)^{1/2}`, cut on `[-1, inf)`.
pub fn vhat_eval(fam: &WeightFamily, z: C64) -> Result<CMatrix, SzegoError> {
    let b = branch_pow(z, BranchSpec::new(BranchCut::RightOfMinusOne, fam.beta / 2.0))?;
    let a = pow_principal(1.0 - z, fam.alpha / 2.0);
    let (lam, q) = fam.eig_analytic(z)?;
    let ords = orders(fam, Endpoint::Minus)?;
    let roots = modified_roots(&lam, &ords, z, BranchCut::RightOfMinusOne)?;
    Ok((&q * &CMatrix::diag(&roots)).scale(a * b))
}

/// Boundary values `V_+-(x)` on (-1, 1).
pub fn v_boundary(fam: &WeightFamily, x: f64, side: Side) -> Result<CMatrix, SzegoError> {
    if !(x > -1.0 && x < 1.0) {
        return Err(SpecFunError::OutsideInterval(x).into());
    }
    let a = branch_pow_boundary(x, BranchSpec::new(BranchCut::LeftOfOne, fam.alpha / 2.0), side);
    let b = (1.0 + x).powf(fam.beta / 2.0);
    let (lam, q) = fam.eig_analytic(c(x))?;
    let ords = orders(fam, Endpoint::Plus)?;
    let roots: Vec<C64> = lam
        .iter()
        .zip(&ords)
        .map(|(l, &n)| C64::from_polar(1.0, side.sign() * std::f64::consts::FRAC_PI_2 * n as f64) * l.re.abs().sqrt())
        .collect();
    Ok((&q * &CMatrix::diag(&roots)).scale(a * b))
}

/// Boundary values `Vhat_+-(x)` on (-1, 1).
pub fn vhat_boundary(fam: &WeightFamily, x: f64, side: Side) -> Result<CMatrix, SzegoError> {
    if !(x > -1.0 && x < 1.0) {
        return Err(SpecFunError::OutsideInterval(x).into());
    }
    let a = (1.0 - x).powf(fam.alpha / 2.0);
    let b = branch_pow_boundary(x, BranchSpec::new(BranchCut::RightOfMinusOne, fam.beta / 2.0), side);
    let (lam, q) = fam.eig_analytic(c(x))?;
    let ords = orders(fam, Endpoint::Minus)?;
    let roots: Vec<C64> = lam
        .iter()
        .zip(&ords)
        .map(|(l, &m)| C64::from_polar(1.0, -side.sign() * std::f64::consts::FRAC_PI_2 * m as f64) * l.re.abs().sqrt())
        .collect();
    Ok((&q * &CMatrix::diag(&roots)).scale(a * b))
}

/// `A(z) = phi(z)^{1/2} D(z)^{-1} V(z)`.
pub fn a_eval(sd: &SzegoData, z: C64) -> Result<CMatrix, SzegoError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let root_phi = ((z + 1.0).sqrt() + (z - 1.0).sqrt()) * h;
    let d = sd.d(z)?;
    Ok(d.solve(&v_eval(&sd.family, z)?)?.scale(root_phi))
}

/// Boundary values `A_+-(x) = exp(+- i arccos(x) / 2) D_+-(x)^{-1} V_+-(x)`.
pub fn a_boundary(sd: &SzegoData, x: f64, side: Side) -> Result<CMatrix, SzegoError> {
    let d = sd.d_boundary(x, side)?;
    let v = v_boundary(&sd.family, x, side)?;
    Ok(d.solve(&v)?.scale(C64::from_polar(1.0, side.sign() * arccos(x) / 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Extrapolated,
}

#[derive(Debug, Clone)]
pub struct EndpointUnitaries {
    pub u1: CMatrix,
    pub um1: CMatrix,
    pub provenance: Provenance,
}

/// `|U^* U - I|_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (&(&u.adjoint() * u) - &CMatrix::identity(u.dim())).fro_norm()
}

/// Closed-form `U_1`, `U_{-1}` for the 2x2 built-ins.
pub fn closed_form_unitaries(fam: &WeightFamily) -> Option<EndpointUnitaries> {
    match &fam.kind {
        FamilyKind::Jacobi { k, ell: 1 } => {
            let p = k / (fam.alpha + 1.0 - k);
            let sp = p.sqrt();
            let u1 = CMatrix::from_real_rows(&[vec![sp, 1.0], vec![1.0, -sp]]).scale_re(1.0 / (1.0 + p).sqrt());
            let um1 = CMatrix::from_real_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]);
            Some(EndpointUnitaries { u1, um1, provenance: Provenance::ClosedForm })
        }
        FamilyKind::GegenbauerBlock { nu } => {
            let (a, b) = ((nu + 1.0).sqrt(), nu.sqrt());
            let n = 1.0 / (1.0 + 2.0 * nu).sqrt();
            let u1 = CMatrix::from_real_rows(&[vec![a, -b], vec![b, a]]).scale_re(n);
            let um1 = CMatrix::from_real_rows(&[vec![-a, -b], vec![b, -a]]).scale_re(n);
            Some(EndpointUnitaries { u1, um1, provenance: Provenance::ClosedForm })
        }
        _ => None,
    }
}

fn neville_sqrt(ts: &[f64], vals: Vec<CMatrix>) -> CMatrix {
    let s: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
    let n = s.len();
    let mut t = vals;
    for j in 1..n {
        for i in (j..n).rev() {
            let num = &t[i - 1].scale_re(s[i]) - &t[i].scale_re(s[i - j]);
            t[i] = num.scale_re(1.0 / (s[i] - s[i - j]));
        }
    }
    t.pop().expect("non-empty")
}

/// Extrapolates `D_+(x)^{-1} V_+(x)` to `x = 1` and `D_+(x)^{-1} Vhat_+(x)` to `x = -1`.
///
/// The samples sit inside the interval at distance `t = 0.1 * 2^{-k}`, `k = 0..8`, from
/// the endpoint, where `H` is positive definite and its vanishing eigenvalues can be
/// computed to full relative accuracy. The expansion is in powers of `sqrt(t)`, so
/// Neville's scheme runs in that variable.
pub fn extrapolated_unitaries(sd: &SzegoData) -> Result<EndpointUnitaries, SzegoError> {
    let ts: Vec<f64> = (0..9).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let fam = &sd.family;
    let mut plus = Vec::with_capacity(ts.len());
    let mut minus = Vec::with_capacity(ts.len());
    for &t in &ts {
        let x = 1.0 - t;
        plus.push(sd.d_plus(x)?.solve(&v_boundary(fam, x, Side::Plus)?)?);
        let x = -1.0 + t;
        minus.push(sd.d_plus(x)?.solve(&vhat_boundary(fam, x, Side::Plus)?)?);
    }
    let u1 = neville_sqrt(&ts, plus);
    let um1 = neville_sqrt(&ts, minus);
    let worst = unitarity_defect(&u1).max(unitarity_defect(&um1));
    if worst > 1e-6 {
        return Err(SzegoError::NotUnitary(worst));
    }
    Ok(EndpointUnitaries { u1, um1, provenance: Provenance::Extrapolated })
}

/// Closed forms where known, otherwise extrapolation.
pub fn endpoint_unitaries(sd: &SzegoData) -> Result<EndpointUnitaries, SzegoError> {
    match closed_form_unitaries(&sd.family) {
        Some(u) => Ok(u),
        None => extrapolated_unitaries(sd),
    }
}

/// `D_+(x) D_+(x)^*` residual relative to `W(x)`.
pub fn factorization_residual(sd: &SzegoData, x: f64, side: Side) -> Result<f64, SzegoError> {
    let d = sd.d_boundary(x, side)?;
    let w = sd.family.weight(x);
    Ok((&(&d * &d.adjoint()) - &w).fro_norm() / w.fro_norm())
}
