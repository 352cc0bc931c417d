//! Asymptotic evaluators for `2^n P_n` away from, on, and next to [-1, 1], together with
//! the closed-form matrices and zero predictors of the 2x2 built-in families.
//!
//! Scaling conventions: `outer_eval` approximates `2^n P_n(z) / phi(z)^n`, `inner_eval`
//! approximates `2^n P_n(x)`, and `endpoint_eval` approximates the unscaled product
//! `P_n(x) W(x)^{1/2}`, the `2^{-n}` being applied inside.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use thiserror::Error;

use crate::exact::{dist_to_segment, ExactError, RecurrenceTable};
use crate::matcore::{c, CMatrix, MatError, C64, I};
use crate::specfun::{arccos, bessel_j, bessel_j_prime, gamma_real, inv_phi, pow_principal, Side, SpecFunError};
use crate::szego::{a_boundary, endpoint_unitaries, szego_for, EndpointUnitaries, SzegoData, SzegoError};
use crate::weights::{endpoint_data, Endpoint, EndpointSpectralData, FamilyKind, WeightError, WeightFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymError {
    #[error("z = {0} is closer than 0.05 to [-1, 1]")]
    TooClose(C64),
    #[error("x = {0} is outside the compact range |x| <= 0.99")]
    OutsideCompact(f64),
    #[error("x = {x} is outside the endpoint window (1 - {delta}, 1)")]
    OutsideWindow { x: f64, delta: f64 },
    #[error("theta = {theta} must lie in (0, {max}]")]
    ThetaRange { theta: f64, max: f64 },
    #[error("order must be 0 or 1, got {0}")]
    Order(usize),
    #[error("{op} is not available for family {label}")]
    Unsupported { op: &'static str, label: String },
    #[error("Mehler-Heine constants are missing")]
    MissingConstants,
    #[error(transparent)]
    Szego(#[from] SzegoError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Width of the window `(1 - delta, 1)` accepted by [`endpoint_eval`].
pub const ENDPOINT_DELTA: f64 = 0.1;

/// Everything the evaluators need about one family.
#[derive(Debug, Clone)]
pub struct AsymContext {
    pub family: WeightFamily,
    pub szego: SzegoData,
    pub plus: EndpointSpectralData,
    pub minus: EndpointSpectralData,
    pub unitaries: EndpointUnitaries,
}

impl AsymContext {
    pub fn new(fam: &WeightFamily) -> Result<Self, AsymError> {
        let szego = szego_for(fam)?;
        let plus = endpoint_data(fam, Endpoint::Plus)?;
        let minus = endpoint_data(fam, Endpoint::Minus)?;
        let unitaries = endpoint_unitaries(&szego)?;
        Ok(AsymContext { family: fam.clone(), szego, plus, minus, unitaries })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.plus.exponents
    }

    pub fn betas(&self) -> &[f64] {
        &self.minus.exponents
    }
}

fn conj_diag(u: &CMatrix, d: &[f64]) -> Result<CMatrix, MatError> {
    let t = u * &CMatrix::diag_real(d);
    Ok(&t * &u.inv()?)
}

fn squares(e: &[f64]) -> Vec<f64> {
    e.iter().map(|a| 4.0 * a * a - 1.0).collect()
}

/// First correction `Pi_1(z)` of the outer expansion.
pub fn pi1(ctx: &AsymContext, z: C64) -> Result<CMatrix, AsymError> {
    let phi = 1.0 / inv_phi(z)?;
    let u = &ctx.unitaries;
    let a = conj_diag(&u.u1, &squares(ctx.alphas()))?.scale(-1.0 / (8.0 * (phi - 1.0)));
    let b = conj_diag(&u.um1, &squares(ctx.betas()))?.scale(1.0 / (8.0 * (phi + 1.0)));
    Ok(&a + &b)
}

/// Outer asymptotics of `2^n P_n(z) / phi(z)^n` to order 0 or 1 in `1/n`.
pub fn outer_eval(ctx: &AsymContext, n: usize, z: C64, order: usize) -> Result<CMatrix, AsymError> {
    if order > 1 {
        return Err(AsymError::Order(order));
    }
    if dist_to_segment(z) < 0.05 {
        return Err(AsymError::TooClose(z));
    }
    let s = inv_phi(z)?;
    let pref = 1.0 / (1.0 - s * s).sqrt();
    let d = ctx.szego.d_at_s(s);
    let r = ctx.family.r;
    let bracket = if order == 1 && n > 0 {
        &CMatrix::identity(r) + &pi1(ctx, z)?.scale_re(1.0 / n as f64)
    } else {
        CMatrix::identity(r)
    };
    let left = &ctx.szego.dinf * &bracket;
    // left * D^{-1} = (D^{-T} left^T)^T
    let out = d.transpose().solve(&left.transpose())?.transpose();
    Ok(out.scale(pref))
}

/// Leading oscillatory asymptotics of `2^n P_n(x)` inside the interval.
pub fn inner_eval(ctx: &AsymContext, n: usize, x: f64) -> Result<CMatrix, AsymError> {
    if !(x.abs() <= 0.99) {
        return Err(AsymError::OutsideCompact(x));
    }
    let th = arccos(x);
    let e = C64::from_polar(1.0, (n as f64 + 0.5) * th - FRAC_PI_4);
    let dp = ctx.szego.d_plus(x)?.inv()?;
    let dm = ctx.szego.d_minus(x)?.inv()?;
    let mid = &dp.scale(e) + &dm.scale(e.conj());
    let pref = 1.0 / (SQRT_2 * (1.0 - x * x).powf(0.25));
    Ok((&ctx.szego.dinf * &mid).scale_re(pref))
}

/// `W(x)^{1/2}` from the eigen-decomposition of `H(x)`.
pub fn sqrt_weight(fam: &WeightFamily, x: f64) -> Result<CMatrix, AsymError> {
    Ok(fam.weight(x).sqrt_psd()?)
}

fn bessel_diag(orders: &[f64], arg: f64, deriv: bool) -> Result<CMatrix, AsymError> {
    let v: Vec<f64> = orders
        .iter()
        .map(|&a| if deriv { bessel_j_prime(a, arg) } else { bessel_j(a, arg) })
        .collect::<Result<_, _>>()?;
    Ok(CMatrix::diag_real(&v))
}

/// Bessel-type asymptotics of `P_n(x) W(x)^{1/2}` for `x` in `(1 - 0.1, 1)`.
pub fn endpoint_eval(ctx: &AsymContext, n: usize, x: f64) -> Result<CMatrix, AsymError> {
    if !(x > 1.0 - ENDPOINT_DELTA && x < 1.0) {
        return Err(AsymError::OutsideWindow { x, delta: ENDPOINT_DELTA });
    }
    let th = arccos(x);
    let nf = n as f64;
    let ap = a_boundary(&ctx.szego, x, Side::Plus)?;
    let am = a_boundary(&ctx.szego, x, Side::Minus)?;
    let cos_part = (&ap + &am).scale_re(0.5);
    let sin_part = (&ap - &am).scale(1.0 / (2.0 * I));
    let jd = bessel_diag(ctx.alphas(), nf * th, false)?;
    let jp = bessel_diag(ctx.alphas(), nf * th, true)?;
    let mid = &(&cos_part * &jd) + &(&sin_part * &jp);
    let (_, q) = ctx.family.eig_analytic(c(x))?;
    let pref = (PI * nf * th).sqrt() * 0.5f64.powi(n as i32) / (1.0 - x * x).powf(0.25);
    Ok((&(&ctx.szego.dinf * &mid) * &q.adjoint()).scale_re(pref))
}

/// `theta^{-a} J_a(theta)`, continuous at `theta = 0`.
fn scaled_bessel(a: f64, theta: f64) -> Result<f64, AsymError> {
    if theta == 0.0 {
        return Ok(2f64.powf(-a) / gamma_real(a + 1.0)?);
    }
    Ok(theta.powf(-a) * bessel_j(a, theta)?)
}

/// Mehler-Heine limit `D(inf) U_1 diag(theta^{-alpha_j} J_{alpha_j}(theta))`.
pub fn mehler_heine(ctx: &AsymContext, theta: f64) -> Result<CMatrix, AsymError> {
    if !(0.0..=40.0).contains(&theta) {
        return Err(AsymError::ThetaRange { theta, max: 40.0 });
    }
    let d: Vec<f64> = ctx.alphas().iter().map(|&a| scaled_bessel(a, theta)).collect::<Result<_, _>>()?;
    Ok(&(&ctx.szego.dinf * &ctx.unitaries.u1) * &CMatrix::diag_real(&d))
}

/// Finite-`n` left side `2^n P_n(cos(theta/n)) Q diag(c_j^{1/2} n^{-alpha_j}) / sqrt(pi n)`.
pub fn mh_lhs(ctx: &AsymContext, tab: &RecurrenceTable, n: usize, theta: f64) -> Result<CMatrix, AsymError> {
    let nf = n as f64;
    if !(theta > 0.0 && theta < nf) {
        return Err(AsymError::ThetaRange { theta, max: nf });
    }
    let cs = &ctx.plus.constants;
    if cs.len() != ctx.family.r {
        return Err(AsymError::MissingConstants);
    }
    let x = (theta / nf).cos();
    let p = tab.eval_scaled(n, x)?;
    let (_, q) = ctx.family.eig_analytic(c(x))?;
    let d: Vec<f64> = cs.iter().zip(ctx.alphas()).map(|(cj, a)| cj.sqrt() * nf.powf(-a)).collect();
    Ok((&(&p * &q) * &CMatrix::diag_real(&d)).scale_re(1.0 / (PI * nf).sqrt()))
}

/// `B_2` with `B_n = B_2 / n^2 + O(n^{-3})`.
pub fn asym_b2(ctx: &AsymContext) -> Result<CMatrix, AsymError> {
    let dinf = &ctx.szego.dinf;
    let di = dinf.inv()?;
    let u = &ctx.unitaries;
    let a = &(dinf * &conj_diag(&u.u1, &squares(ctx.alphas()))?) * &di;
    let b = &(dinf * &conj_diag(&u.um1, &squares(ctx.betas()))?) * &di;
    Ok((&b - &a).scale_re(1.0 / 16.0))
}

/// Leading approximations `(B_2 / n^2, I / 4)` of the recurrence coefficients.
pub fn asym_recurrence(ctx: &AsymContext, n: usize) -> Result<(CMatrix, CMatrix), AsymError> {
    let nf = (n.max(1)) as f64;
    let b = asym_b2(ctx)?.scale_re(1.0 / (nf * nf));
    Ok((b, CMatrix::identity(ctx.family.r).scale_re(0.25)))
}

fn unsupported(op: &'static str, fam: &WeightFamily) -> AsymError {
    AsymError::Unsupported { op, label: fam.label.clone() }
}

/// Closed-form leading outer term for Jacobi `ell = 1` and the Gegenbauer 2x2 block.
pub fn closed_form_outer(fam: &WeightFamily, z: C64) -> Result<CMatrix, AsymError> {
    let phi = 1.0 / inv_phi(z)?;
    match &fam.kind {
        FamilyKind::Jacobi { ell: 1, .. } => {
            let (a, b) = (fam.alpha, fam.beta);
            let pref = pow_principal(phi / 2.0, (a + b + 1.0) / 2.0)
                / (2.0
                    * pow_principal(z - 1.0, (2.0 * a + 3.0) / 4.0)
                    * pow_principal(z + 1.0, (2.0 * b + 3.0) / 4.0)
                    * (phi - 1.0));
            let m = CMatrix::new(2, vec![(phi - 1.0) * (phi - 1.0), 4.0 * phi, c(0.0), phi * (phi + 1.0)])?;
            Ok(m.scale(pref))
        }
        FamilyKind::GegenbauerBlock { nu } => {
            let w = (z - 1.0).sqrt() * (z + 1.0).sqrt();
            let pref = pow_principal(phi, nu + 1.0) / (2f64.powf(nu + 2.0) * pow_principal(w, nu + 2.0));
            Ok(geg_matrix(z).scale(pref))
        }
        _ => Err(unsupported("closed_form_outer", fam)),
    }
}

fn geg_matrix(z: C64) -> CMatrix {
    CMatrix::new(2, vec![2.0 * z, c(-2.0 * SQRT_2), c(-SQRT_2), 2.0 * z]).expect("2x2")
}

fn jacobi_gamma(a: f64, b: f64, n: usize, th: f64) -> f64 {
    (n as f64 + 1.0 + (a + b) / 2.0) * th - a * FRAC_PI_2 - FRAC_PI_4
}

fn geg_phase(nu: f64, n: usize, th: f64) -> f64 {
    (n as f64 + nu + 1.0) * th - nu * FRAC_PI_2
}

/// Closed-form leading inner term for Jacobi `ell = 1` and the Gegenbauer 2x2 block.
pub fn closed_form_inner(fam: &WeightFamily, n: usize, x: f64) -> Result<CMatrix, AsymError> {
    if !(x > -1.0 && x < 1.0) {
        return Err(SpecFunError::OutsideInterval(x).into());
    }
    let th = arccos(x);
    match &fam.kind {
        FamilyKind::Jacobi { ell: 1, .. } => {
            let (a, b) = (fam.alpha, fam.beta);
            let g = jacobi_gamma(a, b, n, th);
            let pref = 2f64.powf(-(a + b) / 2.0)
                / ((1.0 - x).powf((2.0 * a + 5.0) / 4.0) * (1.0 + x).powf((2.0 * b + 3.0) / 4.0));
            let m = CMatrix::from_real_rows(&[
                vec![(1.0 - x) * g.cos(), -2.0 * g.cos()],
                vec![0.0, -((1.0 + x) / 2.0).sqrt() * (g + th / 2.0).cos()],
            ]);
            Ok(m.scale_re(pref))
        }
        FamilyKind::GegenbauerBlock { nu } => {
            let pref = -2f64.powf(-nu - 1.0) / (1.0 - x * x).powf(nu / 2.0 + 1.0) * geg_phase(*nu, n, th).cos();
            Ok(geg_matrix(c(x)).scale_re(pref))
        }
        _ => Err(unsupported("closed_form_inner", fam)),
    }
}

/// One labeled group of predicted zeros; `multiplicity` 2 marks predicted double zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroGroup {
    pub label: &'static str,
    pub multiplicity: usize,
    pub points: Vec<f64>,
}

fn cos_solutions(offset: f64, denom: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let kmax = (denom + 2.0).ceil() as i64;
    for k in -2 - offset.abs().ceil() as i64..=kmax {
        let arg = (offset + k as f64 * PI) / denom;
        if arg > 0.0 && arg < PI {
            out.push(arg.cos());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Leading-order zero predictions for `det P_n`.
///
/// Jacobi `ell = 1`: the solutions of `cos(gamma(x)) = 0` and `cos(gamma(x) + arccos(x) / 2) = 0`.
/// Gegenbauer block: the double zeros where the cosine of the determinant prediction vanishes.
pub fn predicted_zeros(fam: &WeightFamily, n: usize) -> Result<Vec<ZeroGroup>, AsymError> {
    let nf = n as f64;
    match &fam.kind {
        FamilyKind::Jacobi { ell: 1, .. } => {
            let (a, b) = (fam.alpha, fam.beta);
            let off = a * FRAC_PI_2 + 0.75 * PI;
            Ok(vec![
                ZeroGroup { label: "group1", multiplicity: 1, points: cos_solutions(off, nf + 1.0 + (a + b) / 2.0) },
                ZeroGroup { label: "group2", multiplicity: 1, points: cos_solutions(off, nf + 1.5 + (a + b) / 2.0) },
            ])
        }
        FamilyKind::GegenbauerBlock { nu } => Ok(vec![ZeroGroup {
            label: "double",
            multiplicity: 2,
            points: cos_solutions(FRAC_PI_2 + nu * FRAC_PI_2, nf + nu + 1.0),
        }]),
        _ => Err(unsupported("predicted_zeros", fam)),
    }
}

/// All predicted zeros, merged and ascending, each listed once.
pub fn predicted_zero_points(fam: &WeightFamily, n: usize) -> Result<Vec<f64>, AsymError> {
    let mut all: Vec<f64> = predicted_zeros(fam, n)?.into_iter().flat_map(|g| g.points).collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Leading-order prediction of `det(2^n P_n(x))`.
pub fn predicted_det(fam: &WeightFamily, n: usize, x: f64) -> Result<f64, AsymError> {
    if !(x > -1.0 && x < 1.0) {
        return Err(SpecFunError::OutsideInterval(x).into());
    }
    let th = arccos(x);
    match &fam.kind {
        FamilyKind::Jacobi { ell: 1, .. } => Ok(closed_form_inner(fam, n, x)?.det().re),
        FamilyKind::GegenbauerBlock { nu } => {
            let cg = geg_phase(*nu, n, th).cos();
            Ok(-2f64.powf(-2.0 * nu) * (1.0 - x * x).powf(-nu - 1.0) * cg * cg)
        }
        _ => Err(unsupported("predicted_det", fam)),
    }
}

/// Closed-form Mehler-Heine prefactor `D(inf) U_1` of the 2x2 built-ins.
pub fn closed_form_mh_matrix(fam: &WeightFamily) -> Result<CMatrix, AsymError> {
    match &fam.kind {
        FamilyKind::Jacobi { k, ell: 1 } => {
            let p = k / (fam.alpha + 1.0 - k);
            let sp = p.sqrt();
            let pref = 2f64.powf(-(fam.alpha + fam.beta) / 2.0 - 2.0) / (1.0 + p).sqrt();
            Ok(CMatrix::from_real_rows(&[vec![2.0 * p, 2.0 * sp], vec![-1.0, sp]]).scale_re(pref))
        }
        FamilyKind::GegenbauerBlock { nu } => {
            let q = (nu * (nu + 1.0)).sqrt();
            let pref = 2f64.powf(-nu - 0.5) / (1.0 + 2.0 * nu).sqrt();
            Ok(CMatrix::from_real_rows(&[vec![SQRT_2 * (nu + 1.0), -SQRT_2 * q], vec![*nu, q]]).scale_re(pref))
        }
        _ => Err(unsupported("closed_form_mh_matrix", fam)),
    }
}

/// Closed-form `B_2` of the 2x2 built-ins.
pub fn closed_form_b2(fam: &WeightFamily) -> Result<CMatrix, AsymError> {
    match &fam.kind {
        FamilyKind::Jacobi { k, ell: 1 } => {
            let (a, b) = (fam.alpha, fam.beta);
            let p = k / (a + 1.0 - k);
            let d = CMatrix::diag_real(&[((b + 1.0).powi(2) - a * a) / 4.0, (b * b - (a + 2.0).powi(2)) / 4.0]);
            let m = CMatrix::from_real_rows(&[vec![1.0, 2.0 * p], vec![0.5, -1.0]]).scale_re((a + 1.0) / (1.0 + p));
            Ok(&d - &m)
        }
        FamilyKind::GegenbauerBlock { nu } => {
            Ok(CMatrix::from_real_rows(&[vec![0.0, SQRT_2 * (1.0 + nu)], vec![nu * FRAC_1_SQRT_2, 0.0]]))
        }
        _ => Err(unsupported("closed_form_b2", fam)),
    }
}
