//! Scalar special functions and branch conventions.
//!
//! Bessel functions are summed from the ascending series with every term carried in
//! double-double arithmetic. The prefactor `(x/2)^nu / Gamma(nu+1)` is applied once
//! at the end, so it only contributes a relative error.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("gamma has a pole at {0}")]
    GammaPole(f64),
    #[error("gamma argument {0} outside |x| <= 170")]
    GammaRange(f64),
    #[error("Bessel order {0} must exceed -1")]
    BesselOrder(f64),
    #[error("Bessel argument {0} outside [0, 60]")]
    BesselArgument(f64),
    #[error("Bessel derivative of order {0} is unbounded at x = 0")]
    BesselDerivativeAtZero(f64),
    #[error("Krawtchouk degree {i} exceeds N = {n}")]
    KrawtchoukDegree { i: usize, n: usize },
    #[error("Krawtchouk parameter p = {0} outside (0, 1)")]
    KrawtchoukParameter(f64),
    #[error("z = {0} lies on [-1, 1]; use phi_boundary for boundary values")]
    OnSegment(C64),
    #[error("x = {0} outside (-1, 1)")]
    OutsideInterval(f64),
    #[error("z = {z} lies on the branch cut of {cut:?}")]
    OnCut { z: C64, cut: BranchCut },
}

/// Side from which a boundary value on a cut is taken: `Plus` from the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos, g = 7, nine terms, reflection below 1/2).
pub fn gamma_real(x: f64) -> Result<f64, SpecFunError> {
    if x.abs() > 170.0 {
        return Err(SpecFunError::GammaRange(x));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(SpecFunError::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Rising factorial `(a)_k`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).map(|j| a + j as f64).product()
}

/// Binomial coefficient `C(n, k)` for real `n` and integer `k >= 0`.
pub fn binomial(n: f64, k: usize) -> f64 {
    let mut b = 1.0;
    for j in 0..k {
        b *= (n - j as f64) / (j as f64 + 1.0);
    }
    b
}

/// Fractional bits of the fixed-point accumulator in `bessel_core`.
const FIX_BITS: u64 = 192;

/// Exact dyadic form `m * 2^e` of a finite double.
fn dyadic(v: f64) -> (BigInt, i64) {
    if v == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let m = BigInt::from(m);
    (if v < 0.0 { -m } else { m }, e)
}

/// `v * 2^s`, rounding toward negative infinity when `s < 0`.
fn shift(v: BigInt, s: i64) -> BigInt {
    if s >= 0 {
        v << s as u64
    } else {
        v >> (-s) as u64
    }
}

/// Sums `sum_k weight(k) (-q)^k / (k! (nu+1)_k)` with `q = x^2/4`.
///
/// Terms are carried as integers scaled by `2^FIX_BITS`, so the only error is one
/// truncation per term: the alternating series at x = 60 has terms near 1e24 and a
/// sum of order 0.1, which leaves nothing for a fixed-width float.
fn bessel_core(nu: f64, x: f64, weight: impl Fn(usize) -> f64) -> f64 {
    let (xm, xe) = dyadic(x);
    let (qm, qe) = (&xm * &xm, 2 * xe - 2);
    let (num, nue) = dyadic(nu);
    let guard = FIX_BITS as i64 + 64;
    let one = BigInt::one() << FIX_BITS;
    let weighted = |t: &BigInt, k: usize| {
        let (wm, we) = dyadic(weight(k));
        shift(t * wm, we)
    };
    let mut term = one.clone();
    let mut sum = weighted(&term, 0);
    let qsqrt = 0.5 * x;
    for k in 1..=1000usize {
        // k (k + nu) as an exact dyadic with the exponent of nu when that is finer
        let ke = nue.min(0);
        let kn = shift(BigInt::from(k), -ke) + shift(num.clone(), nue - ke);
        let dm = kn * BigInt::from(k);
        let scaled = shift(&term * &qm, guard) / dm;
        term = -shift(scaled, qe - ke - guard);
        let contrib = weighted(&term, k);
        sum += &contrib;
        if term.is_zero() || ((k as f64) > qsqrt + 2.0 && contrib.bits() + 130 < sum.bits().max(FIX_BITS - 20)) {
            break;
        }
    }
    let top = sum.bits() as i64;
    let drop = (top - 64).max(0);
    let mantissa = shift(sum, -drop).to_f64().unwrap_or(0.0);
    mantissa * 2f64.powi((drop - FIX_BITS as i64) as i32)
}

fn check_bessel(nu: f64, x: f64) -> Result<(), SpecFunError> {
    if !(nu > -1.0) {
        return Err(SpecFunError::BesselOrder(nu));
    }
    if !(0.0..=60.0).contains(&x) {
        return Err(SpecFunError::BesselArgument(x));
    }
    Ok(())
}

/// Bessel function of the first kind `J_nu(x)` for `nu > -1`, `0 <= x <= 60`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    check_bessel(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    let pref = (0.5 * x).powf(nu) / gamma_unchecked(nu + 1.0);
    Ok(pref * bessel_core(nu, x, |_| 1.0))
}

/// Derivative `J_nu'(x)`.
///
/// For `nu >= 0` this is `J_{nu-1}(x) - (nu/x) J_nu(x)`; for `-1 < nu < 0` the
/// series is differentiated term by term so that no order below -1 is needed.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    check_bessel(nu, x)?;
    if x == 0.0 {
        return if nu == 1.0 {
            Ok(0.5)
        } else if nu > 1.0 || nu == 0.0 {
            Ok(0.0)
        } else {
            Err(SpecFunError::BesselDerivativeAtZero(nu))
        };
    }
    if nu == 0.0 {
        return Ok(-bessel_j(1.0, x)?);
    }
    if nu > 0.0 {
        return Ok(bessel_j(nu - 1.0, x)? - nu / x * bessel_j(nu, x)?);
    }
    let pref = (0.5 * x).powf(nu) / gamma_unchecked(nu + 1.0) / x;
    Ok(pref * bessel_core(nu, x, |k| 2.0 * k as f64 + nu))
}

/// Krawtchouk polynomial `K_i(x; p, N) = 2F1(-i, -x; -N; 1/p)`, normalized so `K_i(0) = 1`.
pub fn krawtchouk(i: usize, x: usize, p: f64, n: usize) -> Result<f64, SpecFunError> {
    if i > n {
        return Err(SpecFunError::KrawtchoukDegree { i, n });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(SpecFunError::KrawtchoukParameter(p));
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..=i.min(x) {
        if k > 0 {
            let kf = (k - 1) as f64;
            term *= (kf - i as f64) * (kf - x as f64) / ((kf - n as f64) * (kf + 1.0) * p);
        }
        sum += term;
    }
    Ok(sum)
}

/// `arccos x` through `atan2`, accurate near the endpoints.
pub fn arccos(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt().atan2(x)
}

fn on_segment(z: C64) -> bool {
    z.im == 0.0 && z.re.abs() <= 1.0
}

/// `(z^2 - 1)^{1/2}` with the cut on [-1, 1], as the product of principal roots.
pub fn sqrt_z2m1(z: C64) -> C64 {
    (z - 1.0).sqrt() * (z + 1.0).sqrt()
}

/// Conformal map `phi(z) = z + (z^2 - 1)^{1/2}` from the exterior of [-1, 1] onto `|w| > 1`.
pub fn phi_map(z: C64) -> Result<C64, SpecFunError> {
    if on_segment(z) {
        return Err(SpecFunError::OnSegment(z));
    }
    Ok(z + sqrt_z2m1(z))
}

/// `1/phi(z)`, the point of the unit disk used by every Szego evaluator.
pub fn inv_phi(z: C64) -> Result<C64, SpecFunError> {
    Ok(1.0 / phi_map(z)?)
}

/// Boundary values `phi_+-(x) = exp(+- i arccos x)`.
pub fn phi_boundary(x: f64, side: Side) -> Result<C64, SpecFunError> {
    if !(x > -1.0 && x < 1.0) {
        return Err(SpecFunError::OutsideInterval(x));
    }
    Ok(C64::from_polar(1.0, side.sign() * arccos(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchCut {
    /// `(z - 1)^e` with the cut on `(-inf, 1]`.
    LeftOfOne,
    /// `(-1 - z)^e` with the cut on `[-1, inf)`.
    RightOfMinusOne,
    /// `z^e` with the cut on `(-inf, 0]`.
    Principal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub cut: BranchCut,
    pub exponent: f64,
}

impl BranchSpec {
    pub fn new(cut: BranchCut, exponent: f64) -> Self {
        Self { cut, exponent }
    }

    fn base(&self, z: C64) -> C64 {
        match self.cut {
            BranchCut::LeftOfOne => z - 1.0,
            BranchCut::RightOfMinusOne => -1.0 - z,
            BranchCut::Principal => z,
        }
    }

    fn on_cut(&self, z: C64) -> bool {
        if z.im != 0.0 {
            return false;
        }
        match self.cut {
            BranchCut::LeftOfOne => z.re <= 1.0,
            BranchCut::RightOfMinusOne => z.re >= -1.0,
            BranchCut::Principal => z.re <= 0.0,
        }
    }
}

fn cpow(base: C64, e: f64) -> C64 {
    if base == C64::new(0.0, 0.0) {
        return if e == 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    C64::from_polar(base.norm().powf(e), base.arg() * e)
}

/// Fractional power on the given branch; positive where the base is positive.
pub fn branch_pow(z: C64, branch: BranchSpec) -> Result<C64, SpecFunError> {
    if branch.on_cut(z) {
        return Err(SpecFunError::OnCut { z, cut: branch.cut });
    }
    Ok(cpow(branch.base(z), branch.exponent))
}

/// Boundary value of `branch_pow` at a real point of its cut, approached from `side`.
pub fn branch_pow_boundary(x: f64, branch: BranchSpec, side: Side) -> C64 {
    let base = branch.base(C64::new(x, 0.0)).re;
    if base >= 0.0 {
        return C64::new(base.powf(branch.exponent), 0.0);
    }
    // the base's imaginary part has the sign of Im z, flipped for RightOfMinusOne
    let s = match branch.cut {
        BranchCut::RightOfMinusOne => -side.sign(),
        _ => side.sign(),
    };
    C64::from_polar((-base).powf(branch.exponent), s * PI * branch.exponent)
}

/// Principal power of a complex number.
pub fn pow_principal(z: C64, e: f64) -> C64 {
    cpow(z, e)
}
