//! Special functions and quadrature.
//!
//! Everything here is a pure function of its arguments. Gamma-ratio
//! constants used elsewhere in the crate are assembled from [`log_gamma`] in
//! log space and exponentiated last, because several of them overflow `f64`
//! long before the final ratio does (the Student ES constant near ν ≈ 150,
//! the hypergeometric prefactor of the Student tail for small `s`).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum away from its pole.
        return lanczos_ln_gamma(x + 1.0) - x.ln();
    }
    lanczos_ln_gamma(x)
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// `(ln |Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
/// Returns `None` at the poles `x = 0, -1, -2, ...`, where `1/Γ` vanishes.
fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return Some((ln_gamma_pos(x), 1.0));
    }
    if x == x.floor() {
        return None;
    }
    // Reflection: Γ(x) Γ(1 - x) = π / sin(πx).
    let s = (PI * x).sin();
    Some((PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x), s.signum()))
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Euler beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(f64::exp)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("reg_inc_beta requires 0 <= x <= 1, got {x}")));
    }
    reg_inc_beta_pair(x, 1.0 - x, a, b)
}

/// `I_x(a, b)` with the complement `y = 1 - x` supplied separately, so callers
/// that know `y` more accurately than `1 - x` (e.g. `s²/(ν+s²)` for small `s`)
/// keep full relative precision.
pub(crate) fn reg_inc_beta_pair(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "reg_inc_beta requires finite a, b > 0, got a={a}, b={b}"
        )));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        return Ok(1.0 - inc_beta_cf(y, x, b, a)?);
    }
    inc_beta_cf(x, y, a, b)
}

/// Continued-fraction evaluation (modified Lentz), valid for `x < (a+1)/(a+b+2)`.
fn inc_beta_cf(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 20_000;

    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b)?;
    let front = ln_front.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            return Ok(front * h);
        }
    }
    Err(Error::Series {
        terms: MAX_ITER,
        partial_sum: front * h,
        last_term: f64::NAN,
    })
}

/// A real number stored as `mantissa · exp(ln_scale)`, for hypergeometric
/// values whose prefactors leave the `f64` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }

    /// Natural log of the value; the value must be positive.
    pub fn ln(self) -> f64 {
        self.mantissa.ln() + self.ln_scale
    }

    fn add(self, other: Scaled) -> Scaled {
        if self.mantissa == 0.0 {
            return other;
        }
        if other.mantissa == 0.0 {
            return self;
        }
        let top = self.ln_scale.max(other.ln_scale);
        Scaled {
            mantissa: self.mantissa * (self.ln_scale - top).exp()
                + other.mantissa * (other.ln_scale - top).exp(),
            ln_scale: top,
        }
    }
}

const HYP_TOL: f64 = 1e-15;
const HYP_MAX_TERMS: usize = 2_000_000;

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` on the negative real axis.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_scaled(a, b, c, z).map(Scaled::value)
}

/// [`hyp2f1`] returned in scaled form.
///
/// When `a > 0` and `c > b` the Pfaff transformation
/// `(1-z)^{-a} ₂F₁(a, c-b; c; z/(z-1))` has only positive terms and is used
/// whenever its term count (on the order of `|z|`) fits the budget. Other
/// parameters sum the defining series on `[-1/2, 0]`, the Pfaff series on
/// `[-1, -1/2)`, and for `z < -1` the two `1/(1-z)` connection series when
/// `a - b` is not an integer.
pub fn hyp2f1_scaled(a: f64, b: f64, c: f64, z: f64) -> Result<Scaled> {
    if ![a, b, c, z].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("hyp2f1 arguments must be finite"));
    }
    if c <= 0.0 && c == c.floor() {
        return Err(Error::domain(format!("hyp2f1: c = {c} is a non-positive integer")));
    }
    if z > 0.0 {
        return Err(Error::domain(format!("hyp2f1 is implemented for z <= 0 only, got {z}")));
    }
    if z == 0.0 {
        return Ok(Scaled { mantissa: 1.0, ln_scale: 0.0 });
    }
    let ln_1mz = (-z).ln_1p();
    let d = a - b;
    // With a > 0 and c > b every Pfaff term is positive, so that series is
    // well conditioned and needs about (1 - z) terms per decade. The direct
    // series alternates and the connection formula can cancel badly once a
    // and b are both large.
    let positive_terms = a > 0.0 && c - b > 0.0;
    let pfaff_affordable = (1.0 - z) * (40.0 + d.max(0.0)) <= HYP_MAX_TERMS as f64;
    if !(positive_terms && pfaff_affordable) {
        if z >= -0.5 {
            return Ok(Scaled { mantissa: hyp_series(a, b, c, z, HYP_MAX_TERMS)?, ln_scale: 0.0 });
        }
        if z < -1.0 && (d - d.round()).abs() > 1e-6 {
            return hyp_reciprocal(a, b, c, z, ln_1mz);
        }
    }
    let w = z / (z - 1.0);
    let s = hyp_series(a, c - b, c, w, HYP_MAX_TERMS)?;
    Ok(Scaled { mantissa: s, ln_scale: -a * ln_1mz })
}

/// Pfaff-transformed evaluation, exposed so the direct series and the
/// transformation can be checked against each other on `(-1, 0]`.
pub fn hyp2f1_pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(-1.0..=0.0).contains(&z) {
        return Err(Error::domain("hyp2f1_pfaff expects z in [-1, 0]"));
    }
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * hyp_series(a, c - b, c, w, HYP_MAX_TERMS)?)
}

/// The defining power series, for `|z| < 1`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z.abs() >= 1.0 {
        return Err(Error::domain("hyp2f1_series expects |z| < 1"));
    }
    hyp_series(a, b, c, z, HYP_MAX_TERMS)
}

fn hyp_series(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    // Kahan compensation: near z = 1 the series runs to ~10^6 terms.
    let mut comp = 0.0;
    for k in 0..max_terms {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            return Ok(sum);
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() <= HYP_TOL * sum.abs() && ratio.abs() < 1.0 {
            // Geometric tail bound: remaining terms are below term·r/(1-r).
            let r = ratio.abs();
            if term.abs() * r / (1.0 - r) <= HYP_TOL * sum.abs() {
                return Ok(sum);
            }
        }
    }
    Err(Error::Series {
        terms: max_terms,
        partial_sum: sum,
        last_term: term,
    })
}

/// `₂F₁` for `z < -1` through the `1/(1-z)` connection formula:
///
/// ```text
/// F = Γ(c)Γ(b-a)/(Γ(b)Γ(c-a)) (1-z)^{-a} F(a, c-b; a-b+1; 1/(1-z))
///   + Γ(c)Γ(a-b)/(Γ(a)Γ(c-b)) (1-z)^{-b} F(b, c-a; b-a+1; 1/(1-z))
/// ```
fn hyp_reciprocal(a: f64, b: f64, c: f64, z: f64, ln_1mz: f64) -> Result<Scaled> {
    let x = 1.0 / (1.0 - z);
    let term = |p: f64, q: f64| -> Result<Scaled> {
        // p plays the role of `a` in the first term, q of `b`.
        let num = [ln_gamma_signed(c), ln_gamma_signed(q - p)];
        let den = [ln_gamma_signed(q), ln_gamma_signed(c - p)];
        // A pole in the denominator means 1/Γ = 0 and the term vanishes.
        if den.iter().any(Option::is_none) {
            return Ok(Scaled { mantissa: 0.0, ln_scale: 0.0 });
        }
        let (Some(n0), Some(n1)) = (num[0], num[1]) else {
            return Err(Error::Numerical("hyp2f1: degenerate connection coefficient".into()));
        };
        let (d0, d1) = (den[0].unwrap(), den[1].unwrap());
        let ln_coef = n0.0 + n1.0 - d0.0 - d1.0;
        let sign = n0.1 * n1.1 * d0.1 * d1.1;
        let s = hyp_series(p, c - q, p - q + 1.0, x, HYP_MAX_TERMS)?;
        Ok(Scaled { mantissa: sign * s, ln_scale: ln_coef - p * ln_1mz })
    };
    Ok(term(a, b)?.add(term(b, a)?))
}

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self { rel_tol, abs_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be strictly positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Same spec with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

// 15-point Kronrod nodes (positive half) and weights, with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Numerical(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Adaptive Gauss–Kronrod (7/15) integration over a finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let first = gauss_kronrod(&f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    // Panels too narrow to split further are parked here.
    let mut frozen_err = 0.0;
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        let Some(worst) = heap.pop() else {
            // Only unsplittable panels remain: accept if roundoff-limited.
            if frozen_err <= 100.0 * tol {
                return Ok(total);
            }
            break;
        };
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b)
            || (worst.b - worst.a).abs() <= 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
        {
            frozen_err += worst.error;
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid)?;
        let right = gauss_kronrod(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // Recompute sums to shed accumulated update error before reporting.
    let value: f64 = heap.iter().map(|p| p.value).sum::<f64>();
    let error: f64 = heap.iter().map(|p| p.error).sum::<f64>() + frozen_err;
    Err(Error::Quadrature {
        estimate: if heap.is_empty() { total } else { value },
        error,
        subdivisions,
    })
}

/// `∫_lower^∞ f(u) du`.
///
/// Splits at `lower + 1`: the head is integrated directly and the tail
/// through `u = lower + 1/s` on `s ∈ (0, 1]`. An algebraic tail `u^{-p}`
/// becomes an endpoint singularity at `s = 0`, where floating point can
/// still resolve the small panels that adaptive bisection needs.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !lower.is_finite() {
        return Err(Error::domain("lower limit must be finite"));
    }
    let half = QuadratureSpec { abs_tol: 0.5 * spec.abs_tol, ..*spec };
    let head = integrate(&f, lower, lower + 1.0, &half)?;
    let tail = integrate(
        |s: f64| {
            let u = lower + 1.0 / s;
            if !u.is_finite() {
                return 0.0;
            }
            let v = f(u);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        &half,
    )?;
    Ok(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!((log_gamma(2.0).unwrap()).abs() < 1e-15);
        assert!(close(log_gamma(0.5).unwrap(), 0.5 * PI.ln(), 1e-15));
        // ln(49!) by direct summation.
        let brute: f64 = (1..50).map(|k| (k as f64).ln()).sum();
        assert!(close(log_gamma(50.0).unwrap(), brute, 1e-14));
    }

    #[test]
    fn log_gamma_small_and_large() {
        // Γ(x) ~ 1/x - γ for small x.
        let x: f64 = 1e-3;
        let expected = (1.0 / x - 0.577_215_664_901_532_9 + 0.989_055_995_327_972_6 * x).ln();
        assert!(close(log_gamma(x).unwrap(), expected, 1e-9));
        // Stirling series at 1e6.
        let x: f64 = 1e6;
        let stirling = (x - 0.5) * x.ln() - x + LN_SQRT_2PI + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3));
        assert!(close(log_gamma(x).unwrap(), stirling, 1e-15));
    }

    #[test]
    fn log_gamma_rejects_bad_input() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn signed_gamma_reflection() {
        // Γ(-1/2) = -2√π
        let (l, s) = ln_gamma_signed(-0.5).unwrap();
        assert!(close(s * l.exp(), -2.0 * PI.sqrt(), 1e-14));
        assert!(ln_gamma_signed(-2.0).is_none());
        assert!(ln_gamma_signed(0.0).is_none());
    }

    #[test]
    fn beta_values() {
        assert!(close(beta(1.0, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(beta(0.5, 0.5).unwrap(), PI, 1e-14));
        // 2!·1!/4!
        assert!(close(beta(3.0, 2.0).unwrap(), 1.0 / 12.0, 1e-14));
    }

    #[test]
    fn incomplete_beta_values() {
        assert_eq!(reg_inc_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        assert!(close(reg_inc_beta(0.5, 1.0, 1.0).unwrap(), 0.5, 1e-15));
        // Σ_{j=2}^{4} C(4,j) 2^-4 = 11/16
        assert!(close(reg_inc_beta(0.5, 2.0, 3.0).unwrap(), 0.6875, 1e-14));
        assert!(matches!(reg_inc_beta(1.5, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(reg_inc_beta(-0.1, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(reg_inc_beta(0.5, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn incomplete_beta_matches_binomial_tail() {
        // For integer a, b: I_x(a, b) = P(Binomial(a+b-1, x) >= a).
        let binom = |n: u32, k: u32| -> f64 {
            (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
        };
        for &(a, b) in &[(1u32, 5u32), (3, 7), (10, 4), (20, 20)] {
            let n = a + b - 1;
            for &x in &[0.05f64, 0.3, 0.5, 0.77, 0.99] {
                let tail: f64 = (a..=n)
                    .map(|j| binom(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
                    .sum();
                let got = reg_inc_beta(x, a as f64, b as f64).unwrap();
                assert!((got - tail).abs() < 1e-13, "a={a} b={b} x={x}: {got} vs {tail}");
            }
        }
    }

    #[test]
    fn hyp2f1_identities() {
        assert_eq!(hyp2f1(0.3, 1.7, 2.2, 0.0).unwrap(), 1.0);
        // ₂F₁(1,1;2;z) = -ln(1-z)/z
        for &z in &[-0.3f64, -1.0, -4.0, -250.0] {
            let expected = -(1.0 - z).ln() / z;
            assert!(close(hyp2f1(1.0, 1.0, 2.0, z).unwrap(), expected, 1e-13), "z={z}");
        }
        assert!(close(hyp2f1(1.0, 1.0, 2.0, -1.0).unwrap(), 2f64.ln(), 1e-14));
    }

    #[test]
    fn hyp2f1_against_euler_integral() {
        // b=1, c=2: ₂F₁(a,1;2;z) = ∫_0^1 (1 - z t)^{-a} dt, closed form for a=1.5.
        let z: f64 = -2.5;
        let expected = 0.8 * (1.0 - (1.0 - z).powf(-0.5));
        assert!(close(hyp2f1(1.5, 1.0, 2.0, z).unwrap(), expected, 1e-13));
    }

    #[test]
    fn hyp2f1_far_negative_axis() {
        // ₂F₁(a, b; b; z) = (1 - z)^{-a}
        for &z in &[-3.0, -1e3, -1e6] {
            let got = hyp2f1(0.7, 2.5, 2.5, z).unwrap();
            let expected = (1.0 - z).powf(-0.7);
            assert!(close(got, expected, 1e-12), "z={z}: {got} vs {expected}");
        }
        // ₂F₁(1/2, 1; 3/2; -x²) = atan(x)/x
        for &x in &[2.0f64, 30.0, 1e4] {
            let got = hyp2f1(0.5, 1.0, 1.5, -x * x).unwrap();
            assert!(close(got, x.atan() / x, 1e-13), "x={x}");
        }
    }

    #[test]
    fn hyp2f1_integer_gap_fallback() {
        // a - b integer routes through the long Pfaff series: ₂F₁(1,1;2;z) at z = -50.
        let z: f64 = -50.0;
        let got = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
        assert!(close(got, -(1.0 - z).ln() / z, 1e-12));
    }

    #[test]
    fn hyp2f1_domain_errors() {
        assert!(matches!(hyp2f1(1.0, 1.0, -2.0, -0.5), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, 2.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn series_and_pfaff_agree_on_overlap() {
        let params = [(0.5, 1.0, 1.5), (1.5, 2.5, 3.5), (5.5, 5.0, 6.0), (0.3, -0.7, 2.2)];
        for &(a, b, c) in &params {
            for i in 0..=18 {
                let z = -(i as f64) * 0.05;
                let s = hyp2f1_series(a, b, c, z).unwrap();
                let p = hyp2f1_pfaff(a, b, c, z).unwrap();
                assert!((s - p).abs() <= 1e-11 * s.abs().max(1.0), "({a},{b},{c}) z={z}: {s} vs {p}");
            }
        }
    }

    #[test]
    fn semi_infinite_basic_integrals() {
        let spec = QuadratureSpec::default();
        let v = integrate_semi_infinite(|u| (-u).exp(), 0.0, &spec).unwrap();
        assert!(close(v, 1.0, 1e-10));
        let v = integrate_semi_infinite(|u| u.powi(-2), 1.0, &spec).unwrap();
        assert!(close(v, 1.0, 1e-10));
    }

    #[test]
    fn semi_infinite_beta_integral() {
        // ∫_0^∞ u^{3/2}(1+u/5)^{-5} du = 5^{5/2} B(5/2, 5/2) = 5^{5/2} · 3π/128
        let spec = QuadratureSpec::default();
        let v = integrate_semi_infinite(|u| u.powf(1.5) * (1.0 + u / 5.0).powi(-5), 0.0, &spec).unwrap();
        let expected = 5f64.powf(2.5) * 3.0 * PI / 128.0;
        assert!(close(v, expected, 1e-10), "{v} vs {expected}");
    }

    #[test]
    fn quadrature_reports_failure() {
        let spec = QuadratureSpec::new(1e-12, 1e-300, 5).unwrap();
        let err = integrate(|x: f64| (50.0 * x).sin().abs().sqrt(), 0.0, 10.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Quadrature { subdivisions: 5, .. }));
    }

    #[test]
    fn quadrature_spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-14, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-14, 0).is_err());
    }
}
