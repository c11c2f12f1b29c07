//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's special functions.

#![allow(dead_code)]

use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

pub fn t_dist(nu: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, nu).unwrap()
}

/// Upper α-quantile of the standard t law.
pub fn t_quantile(alpha: f64, nu: f64) -> f64 {
    t_dist(nu).inverse_cdf(1.0 - alpha)
}

pub fn t_upper_tail(s: f64, nu: f64) -> f64 {
    t_dist(nu).sf(s)
}

pub fn normal_quantile(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

pub fn normal_pdf(x: f64) -> f64 {
    Normal::standard().pdf(x)
}

pub fn normal_sf(x: f64) -> f64 {
    Normal::standard().sf(x)
}

/// `E[T; T > q] / α` for a standard t law, from the density directly.
pub fn t_es_multiplier(alpha: f64, nu: f64) -> f64 {
    let q = t_quantile(alpha, nu);
    t_dist(nu).pdf(q) * (nu + q * q) / ((nu - 1.0) * alpha)
}

/// Plain bisection for a decreasing function on `[lo, hi]`.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) > target && f(hi) < target, "target not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Upper α-quantile of the scalar mixture `Σ β_j N(0, s_j²)`.
pub fn normal_mixture_quantile(alpha: f64, parts: &[(f64, f64)]) -> f64 {
    let tail = |x: f64| parts.iter().map(|&(b, s)| b * normal_sf(x / s)).sum::<f64>();
    bisect_decreasing(tail, alpha, 0.0, 100.0)
}

/// Upper α-quantile of the scalar mixture `Σ β_j t_{ν_j}` (unit dispersion).
pub fn t_mixture_quantile(alpha: f64, parts: &[(f64, f64)]) -> f64 {
    let tail = |x: f64| parts.iter().map(|&(b, nu)| b * t_upper_tail(x, nu)).sum::<f64>();
    bisect_decreasing(tail, alpha, 0.0, 1e3)
}
