//! Closed forms for the multivariate Student-t family, and the Gaussian
//! generator as its `ν → ∞` limit.
//!
//! The Student density with `ν` degrees of freedom, location `μ` and
//! dispersion `Σ` has generator
//! `g(u) = C(ν, n) (1 + u/ν)^{-(n+ν)/2}` with
//! `C(ν, n) = Γ((ν+n)/2) / (Γ(ν/2) (νπ)^{n/2})`.
//! Its one-dimensional marginal is the standard univariate t law, so the
//! quantile multiplier does not depend on `n`.
//!
//! `Σ` here is always the dispersion matrix of the density. The covariance of
//! the law is `ν/(ν-2)·Σ`; use [`dispersion_from_covariance`] when starting
//! from an estimated covariance.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::elliptic::{
    check_alpha, portfolio_moments, solve_decreasing, DensityGenerator, EllipticModel, GeneratorKind, Normalization,
};
use crate::error::{Error, Result};
use crate::linalg::{check_len, SpdMatrix};
use crate::specfun::{hyp2f1_scaled, log_gamma, reg_inc_beta_pair};

/// `g(u) = (2π)^{-n/2} e^{-u/2}`.
pub fn gaussian_generator(n: usize) -> Result<DensityGenerator> {
    let ln_c = -0.5 * n as f64 * (2.0 * PI).ln();
    DensityGenerator::with_kind(
        n,
        format!("gaussian(n={n})"),
        GeneratorKind::Gaussian,
        Arc::new(move |u: f64| (ln_c - 0.5 * u).exp()),
        Normalization::Validate,
    )
}

/// Student-t generator `C(ν, n)(1 + u/ν)^{-(n+ν)/2}`, built in log space.
pub fn student_generator(n: usize, nu: f64) -> Result<DensityGenerator> {
    check_nu(nu, 0.0)?;
    let nf = n as f64;
    let ln_c = log_gamma(0.5 * (nu + nf))? - log_gamma(0.5 * nu)? - 0.5 * nf * (nu * PI).ln();
    let power = -0.5 * (nf + nu);
    DensityGenerator::with_kind(
        n,
        format!("student(nu={nu}, n={n})"),
        GeneratorKind::Student { nu },
        Arc::new(move |u: f64| (ln_c + power * (u / nu).ln_1p()).exp()),
        Normalization::Validate,
    )
}

fn check_nu(nu: f64, min: f64) -> Result<()> {
    if !(nu > min) || nu.is_nan() {
        return Err(Error::domain(format!("degrees of freedom must exceed {min}, got {nu}")));
    }
    Ok(())
}

/// Upper tail `P(T_ν > s)` for every real `s`, via `½ I_{ν/(ν+s²)}(ν/2, ½)`.
pub(crate) fn t_tail(s: f64, nu: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.5);
    }
    let s2 = s * s;
    let x = nu / (nu + s2);
    let y = s2 / (nu + s2);
    let half = 0.5 * reg_inc_beta_pair(x, y, 0.5 * nu, 0.5)?;
    Ok(if s > 0.0 { half } else { 1.0 - half })
}

/// `G_ν(s)`, the upper-tail probability of the standard univariate t law,
/// through the regularized incomplete beta function.
pub fn student_big_g(s: f64, nu: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("student_big_g requires finite s > 0, got {s}")));
    }
    check_nu(nu, 0.0)?;
    t_tail(s, nu)
}

/// `G_ν(s)` through the hypergeometric closed form
///
/// ```text
/// G_ν(s) = (1/(ν√π)) (ν/s²)^{ν/2} Γ((ν+1)/2)/Γ(ν/2) ₂F₁((1+ν)/2, ν/2; 1+ν/2; -ν/s²)
/// ```
///
/// evaluated in log space: for small `s` and large `ν` the power and the
/// hypergeometric factor individually leave the `f64` range.
pub fn student_big_g_hypergeometric(s: f64, nu: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("student_big_g requires finite s > 0, got {s}")));
    }
    check_nu(nu, 0.0)?;
    let f = hyp2f1_scaled(0.5 * (1.0 + nu), 0.5 * nu, 1.0 + 0.5 * nu, -nu / (s * s))?;
    if !(f.mantissa > 0.0) {
        return Err(Error::Numerical(format!("hypergeometric factor not positive at s={s}, nu={nu}")));
    }
    let ln_g = -nu.ln() - 0.5 * PI.ln() + 0.5 * nu * (nu.ln() - 2.0 * s.ln()) + log_gamma(0.5 * (nu + 1.0))?
        - log_gamma(0.5 * nu)?
        + f.ln();
    Ok(ln_g.exp())
}

/// Positive root of `G_ν(q) = α`.
pub fn student_quantile(alpha: f64, nu: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nu(nu, 0.0)?;
    solve_decreasing(|s| t_tail(s, nu), alpha)
}

/// Scalar `m(α, ν)` with `ES = -δ·μ + m(α, ν)·√(δΣδᵗ)`:
///
/// ```text
/// m(α, ν) = Γ((ν-1)/2) / (2α√π Γ(ν/2)) · ν^{ν/2} (q² + ν)^{-(ν-1)/2},   q = q_{α,ν}.
/// ```
///
/// Requires `ν > 1` (finite mean).
pub fn student_es_multiplier(alpha: f64, nu: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nu(nu, 1.0)?;
    let q = student_quantile(alpha, nu)?;
    es_multiplier_at(q, alpha, nu)
}

pub(crate) fn es_multiplier_at(q: f64, alpha: f64, nu: f64) -> Result<f64> {
    // ν^{ν/2}(q²+ν)^{-(ν-1)/2} = √ν · (1 + q²/ν)^{-(ν-1)/2}
    let ln_m = log_gamma(0.5 * (nu - 1.0))? - log_gamma(0.5 * nu)? - 2f64.ln() - alpha.ln() - 0.5 * PI.ln()
        + 0.5 * nu.ln()
        - 0.5 * (nu - 1.0) * (q * q / nu).ln_1p();
    Ok(ln_m.exp())
}

/// `((ν-2)/ν)·cov`: the dispersion matrix of a Student law with covariance `cov`.
pub fn dispersion_from_covariance(cov: &SpdMatrix, nu: f64) -> Result<SpdMatrix> {
    check_nu(nu, 2.0)?;
    cov.scaled((nu - 2.0) / nu)
}

/// Multivariate Student-t risk-factor model.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentParams {
    nu: f64,
    mu: Vec<f64>,
    sigma: SpdMatrix,
}

impl StudentParams {
    /// `sigma` is the dispersion matrix; requires `ν > 2`.
    pub fn new(nu: f64, mu: Vec<f64>, sigma: SpdMatrix) -> Result<Self> {
        check_nu(nu, 2.0)?;
        check_len(sigma.dim(), mu.len())?;
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::domain("location vector must be finite"));
        }
        Ok(Self { nu, mu, sigma })
    }

    /// Builds the model from a covariance matrix, converting it to dispersion.
    pub fn from_covariance(nu: f64, mu: Vec<f64>, cov: &SpdMatrix) -> Result<Self> {
        Self::new(nu, mu, dispersion_from_covariance(cov, nu)?)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        portfolio_moments(&self.mu, &self.sigma, delta)
    }

    /// The same law as a generic [`EllipticModel`].
    pub fn to_elliptic(&self) -> Result<EllipticModel> {
        EllipticModel::new(self.mu.clone(), self.sigma.clone(), student_generator(self.dim(), self.nu)?)
    }
}

/// Delta-Student VaR `-δ·μ + q_{α,ν}·√(δΣδᵗ)`.
pub fn student_var(params: &StudentParams, delta: &[f64], alpha: f64) -> Result<f64> {
    let (mean, vol) = params.portfolio_moments(delta)?;
    Ok(-mean + student_quantile(alpha, params.nu)? * vol)
}

/// Student expected shortfall `-δ·μ + m(α, ν)·√(δΣδᵗ)`.
pub fn student_es(params: &StudentParams, delta: &[f64], alpha: f64) -> Result<f64> {
    let (mean, vol) = params.portfolio_moments(delta)?;
    Ok(-mean + student_es_multiplier(alpha, params.nu)? * vol)
}
