//! Generic elliptic engine.
//!
//! An elliptic law on `ℝⁿ` has density `|Σ|^{-1/2} g((x-μ)Σ⁻¹(x-μ)ᵗ)` for a
//! radial *density generator* `g`. For a linear portfolio `δ·X` the whole
//! problem collapses onto the first coordinate `Z₁` of the spherical law with
//! generator `g`, whose upper tail is
//!
//! ```text
//! G(s) = P(Z₁ > s) = |S_{n-2}| ∫_s^∞ ∫_0^∞ r^{n-2} g(z² + r²) dr dz,
//! ```
//!
//! and then `VaR_α = -δ·μ + q·√(δΣδᵗ)` with `G(q) = α`.
//!
//! `G` is available through two independent routes (see [`GRoute`]):
//! the nested double integral above, and a single integral against a
//! closed-form kernel obtained by doing the `z` integral analytically:
//!
//! ```text
//! G(s) = ∫_{s²}^∞ K(s, u) g(u) du,
//! K(s, u) = π^{(n-1)/2} / (2Γ((n+1)/2)) · (u - s²)^{(n-1)/2} / s
//!           · ₂F₁(1/2, 1; (n+1)/2; -(u - s²)/s²).
//! ```
//!
//! The hypergeometric argument is on the negative axis. Quantiles are not
//! cached; every call recomputes them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, quadratic_form, SpdMatrix};
use crate::roots::{brent, RootOptions};
use crate::specfun::{hyp2f1, integrate_semi_infinite, log_gamma, QuadratureSpec};

/// Tolerance on the total mass of a density generator.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Known generator families. Only these can be sampled by the Monte Carlo
/// oracle; `Custom` generators go through quadrature only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Gaussian,
    Student { nu: f64 },
    Custom,
}

/// What to do when a user-supplied generator does not integrate to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Reject generators whose mass is off by more than [`NORMALIZATION_TOL`].
    Validate,
    /// Divide `g` by its computed mass.
    Rescale,
}

type RadialFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Radial density function `g` of an `n`-dimensional elliptic law.
#[derive(Clone)]
pub struct DensityGenerator {
    dim: usize,
    name: String,
    kind: GeneratorKind,
    scale: f64,
    g: Arc<RadialFn>,
}

impl fmt::Debug for DensityGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityGenerator")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl DensityGenerator {
    /// Wraps a user-supplied generator `g` for dimension `dim`.
    ///
    /// The total mass `|S_{n-1}|/2 ∫_0^∞ u^{n/2-1} g(u) du` is computed by
    /// quadrature and either checked or divided out according to `norm`.
    pub fn new<F>(dim: usize, name: impl Into<String>, g: F, norm: Normalization) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_kind(dim, name, GeneratorKind::Custom, Arc::new(g), norm)
    }

    pub(crate) fn with_kind(
        dim: usize,
        name: impl Into<String>,
        kind: GeneratorKind,
        g: Arc<RadialFn>,
        norm: Normalization,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("generator dimension must be at least 1"));
        }
        let mut gen = Self { dim, name: name.into(), kind, scale: 1.0, g };
        for u in [0.0, 1.0, 10.0] {
            let v = gen.eval(u);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "generator '{}' must be positive and finite, g({u}) = {v}",
                    gen.name
                )));
            }
        }
        let mass = gen.total_mass(&QuadratureSpec::default())?;
        match norm {
            Normalization::Validate if (mass - 1.0).abs() > NORMALIZATION_TOL => {
                return Err(Error::NotNormalized { name: gen.name, mass });
            }
            Normalization::Validate => {}
            Normalization::Rescale => gen.scale = 1.0 / mass,
        }
        Ok(gen)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// `g(u)`, including any rescaling applied at construction.
    pub fn eval(&self, u: f64) -> f64 {
        self.scale * (self.g)(u)
    }

    /// `π^{n/2}/Γ(n/2) · 2 ∫_0^∞ r^{n-1} g(r²) dr`; one for a valid generator.
    pub fn total_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        let n = self.dim as f64;
        let ln_c = 0.5 * n * PI.ln() - log_gamma(0.5 * n)?;
        let integral = integrate_semi_infinite(|r| r.powi(self.dim as i32 - 1) * self.eval(r * r), 0.0, spec)?;
        Ok(2.0 * ln_c.exp() * integral)
    }
}

/// How [`big_g_with`] evaluates the marginal tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GRoute {
    /// Single integral against the hypergeometric kernel; falls back to the
    /// double integral if the kernel cannot be evaluated.
    #[default]
    Kernel,
    /// Nested quadrature over `(z, r)`.
    DoubleIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineOptions {
    pub route: GRoute,
    pub quadrature: QuadratureSpec,
}

/// `|S_{n-2}| = 2π^{(n-1)/2}/Γ((n-1)/2)`, the area of the unit sphere in `ℝ^{n-1}`.
fn ln_sphere_area_minus(n: usize) -> Result<f64> {
    let h = 0.5 * (n as f64 - 1.0);
    Ok(2f64.ln() + h * PI.ln() - log_gamma(h)?)
}

/// `π^{(n-1)/2} / Γ((n+1)/2)`, the constant shared by the kernel and the
/// tail-expectation integral.
fn ln_tail_const(n: usize) -> Result<f64> {
    let h = 0.5 * (n as f64 - 1.0);
    Ok(h * PI.ln() - log_gamma(h + 1.0)?)
}

/// Kernel `K(s, u)` of the single-integral route, for `s > 0`, `u >= s²`.
pub fn kernel(s: f64, u: f64, n: usize) -> Result<f64> {
    if !(s > 0.0) || u < s * s || n == 0 {
        return Err(Error::domain(format!("kernel requires s > 0, u >= s², n >= 1 (s={s}, u={u}, n={n})")));
    }
    let v2 = u - s * s;
    let h = 0.5 * (n as f64 - 1.0);
    let f = hyp2f1(0.5, 1.0, h + 1.0, -v2 / (s * s))?;
    Ok(0.5 * ln_tail_const(n)?.exp() * v2.powf(h) / s * f)
}

/// `G(s) = P(Z₁ > s)` for the marginal of the spherical law with generator
/// `gen`, using the default route and tolerances.
pub fn big_g(s: f64, gen: &DensityGenerator) -> Result<f64> {
    big_g_with(s, gen, &EngineOptions::default())
}

pub fn big_g_with(s: f64, gen: &DensityGenerator, opts: &EngineOptions) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::domain("G evaluated at NaN"));
    }
    if s == 0.0 {
        return Ok(0.5);
    }
    if s < 0.0 {
        return Ok(1.0 - big_g_with(-s, gen, opts)?);
    }
    if s == f64::INFINITY {
        return Ok(0.0);
    }
    match opts.route {
        GRoute::Kernel => match g_kernel_route(s, gen, &opts.quadrature) {
            Ok(v) => Ok(v),
            Err(Error::Series { .. }) | Err(Error::Numerical(_)) => g_double_route(s, gen, &opts.quadrature),
            Err(e) => Err(e),
        },
        GRoute::DoubleIntegral => g_double_route(s, gen, &opts.quadrature),
    }
}

fn g_kernel_route(s: f64, gen: &DensityGenerator, spec: &QuadratureSpec) -> Result<f64> {
    let n = gen.dim();
    let c = 0.5 * ln_tail_const(n)?.exp();
    let h = 0.5 * (n as f64 - 1.0);
    let s2 = s * s;
    let fail = std::cell::Cell::new(None);
    // u = s² + v² removes the (u - s²)^{(n-1)/2} endpoint behaviour.
    let integrand = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        let v2 = v * v;
        match hyp2f1(0.5, 1.0, h + 1.0, -v2 / s2) {
            Ok(f) => 2.0 * c * v.powi(n as i32) / s * f * gen.eval(s2 + v2),
            Err(e) => {
                fail.set(Some(e));
                f64::NAN
            }
        }
    };
    let result = integrate_semi_infinite(integrand, 0.0, spec);
    if let Some(e) = fail.take() {
        return Err(e);
    }
    result
}

fn g_double_route(s: f64, gen: &DensityGenerator, spec: &QuadratureSpec) -> Result<f64> {
    let n = gen.dim();
    if n == 1 {
        return integrate_semi_infinite(|z| gen.eval(z * z), s, spec);
    }
    let area = ln_sphere_area_minus(n)?.exp();
    let inner_spec = spec.tightened(1e-2);
    let fail = std::cell::Cell::new(None);
    let marginal = |z: f64| {
        let z2 = z * z;
        match integrate_semi_infinite(|r| r.powi(n as i32 - 2) * gen.eval(z2 + r * r), 0.0, &inner_spec) {
            Ok(v) => area * v,
            Err(e) => {
                fail.set(Some(e));
                f64::NAN
            }
        }
    };
    let result = integrate_semi_infinite(marginal, s, spec);
    if let Some(e) = fail.take() {
        return Err(e);
    }
    result
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::domain(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    Ok(())
}

/// Largest number of bracket doublings tried before giving up on the tail.
const MAX_DOUBLINGS: usize = 60;

/// Positive root `q` of `G(q) = α` for a generic generator.
pub fn solve_quantile(alpha: f64, gen: &DensityGenerator) -> Result<f64> {
    solve_quantile_with(alpha, gen, &EngineOptions::default())
}

pub fn solve_quantile_with(alpha: f64, gen: &DensityGenerator, opts: &EngineOptions) -> Result<f64> {
    check_alpha(alpha)?;
    solve_decreasing(|s| big_g_with(s, gen, opts), alpha)
}

/// Solves `tail(q) = α` for a tail function with `tail(0) = 1/2`, expanding
/// the upper end of the bracket geometrically from 1.
pub(crate) fn solve_decreasing<F>(mut tail: F, alpha: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut g_hi = tail(hi)?;
    let mut doublings = 0;
    while g_hi >= alpha {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::DistributionTail { upper: hi, value: g_hi, target: alpha });
        }
        lo = hi;
        hi *= 2.0;
        g_hi = tail(hi)?;
        doublings += 1;
    }
    let opts = RootOptions { x_tol: 1e-12, f_tol: 0.0, max_iter: 200 };
    brent(|s| Ok(tail(s)? - alpha), lo, hi, &opts)
}

/// `E[Z₁ · 1{Z₁ > t}]` for the standardized marginal:
/// `π^{(n-1)/2}/(2Γ((n+1)/2)) ∫_{t²}^∞ (u - t²)^{(n-1)/2} g(u) du`.
/// Depends on `t` only through `t²`.
pub fn tail_expectation(t: f64, gen: &DensityGenerator) -> Result<f64> {
    tail_expectation_with(t, gen, &QuadratureSpec::default())
}

pub fn tail_expectation_with(t: f64, gen: &DensityGenerator, spec: &QuadratureSpec) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::domain("tail expectation threshold must be finite"));
    }
    if let GeneratorKind::Student { nu } = gen.kind() {
        if nu <= 1.0 {
            return Err(Error::InfiniteExpectedShortfall(format!(
                "Student generator with nu = {nu} has no finite mean"
            )));
        }
    }
    let n = gen.dim() as i32;
    let t2 = t * t;
    // u = t² + v²: (u - t²)^{(n-1)/2} du = 2 v^n dv.
    let integrand = |v: f64| v.powi(n) * gen.eval(t2 + v * v);
    if diverges(&integrand) {
        return Err(Error::InfiniteExpectedShortfall(format!(
            "tail integral of generator '{}' does not converge",
            gen.name()
        )));
    }
    let c = ln_tail_const(gen.dim())?.exp();
    match integrate_semi_infinite(integrand, 0.0, spec) {
        Ok(v) => Ok(c * v),
        Err(Error::Quadrature { estimate, error, .. }) => Err(Error::InfiniteExpectedShortfall(format!(
            "tail integral failed to converge (estimate {estimate:e}, error {error:e})"
        ))),
        Err(e) => Err(e),
    }
}

/// Heuristic divergence test for `∫^∞ f`: `v·f(v)` must keep shrinking.
fn diverges<F: Fn(f64) -> f64>(f: &F) -> bool {
    let a = 1e4 * f(1e4);
    let b = 1e8 * f(1e8);
    a > 0.0 && b >= 0.1 * a
}

/// An elliptic law `N(μ, Σ, g)` for the risk-factor returns.
#[derive(Debug, Clone)]
pub struct EllipticModel {
    mu: Vec<f64>,
    sigma: SpdMatrix,
    generator: DensityGenerator,
}

impl EllipticModel {
    pub fn new(mu: Vec<f64>, sigma: SpdMatrix, generator: DensityGenerator) -> Result<Self> {
        check_len(sigma.dim(), mu.len())?;
        check_len(sigma.dim(), generator.dim())?;
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::domain("location vector must be finite"));
        }
        Ok(Self { mu, sigma, generator })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn generator(&self) -> &DensityGenerator {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `(δ·μ, √(δΣδᵗ))` for a nonzero portfolio.
    pub fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        portfolio_moments(&self.mu, &self.sigma, delta)
    }

    pub fn var(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        var(self, delta, alpha)
    }

    pub fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        expected_shortfall(self, delta, alpha)
    }
}

pub(crate) fn portfolio_moments(mu: &[f64], sigma: &SpdMatrix, delta: &[f64]) -> Result<(f64, f64)> {
    check_len(mu.len(), delta.len())?;
    if delta.iter().all(|d| *d == 0.0) {
        return Err(Error::ZeroPortfolio);
    }
    if delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::domain("portfolio weights must be finite"));
    }
    Ok((dot(delta, mu), quadratic_form(delta, sigma)?.sqrt()))
}

/// Delta-elliptic VaR, `-δ·μ + q·√(δΣδᵗ)`, reported as a positive loss.
pub fn var(model: &EllipticModel, delta: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (mean, vol) = model.portfolio_moments(delta)?;
    let q = solve_quantile(alpha, &model.generator)?;
    Ok(-mean + q * vol)
}

/// Expected shortfall `-δ·μ + √(δΣδᵗ) · E[Z₁; Z₁ > q] / α`.
pub fn expected_shortfall(model: &EllipticModel, delta: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (mean, vol) = model.portfolio_moments(delta)?;
    let q = solve_quantile(alpha, &model.generator)?;
    let tail = tail_expectation(q, &model.generator)?;
    Ok(-mean + vol * tail / alpha)
}
