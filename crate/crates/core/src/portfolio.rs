//! Linear portfolios: delta equivalents, risk reports and incremental VaR.
//!
//! Sign convention: VaR and ES are reported as positive losses, and the
//! gradient `γ_i = ∂VaR/∂δ_i` is positive for positions that add risk. With
//! that orientation `IVaR_i = δ_i γ_i` and, VaR being homogeneous of degree
//! one in `δ`, `Σ_i IVaR_i = VaR`.

use serde::{Deserialize, Serialize};

use crate::elliptic::{check_alpha, solve_quantile, EllipticModel};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, SpdMatrix};
use crate::mixture::MixtureModel;
use crate::student::{student_quantile, StudentParams};

/// A derivative or cash position linearized around its current spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub spot: f64,
    #[serde(rename = "dVdX")]
    pub dvdx: f64,
}

/// `δ_i = X_i · ∂V/∂X_i`, so that `ΔV ≈ δ·r` for small returns `r`.
pub fn delta_equivalents(positions: &[Position]) -> Result<Vec<f64>> {
    if positions.is_empty() {
        return Err(Error::domain("no positions"));
    }
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if !(p.spot > 0.0 && p.spot.is_finite()) {
                return Err(Error::domain(format!("position {i}: spot must be positive, got {}", p.spot)));
            }
            if !p.dvdx.is_finite() {
                return Err(Error::domain(format!("position {i}: sensitivity is not finite")));
            }
            Ok(p.spot * p.dvdx)
        })
        .collect()
}

/// Money weights `w_i S_i(0)` of an equity portfolio given `(shares, price)`.
pub fn equity_weights(holdings: &[(f64, f64)]) -> Result<Vec<f64>> {
    if holdings.is_empty() {
        return Err(Error::domain("no holdings"));
    }
    holdings
        .iter()
        .enumerate()
        .map(|(i, &(shares, price))| {
            if !(price > 0.0 && price.is_finite()) {
                return Err(Error::domain(format!("holding {i}: price must be positive, got {price}")));
            }
            if !shares.is_finite() {
                return Err(Error::domain(format!("holding {i}: share count is not finite")));
            }
            Ok(shares * price)
        })
        .collect()
}

/// A firm viewed as the sum of its business units: `δ = (1, …, 1)`.
pub fn business_unit_portfolio(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("need at least one business unit"));
    }
    Ok(vec![1.0; n])
}

/// Labelled sensitivity vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    ids: Vec<String>,
    delta: Vec<f64>,
}

impl Portfolio {
    pub fn new(ids: Vec<String>, delta: Vec<f64>) -> Result<Self> {
        check_len(ids.len(), delta.len())?;
        if delta.is_empty() {
            return Err(Error::domain("empty portfolio"));
        }
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::domain("portfolio sensitivities must be finite"));
        }
        if delta.iter().all(|&d| d == 0.0) {
            return Err(Error::ZeroPortfolio);
        }
        Ok(Self { ids, delta })
    }

    /// Unlabelled instruments get ids `x1, x2, …`.
    pub fn from_delta(delta: Vec<f64>) -> Result<Self> {
        let ids = (1..=delta.len()).map(|i| format!("x{i}")).collect();
        Self::new(ids, delta)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn report<M: RiskModel + ?Sized>(&self, model: &M, alpha: f64) -> Result<RiskReport> {
        check_len(model.dim(), self.len())?;
        model.report(&self.delta, alpha)
    }

    pub fn incremental_var<M: RiskModel + ?Sized>(&self, model: &M, alpha: f64) -> Result<IncrementalVar> {
        check_len(model.dim(), self.len())?;
        incremental_var(model, &self.delta, alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub model: String,
    pub alpha: f64,
    pub var: f64,
    pub es: f64,
    /// Quantile multiplier `q` with `var = -mean + q * volatility`.
    pub quantile: f64,
    /// `δ·μ`
    pub mean: f64,
    /// `√(δΣδᵗ)`
    pub volatility: f64,
}

impl RiskReport {
    pub fn new(model: impl Into<String>, alpha: f64, var: f64, es: f64, mean: f64, volatility: f64) -> Result<Self> {
        if !(volatility > 0.0 && volatility.is_finite()) {
            return Err(Error::ZeroPortfolio);
        }
        if !(var.is_finite() && es.is_finite()) {
            return Err(Error::Numerical(format!("non-finite risk figures: var={var}, es={es}")));
        }
        // Allow for rounding when ES and VaR coincide (degenerate tails).
        if es < var - 1e-12 * var.abs() {
            return Err(Error::Numerical(format!("expected shortfall {es} below VaR {var}")));
        }
        Ok(Self {
            model: model.into(),
            alpha,
            var,
            es,
            quantile: (var + mean) / volatility,
            mean,
            volatility,
        })
    }
}

/// Anything that prices the tail of a linear portfolio.
pub trait RiskModel {
    fn label(&self) -> String;

    fn dim(&self) -> usize;

    /// Portfolio mean and volatility scale `(δ·μ, √(δΣδᵗ))`. For mixtures
    /// these are β-weighted (see [`MixtureModel::portfolio_moments`]).
    fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)>;

    fn var(&self, delta: &[f64], alpha: f64) -> Result<f64>;

    fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64>;

    /// `∂VaR/∂δ`. The default is a central difference with step `1e-6·‖δ‖`.
    fn var_gradient(&self, delta: &[f64], alpha: f64) -> Result<Vec<f64>> {
        central_difference(|d| self.var(d, alpha), delta)
    }

    fn report(&self, delta: &[f64], alpha: f64) -> Result<RiskReport> {
        let (mean, vol) = self.portfolio_moments(delta)?;
        let var = self.var(delta, alpha)?;
        let es = self.expected_shortfall(delta, alpha)?;
        RiskReport::new(self.label(), alpha, var, es, mean, vol)
    }
}

pub(crate) fn central_difference<F>(mut f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroPortfolio);
    }
    let h = 1e-6 * norm;
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// `γ = -μ + q Σδᵗ / √(δΣδᵗ)`.
fn elliptic_gradient(mu: &[f64], sigma: &SpdMatrix, delta: &[f64], q: f64) -> Result<Vec<f64>> {
    let sd = sigma.mul_vec(delta)?;
    let vol = dot(delta, &sd).sqrt();
    if vol == 0.0 {
        return Err(Error::ZeroPortfolio);
    }
    Ok(sd.iter().zip(mu).map(|(s, m)| q * s / vol - m).collect())
}

impl RiskModel for EllipticModel {
    fn label(&self) -> String {
        self.generator().name().to_string()
    }

    fn dim(&self) -> usize {
        EllipticModel::dim(self)
    }

    fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        EllipticModel::portfolio_moments(self, delta)
    }

    fn var(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        EllipticModel::var(self, delta, alpha)
    }

    fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        EllipticModel::expected_shortfall(self, delta, alpha)
    }

    fn var_gradient(&self, delta: &[f64], alpha: f64) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        check_len(self.dim(), delta.len())?;
        let q = solve_quantile(alpha, self.generator())?;
        elliptic_gradient(self.mu(), self.sigma(), delta, q)
    }
}

impl RiskModel for StudentParams {
    fn label(&self) -> String {
        format!("student(nu={})", self.nu())
    }

    fn dim(&self) -> usize {
        StudentParams::dim(self)
    }

    fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        StudentParams::portfolio_moments(self, delta)
    }

    fn var(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        crate::student::student_var(self, delta, alpha)
    }

    fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        crate::student::student_es(self, delta, alpha)
    }

    fn var_gradient(&self, delta: &[f64], alpha: f64) -> Result<Vec<f64>> {
        check_len(self.dim(), delta.len())?;
        let q = student_quantile(alpha, self.nu())?;
        elliptic_gradient(self.mu(), self.sigma(), delta, q)
    }
}

impl RiskModel for MixtureModel {
    fn label(&self) -> String {
        let parts: Vec<String> = self
            .components()
            .iter()
            .map(|c| format!("{}*{}", c.weight, c.model.generator().name()))
            .collect();
        format!("mixture({})", parts.join(" + "))
    }

    fn dim(&self) -> usize {
        MixtureModel::dim(self)
    }

    fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        MixtureModel::portfolio_moments(self, delta)
    }

    fn var(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        MixtureModel::var(self, delta, alpha)
    }

    fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        MixtureModel::expected_shortfall(self, delta, alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalVar {
    pub var: f64,
    /// `∂VaR/∂δ_i`
    pub gamma: Vec<f64>,
    /// `δ_i γ_i`; sums to `var`.
    pub ivar: Vec<f64>,
}

pub fn incremental_var<M: RiskModel + ?Sized>(model: &M, delta: &[f64], alpha: f64) -> Result<IncrementalVar> {
    let var = model.var(delta, alpha)?;
    let gamma = model.var_gradient(delta, alpha)?;
    let ivar = delta.iter().zip(&gamma).map(|(d, g)| d * g).collect();
    Ok(IncrementalVar { var, gamma, ivar })
}
