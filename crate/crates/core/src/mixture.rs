//! Convex mixtures of elliptic laws.
//!
//! For a mixture `Σ β_j N(μ_j, Σ_j, g_j)` the loss threshold `v` solves
//!
//! ```text
//! α = Σ_j β_j G_j((δ·μ_j + v) / √(δΣ_jδᵗ)),
//! ```
//!
//! whose right side is strictly decreasing in `v`. Every component VaR
//! `v_j` satisfies `G_j(t_j(v_j)) = α`, so the mixture root always lies in
//! `[min_j v_j, max_j v_j]`, which gives the initial bracket.
//!
//! Expected shortfall follows by linearity: with `t_j = (δ·μ_j + VaR)/vol_j`,
//!
//! ```text
//! ES = (1/α) Σ_j β_j [ -δ·μ_j G_j(t_j) + vol_j E_j[Z; Z > |t_j|] ].
//! ```

use crate::elliptic::{big_g, check_alpha, solve_quantile, tail_expectation, EllipticModel};
use crate::error::{Error, Result};
use crate::linalg::check_len;
use crate::roots::{brent, RootOptions};

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MixtureComponent {
    pub weight: f64,
    pub model: EllipticModel,
}

#[derive(Debug, Clone)]
pub struct MixtureModel {
    components: Vec<MixtureComponent>,
}

impl MixtureModel {
    pub fn new(components: Vec<(f64, EllipticModel)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::domain("a mixture needs at least one component"));
        };
        let dim = first.dim();
        let mut total = 0.0;
        for (j, (w, model)) in components.iter().enumerate() {
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(Error::domain(format!("component {j} weight must lie in (0, 1], got {w}")));
            }
            check_len(dim, model.dim())?;
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::domain(format!("mixture weights must sum to 1, got {total}")));
        }
        Ok(Self {
            components: components
                .into_iter()
                .map(|(weight, model)| MixtureComponent { weight, model })
                .collect(),
        })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components[0].model.dim()
    }

    pub fn var(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        mixture_var(self, delta, alpha)
    }

    pub fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        mixture_es(self, delta, alpha)
    }

    /// Weighted portfolio mean `Σβ_j δ·μ_j` and `√(Σβ_j δΣ_jδᵗ)`.
    pub fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        let mut mean = 0.0;
        let mut var = 0.0;
        for c in &self.components {
            let (m, v) = c.model.portfolio_moments(delta)?;
            mean += c.weight * m;
            var += c.weight * v * v;
        }
        Ok((mean, var.sqrt()))
    }
}

struct Prepared<'a> {
    weight: f64,
    mean: f64,
    vol: f64,
    model: &'a EllipticModel,
}

fn prepare<'a>(mix: &'a MixtureModel, delta: &[f64]) -> Result<Vec<Prepared<'a>>> {
    mix.components
        .iter()
        .map(|c| {
            let (mean, vol) = c.model.portfolio_moments(delta)?;
            Ok(Prepared { weight: c.weight, mean, vol, model: &c.model })
        })
        .collect()
}

fn mixture_tail(parts: &[Prepared<'_>], v: f64) -> Result<f64> {
    parts.iter().try_fold(0.0, |acc, p| {
        Ok(acc + p.weight * big_g((p.mean + v) / p.vol, p.model.generator())?)
    })
}

/// Delta mixture-elliptic VaR.
pub fn mixture_var(mix: &MixtureModel, delta: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let parts = prepare(mix, delta)?;
    mixture_var_prepared(&parts, alpha)
}

fn mixture_var_prepared(parts: &[Prepared<'_>], alpha: f64) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in parts {
        let v = -p.mean + solve_quantile(alpha, p.model.generator())? * p.vol;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        return Ok(lo);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let opts = RootOptions { x_tol: 1e-13 * scale, f_tol: 0.0, max_iter: 200 };
    brent(|v| Ok(mixture_tail(parts, v)? - alpha), lo, hi, &opts).map_err(|e| match e {
        Error::Solver { reason, mut trace } => {
            trace.insert(0, (lo, hi));
            Error::Solver { reason: format!("mixture VaR: {reason}"), trace }
        }
        other => other,
    })
}

/// Expected shortfall of the mixture at its VaR threshold.
pub fn mixture_es(mix: &MixtureModel, delta: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let parts = prepare(mix, delta)?;
    let v = mixture_var_prepared(&parts, alpha)?;
    let mut acc = 0.0;
    for p in &parts {
        let t = (p.mean + v) / p.vol;
        let prob = big_g(t, p.model.generator())?;
        let tail = tail_expectation(t, p.model.generator())?;
        acc += p.weight * (-p.mean * prob + p.vol * tail);
    }
    Ok(acc / alpha)
}
