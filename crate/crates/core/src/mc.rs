//! Seeded Monte Carlo for normal, Student-t and mixture laws.
//!
//! Draws are `x = μ + s·Lz` with `z` i.i.d. standard normal, `L` the
//! Cholesky factor of the dispersion matrix and `s = 1` (normal) or
//! `s = 1/√(χ²_ν/ν)` (Student). χ²_ν is drawn as Gamma(ν/2, scale 2), so
//! non-integer ν works.
//!
//! Reproducibility: paths are cut into batches of `batch_size`. Batch `b`
//! uses ChaCha8 (`rand_chacha`) keyed by `seed_from_u64(seed)` on stream
//! `b`. Batches run in parallel on rayon and are concatenated in batch
//! order, so output depends on `(seed, batch_size, paths, antithetic)` and
//! not on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{EllipticModel, GeneratorKind};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, CholeskyFactor, SpdMatrix};
use crate::mixture::MixtureModel;
use crate::student::StudentParams;

/// Below this many paths estimates carry a warning.
pub const MIN_RECOMMENDED_PATHS: usize = 10_000;
/// Below this many tail observations the ES standard error carries a warning.
pub const MIN_TAIL_OBSERVATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub paths: usize,
    pub seed: u64,
    pub batch_size: usize,
    /// Pair every draw `s·Lz` with `-s·Lz`.
    pub antithetic: bool,
    /// Worker threads; `None` uses the global rayon pool. Never changes results.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self { paths: 1_000_000, seed: 0, batch_size: 1 << 16, antithetic: false, threads: None }
    }
}

impl SimulationSpec {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self { paths, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::domain("paths must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch_size must be positive"));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("threads must be positive"));
        }
        Ok(())
    }

    fn batches(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        let n = self.paths.div_ceil(self.batch_size);
        (0..n).map(move |b| (b as u64, self.batch_size.min(self.paths - b * self.batch_size)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Radial {
    Gaussian,
    Student { nu: f64 },
}

#[derive(Debug, Clone)]
struct Component {
    mu: Vec<f64>,
    factor: CholeskyFactor,
    radial: Radial,
    chi2: Option<Gamma<f64>>,
}

impl Component {
    fn new(mu: Vec<f64>, sigma: &SpdMatrix, radial: Radial) -> Result<Self> {
        check_len(sigma.dim(), mu.len())?;
        let chi2 = match radial {
            Radial::Gaussian => None,
            Radial::Student { nu } => {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(Error::domain(format!("degrees of freedom must be positive, got {nu}")));
                }
                Some(Gamma::new(nu / 2.0, 2.0).map_err(|e| Error::domain(e.to_string()))?)
            }
        };
        Ok(Self { mu, factor: sigma.cholesky().clone(), radial, chi2 })
    }

    fn scale<R: Rng>(&self, rng: &mut R) -> f64 {
        match (self.radial, &self.chi2) {
            (Radial::Student { nu }, Some(chi2)) => (nu / chi2.sample(rng)).sqrt(),
            _ => 1.0,
        }
    }
}

/// A law the simulator can draw from.
#[derive(Debug, Clone)]
pub struct SamplingLaw {
    dim: usize,
    cumulative: Vec<f64>,
    components: Vec<Component>,
}

impl SamplingLaw {
    fn single(c: Component) -> Self {
        Self { dim: c.mu.len(), cumulative: vec![1.0], components: vec![c] }
    }

    pub fn gaussian(mu: Vec<f64>, sigma: &SpdMatrix) -> Result<Self> {
        Ok(Self::single(Component::new(mu, sigma, Radial::Gaussian)?))
    }

    pub fn student(params: &StudentParams) -> Result<Self> {
        let radial = Radial::Student { nu: params.nu() };
        Ok(Self::single(Component::new(params.mu().to_vec(), params.sigma(), radial)?))
    }

    /// Only Gaussian and Student generators can be sampled.
    pub fn from_elliptic(model: &EllipticModel) -> Result<Self> {
        Ok(Self::single(elliptic_component(model)?))
    }

    pub fn from_mixture(mix: &MixtureModel) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(mix.components().len());
        let mut components = Vec::with_capacity(mix.components().len());
        let mut acc = 0.0;
        for c in mix.components() {
            acc += c.weight;
            cumulative.push(acc);
            components.push(elliptic_component(&c.model)?);
        }
        // Guard against a sum of 1 - 1e-16 leaving a gap at the top.
        *cumulative.last_mut().expect("mixture is nonempty") = 1.0;
        Ok(Self { dim: mix.dim(), cumulative, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> usize {
        if self.components.len() == 1 {
            return 0;
        }
        let u: f64 = rng.random();
        self.cumulative.iter().position(|&c| u < c).unwrap_or(self.components.len() - 1)
    }
}

fn elliptic_component(model: &EllipticModel) -> Result<Component> {
    let radial = match model.generator().kind() {
        GeneratorKind::Gaussian => Radial::Gaussian,
        GeneratorKind::Student { nu } => Radial::Student { nu },
        GeneratorKind::Custom => {
            return Err(Error::Unsupported(format!(
                "cannot sample generator '{}': only normal, Student-t and their mixtures",
                model.generator().name()
            )))
        }
    };
    Component::new(model.mu().to_vec(), model.sigma(), radial)
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Drives one batch. `emit(component, scale, z, sign)` is called once per path.
fn run_batch<F>(law: &SamplingLaw, spec: &SimulationSpec, batch: u64, count: usize, mut emit: F)
where
    F: FnMut(usize, f64, &[f64], f64),
{
    let mut rng = batch_rng(spec.seed, batch);
    let mut z = vec![0.0; law.dim];
    let mut done = 0;
    while done < count {
        let j = law.pick(&mut rng);
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let s = law.components[j].scale(&mut rng);
        emit(j, s, &z, 1.0);
        done += 1;
        if spec.antithetic && done < count {
            emit(j, s, &z, -1.0);
            done += 1;
        }
    }
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Row-major `paths × dim` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl PathMatrix {
    pub fn paths(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Full draws. Memory is `paths × dim` doubles; for tail estimation use
/// [`simulate_pnl`], which only keeps `δ·x`.
pub fn sample_elliptic(law: &SamplingLaw, spec: &SimulationSpec) -> Result<PathMatrix> {
    spec.validate()?;
    let n = law.dim;
    let batches: Vec<(u64, usize)> = spec.batches().collect();
    let chunks = in_pool(spec.threads, || {
        batches
            .par_iter()
            .map(|&(b, count)| {
                let mut out = Vec::with_capacity(count * n);
                let mut lz = vec![0.0; n];
                run_batch(law, spec, b, count, |j, s, z, sign| {
                    let c = &law.components[j];
                    c.factor.mul_vec(z, &mut lz);
                    out.extend(c.mu.iter().zip(&lz).map(|(m, v)| m + sign * s * v));
                });
                out
            })
            .collect::<Vec<_>>()
    })?;
    Ok(PathMatrix { dim: n, data: chunks.concat() })
}

/// Simulated P&L `δ·x`, one entry per path, in path order.
pub fn simulate_pnl(law: &SamplingLaw, delta: &[f64], spec: &SimulationSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    check_len(law.dim, delta.len())?;
    // δ·x = δ·μ + s (δL)·z, so only the projected factor row is needed.
    let proj: Vec<(f64, Vec<f64>)> = law
        .components
        .iter()
        .map(|c| (dot(delta, &c.mu), c.factor.row_times(delta)))
        .collect();
    let batches: Vec<(u64, usize)> = spec.batches().collect();
    let chunks = in_pool(spec.threads, || {
        batches
            .par_iter()
            .map(|&(b, count)| {
                let mut out = Vec::with_capacity(count);
                run_batch(law, spec, b, count, |j, s, z, sign| {
                    let (m, row) = &proj[j];
                    out.push(m + sign * s * dot(row, z));
                });
                out
            })
            .collect::<Vec<_>>()
    })?;
    Ok(chunks.concat())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha: f64,
    pub paths: usize,
    pub var: f64,
    pub es: f64,
    pub var_se: f64,
    pub es_se: f64,
    pub tail_count: usize,
    pub warnings: Vec<String>,
}

/// Empirical VaR (negated ⌈αN⌉-th order statistic) and ES (negated mean of
/// the P&L at or below `-VaR`), with asymptotic standard errors.
///
/// The VaR error uses `√(α(1-α)/N) / f̂` with the density `f̂` estimated from
/// order-statistic spacings around the quantile. The ES error is
/// `√((Var_tail + (1-α)(ES-VaR)²) / (Nα))`.
pub fn empirical_var_es(pnl: &[f64], alpha: f64) -> Result<TailEstimate> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::domain(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    let n = pnl.len();
    if pnl.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite P&L sample".into()));
    }
    let k = (alpha * n as f64).ceil() as usize;
    if k == 0 {
        return Err(Error::domain("sample is empty"));
    }
    let band = ((k as f64).sqrt().round() as usize).max(1);
    let hi = (k + band).min(n);
    let mut work = pnl.to_vec();
    if hi < n {
        work.select_nth_unstable_by(hi - 1, f64::total_cmp);
    }
    work[..hi].sort_unstable_by(f64::total_cmp);
    let (low, rest) = work.split_at(hi);
    let threshold = low[k - 1];

    // Ties above the selected prefix only happen for atoms at the threshold.
    let mut tail: Vec<f64> = low.iter().copied().take_while(|&x| x <= threshold).collect();
    if low[hi - 1] == threshold {
        tail.extend(rest.iter().filter(|&&x| x == threshold));
    }
    let m = tail.len() as f64;
    let es = -tail.iter().sum::<f64>() / m;
    let var = -threshold;

    let lo_idx = k.saturating_sub(band).max(1);
    let spacing = low[hi - 1] - low[lo_idx - 1];
    let var_se = if spacing > 0.0 {
        let density = (hi - lo_idx) as f64 / (n as f64 * spacing);
        (alpha * (1.0 - alpha) / n as f64).sqrt() / density
    } else {
        0.0
    };
    let tail_var = if tail.len() > 1 {
        let mean = -es;
        tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let es_se = ((tail_var + (1.0 - alpha) * (es - var).powi(2)) / (n as f64 * alpha)).sqrt();

    let mut warnings = Vec::new();
    if n < MIN_RECOMMENDED_PATHS {
        warnings.push(format!("only {n} paths; at least {MIN_RECOMMENDED_PATHS} recommended"));
    }
    if tail.len() < MIN_TAIL_OBSERVATIONS {
        warnings.push(format!("only {} tail observations; ES standard error is unreliable", tail.len()));
    }
    Ok(TailEstimate { alpha, paths: n, var, es, var_se, es_se, tail_count: tail.len(), warnings })
}

/// Analytic value against an estimate with standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    /// `(analytic - empirical) / std_error`
    pub z: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn new(analytic: f64, empirical: f64, std_error: f64, max_z: f64) -> Self {
        let diff = analytic - empirical;
        let z = if std_error > 0.0 {
            diff / std_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Self { analytic, empirical, std_error, z, pass: z.abs() <= max_z }
    }
}
