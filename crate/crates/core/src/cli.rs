//! The `ellvar` command line.
//!
//! ```text
//! ellvar var          --model student --nu 5 --moments m.json --portfolio p.csv --alpha 0.01,0.05
//! ellvar es           --model mixture --mixture-spec mix.json --delta 1,2
//! ellvar table        --compare-published
//! ellvar mc-validate  --model student --nu 5 --alpha 0.01 --paths 1e7 --seed 42
//! ```
//!
//! Exit codes: 0 success, 1 a Monte Carlo comparison failed, 2 malformed
//! input, 3 dimension mismatch, 4 covariance not positive definite,
//! 5 numerical failure. Failures print one line on stderr of the form
//! `error kind=<kind> code=<code>: <message>`.
//!
//! Input files:
//! * portfolio CSV with header `id,delta` or `id,shares,price`;
//! * returns CSV with a header of instrument ids and one observation per row;
//! * moments JSON `{"ids"?: [...], "mu": [...], "sigma": [[...]]}`;
//! * mixture JSON `{"ids"?: [...], "components": [{"beta", "nu" | "normal": true, "mu", "sigma"}]}`.
//!
//! Without `--returns`/`--moments` a normal or Student model defaults to
//! `μ = 0, Σ = I` sized to the portfolio, and without a portfolio `δ = e₁`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticModel;
use crate::error::{Error, Result};
use crate::linalg::{estimate_moments, SpdMatrix};
use crate::mc::{empirical_var_es, simulate_pnl, Comparison, SamplingLaw, SimulationSpec};
use crate::mixture::MixtureModel;
use crate::portfolio::{equity_weights, incremental_var, Portfolio, RiskModel, RiskReport};
use crate::published;
use crate::student::{
    dispersion_from_covariance, gaussian_generator, student_es_multiplier, student_generator, student_quantile,
    StudentParams,
};

pub const EXIT_VALIDATION_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "ellvar", version, about = "Parametric VaR and expected shortfall for elliptic portfolios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value-at-Risk report per alpha level.
    Var(RiskArgs),
    /// Expected-shortfall report per alpha level.
    Es(RiskArgs),
    /// Student-t quantile and ES-multiplier grid.
    Table(TableArgs),
    /// Compare analytic VaR/ES with Monte Carlo estimates.
    McValidate(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Normal,
    Student,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaInterpretation {
    /// Σ is the dispersion matrix inside the density.
    Dispersion,
    /// Σ is the covariance; Student models rescale it by (ν-2)/ν.
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Degrees of freedom for the Student model (> 2).
    #[arg(long)]
    pub nu: Option<f64>,
    /// JSON mixture: `{"components": [{"beta", "nu"|"normal", "mu", "sigma"}]}`
    #[arg(long, value_name = "FILE")]
    pub mixture_spec: Option<PathBuf>,
    /// Historical returns; μ and Σ are estimated from them.
    #[arg(long, value_name = "FILE", conflicts_with = "moments")]
    pub returns: Option<PathBuf>,
    /// JSON `{"ids"?, "mu", "sigma"}`
    #[arg(long, value_name = "FILE")]
    pub moments: Option<PathBuf>,
    /// Force μ = 0.
    #[arg(long)]
    pub zero_mean: bool,
    /// Add `ridge·I` to Σ.
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long, value_enum, default_value_t = SigmaInterpretation::Dispersion)]
    pub sigma_interpretation: SigmaInterpretation,
    /// CSV with header `id,delta` or `id,shares,price`
    #[arg(long, value_name = "FILE")]
    pub portfolio: Option<PathBuf>,
    /// Inline sensitivities, e.g. `--delta 1,0`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "portfolio")]
    pub delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05])]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also report the VaR gradient and incremental VaR per instrument.
    #[arg(long)]
    pub ivar: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_delimiter = ',', default_values_t = published::ALPHAS)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = published::QUANTILE_NUS)]
    pub nu: Vec<f64>,
    /// Diff against the published reference tables and mark errata.
    #[arg(long, visible_alias = "compare-paper")]
    pub compare_published: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of paths; accepts `1e7` or `10_000_000`.
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub paths: usize,
    #[arg(long, env = "ELLVAR_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_count, default_value = "65536")]
    pub batch_size: usize,
    #[arg(long)]
    pub antithetic: bool,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Pass threshold in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub max_z: f64,
    /// Also test the published Student ES multipliers against the simulation.
    #[arg(long, visible_alias = "compare-paper")]
    pub compare_published: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    let clean = s.replace('_', "");
    if let Ok(n) = clean.parse::<usize>() {
        return Ok(n);
    }
    match clean.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= 1e15 => Ok(x as usize),
        _ => Err(format!("'{s}' is not a non-negative integer")),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Domain(_) | Error::ZeroPortfolio | Error::Unsupported(_) | Error::NotNormalized { .. } => 2,
        Error::DimensionMismatch { .. } => 3,
        Error::NotPositiveDefinite { .. } | Error::DegenerateCovariance { .. } | Error::NotSymmetric { .. } => 4,
        Error::Quadrature { .. }
        | Error::Series { .. }
        | Error::DistributionTail { .. }
        | Error::Solver { .. }
        | Error::InfiniteExpectedShortfall(_)
        | Error::Numerical(_) => 5,
    }
}

/// One-line diagnostic for stderr.
pub fn diagnostic(e: &Error) -> String {
    let msg = e.to_string().replace(['\n', '\r'], " ");
    format!("error kind={} code={}: {msg}", e.kind(), exit_code(e))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", diagnostic(&e));
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Var(args) => cmd_risk(args, true, out),
        Command::Es(args) => cmd_risk(args, false, out),
        Command::Table(args) => cmd_table(args, out),
        Command::McValidate(args) => cmd_mc_validate(args, out, err),
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::Input(format!("i/o: {e}"))
}

// ---------------------------------------------------------------- inputs

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn parse_cell(path: &Path, line: u64, column: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| {
        Error::Input(format!("{}:{line}: column '{column}': '{cell}' is not a number", path.display()))
    })?;
    if !v.is_finite() {
        return Err(Error::Input(format!("{}:{line}: column '{column}': value is not finite", path.display())));
    }
    Ok(v)
}

type NumberedRecord = (u64, csv::StringRecord);

/// Header plus records, rejecting ragged rows with their line number.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<NumberedRecord>)> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Input(format!("{}: missing header row", path.display())));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::Input(format!(
                "{}:{line}: expected {} fields, found {}",
                path.display(),
                header.len(),
                rec.len()
            )));
        }
        rows.push((line, rec));
    }
    Ok((header, rows))
}

pub fn load_portfolio(path: &Path) -> Result<Portfolio> {
    let (header, rows) = read_csv(path)?;
    let lower: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    let col = |name: &str| lower.iter().position(|h| h == name);
    if rows.is_empty() {
        return Err(Error::Input(format!("{}: no positions", path.display())));
    }
    let ids: Vec<String> = rows.iter().map(|(_, r)| r[0].to_string()).collect();
    let delta = match (col("delta"), col("shares"), col("price")) {
        (Some(d), _, _) => rows
            .iter()
            .map(|(line, r)| parse_cell(path, *line, "delta", &r[d]))
            .collect::<Result<Vec<_>>>()?,
        (None, Some(s), Some(p)) => {
            let holdings = rows
                .iter()
                .map(|(line, r)| Ok((parse_cell(path, *line, "shares", &r[s])?, parse_cell(path, *line, "price", &r[p])?)))
                .collect::<Result<Vec<_>>>()?;
            equity_weights(&holdings).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        }
        _ => {
            return Err(Error::Input(format!(
                "{}: header must be 'id,delta' or 'id,shares,price', got '{}'",
                path.display(),
                header.join(",")
            )))
        }
    };
    Portfolio::new(ids, delta)
}

pub fn load_returns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (header, rows) = read_csv(path)?;
    let data = rows
        .iter()
        .map(|(line, r)| {
            header
                .iter()
                .zip(r.iter())
                .map(|(h, cell)| parse_cell(path, *line, h, cell))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, data))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsFile {
    #[serde(default)]
    pub ids: Option<Vec<String>>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    pub beta: f64,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub normal: Option<bool>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureFile {
    #[serde(default)]
    pub ids: Option<Vec<String>>,
    pub components: Vec<ComponentFile>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- models

/// A model bound from command-line inputs.
#[derive(Debug, Clone)]
pub enum BoundModel {
    Normal(EllipticModel),
    Student(StudentParams),
    Mixture(MixtureModel),
}

impl BoundModel {
    pub fn sampling_law(&self) -> Result<SamplingLaw> {
        match self {
            BoundModel::Normal(m) => SamplingLaw::from_elliptic(m),
            BoundModel::Student(p) => SamplingLaw::student(p),
            BoundModel::Mixture(m) => SamplingLaw::from_mixture(m),
        }
    }

    fn inner(&self) -> &dyn RiskModel {
        match self {
            BoundModel::Normal(m) => m,
            BoundModel::Student(p) => p,
            BoundModel::Mixture(m) => m,
        }
    }
}

impl RiskModel for BoundModel {
    fn label(&self) -> String {
        match self {
            BoundModel::Normal(_) => "normal".into(),
            other => other.inner().label(),
        }
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn portfolio_moments(&self, delta: &[f64]) -> Result<(f64, f64)> {
        self.inner().portfolio_moments(delta)
    }

    fn var(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        self.inner().var(delta, alpha)
    }

    fn expected_shortfall(&self, delta: &[f64], alpha: f64) -> Result<f64> {
        self.inner().expected_shortfall(delta, alpha)
    }

    fn var_gradient(&self, delta: &[f64], alpha: f64) -> Result<Vec<f64>> {
        self.inner().var_gradient(delta, alpha)
    }
}

fn check_nu(nu: f64) -> Result<f64> {
    if nu > 2.0 && nu.is_finite() {
        Ok(nu)
    } else {
        Err(Error::Input(format!("--nu must be a finite number above 2, got {nu}")))
    }
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Input("no alpha levels given".into()));
    }
    for &a in alphas {
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::Input(format!("alpha must lie in (0, 0.5), got {a}")));
        }
    }
    Ok(())
}

/// Dispersion for a component with the given generator.
fn dispersion(sigma: SpdMatrix, nu: Option<f64>, how: SigmaInterpretation, ridge: Option<f64>) -> Result<SpdMatrix> {
    let sigma = match ridge {
        Some(eps) => sigma.with_ridge(eps)?,
        None => sigma,
    };
    match (nu, how) {
        (Some(nu), SigmaInterpretation::Covariance) => dispersion_from_covariance(&sigma, nu),
        _ => Ok(sigma),
    }
}

/// Model plus the instrument ids it was estimated for, if known.
fn bind_model(args: &ModelArgs, default_dim: usize) -> Result<(BoundModel, Option<Vec<String>>)> {
    if args.model == ModelKind::Mixture {
        let path = args
            .mixture_spec
            .as_deref()
            .ok_or_else(|| Error::Input("--model mixture requires --mixture-spec".into()))?;
        if args.returns.is_some() || args.moments.is_some() {
            return Err(Error::Input("--returns/--moments do not apply to --model mixture".into()));
        }
        let file: MixtureFile = read_json(path)?;
        let mut parts = Vec::with_capacity(file.components.len());
        for (j, c) in file.components.iter().enumerate() {
            let nu = match (c.nu, c.normal) {
                (Some(nu), None | Some(false)) => Some(check_nu(nu)?),
                (None, Some(true)) => None,
                _ => {
                    return Err(Error::Input(format!(
                        "{}: component {j} needs exactly one of \"nu\" or \"normal\": true",
                        path.display()
                    )))
                }
            };
            let n = c.mu.len();
            let sigma = dispersion(SpdMatrix::from_rows(&c.sigma)?, nu, args.sigma_interpretation, args.ridge)?;
            let mu = if args.zero_mean { vec![0.0; n] } else { c.mu.clone() };
            let generator = match nu {
                Some(nu) => student_generator(n, nu)?,
                None => gaussian_generator(n)?,
            };
            parts.push((c.beta, EllipticModel::new(mu, sigma, generator)?));
        }
        return Ok((BoundModel::Mixture(MixtureModel::new(parts)?), file.ids));
    }
    if args.mixture_spec.is_some() {
        return Err(Error::Input("--mixture-spec requires --model mixture".into()));
    }

    let (ids, mu, sigma) = if let Some(path) = &args.returns {
        let (ids, data) = load_returns(path)?;
        let m = estimate_moments(&data, args.ridge)?;
        (Some(ids), m.mean, m.covariance)
    } else if let Some(path) = &args.moments {
        let file: MomentsFile = read_json(path)?;
        let sigma = SpdMatrix::from_rows(&file.sigma)?;
        let sigma = match args.ridge {
            Some(eps) => sigma.with_ridge(eps)?,
            None => sigma,
        };
        (file.ids, file.mu, sigma)
    } else {
        (None, vec![0.0; default_dim], SpdMatrix::identity(default_dim))
    };
    let mu = if args.zero_mean { vec![0.0; mu.len()] } else { mu };
    let model = match args.model {
        ModelKind::Normal => {
            if args.nu.is_some() {
                return Err(Error::Input("--nu applies only to --model student".into()));
            }
            let n = mu.len();
            BoundModel::Normal(EllipticModel::new(mu, sigma, gaussian_generator(n)?)?)
        }
        ModelKind::Student => {
            let nu = check_nu(args.nu.ok_or_else(|| Error::Input("--model student requires --nu".into()))?)?;
            let sigma = dispersion(sigma, Some(nu), args.sigma_interpretation, None)?;
            BoundModel::Student(StudentParams::new(nu, mu, sigma)?)
        }
        ModelKind::Mixture => unreachable!("handled above"),
    };
    Ok((model, ids))
}

/// Reorders a labelled portfolio to the model's instrument order.
fn align(portfolio: Portfolio, ids: Option<&[String]>, labelled: bool) -> Result<Portfolio> {
    let Some(ids) = ids else { return Ok(portfolio) };
    if !labelled {
        return Ok(portfolio);
    }
    if ids.len() != portfolio.len() {
        return Err(Error::DimensionMismatch { expected: ids.len(), got: portfolio.len() });
    }
    let mut delta = Vec::with_capacity(ids.len());
    for id in ids {
        let k = portfolio
            .ids()
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::Input(format!("instrument '{id}' has no portfolio entry")))?;
        delta.push(portfolio.delta()[k]);
    }
    Portfolio::new(ids.to_vec(), delta)
}

/// Binds model and portfolio, checking that their dimensions agree.
pub fn bind(args: &ModelArgs) -> Result<(BoundModel, Portfolio)> {
    check_alphas(&args.alpha)?;
    let (portfolio, labelled) = match (&args.portfolio, &args.delta) {
        (Some(path), _) => (Some(load_portfolio(path)?), true),
        (None, Some(d)) => (Some(Portfolio::from_delta(d.clone())?), false),
        (None, None) => (None, false),
    };
    let default_dim = portfolio.as_ref().map_or(1, Portfolio::len);
    let (model, ids) = bind_model(args, default_dim)?;
    let portfolio = match portfolio {
        Some(p) => p,
        None => {
            let mut e1 = vec![0.0; model.dim()];
            e1[0] = 1.0;
            Portfolio::from_delta(e1)?
        }
    };
    if portfolio.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: portfolio.len() });
    }
    let portfolio = align(portfolio, ids.as_deref(), labelled)?;
    Ok((model, portfolio))
}

// ---------------------------------------------------------------- output

/// `x` rounded half-to-even to 6 significant digits, trailing zeros removed.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..16).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    // Place the six rounded digits around the decimal point.
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if exp >= 5 {
        format!("{digits}{}", "0".repeat(exp as usize - 5))
    } else if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    let body = if body.contains('.') { body.trim_end_matches('0').trim_end_matches('.') } else { &body };
    format!("{sign}{body}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), fmt_sig6)
}

struct Grid {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Grid {
    fn write(&self, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let flush = |e: csv::Error| Error::Input(format!("csv output: {e}"));
                w.write_record(&self.headers).map_err(flush)?;
                for row in &self.rows {
                    w.write_record(row).map_err(flush)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Input(format!("csv output: {e}")))?;
                out.write_all(&bytes).map_err(io_error)
            }
            _ => {
                let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let line = |cells: Vec<&str>| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(self.headers.clone())).map_err(io_error)?;
                for row in &self.rows {
                    writeln!(out, "{}", line(row.iter().map(String::as_str).collect())).map_err(io_error)?;
                }
                Ok(())
            }
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("json output: {e}")))?;
    writeln!(out, "{text}").map_err(io_error)
}

// ---------------------------------------------------------------- var / es

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvarEntry {
    pub id: String,
    pub delta: f64,
    pub gamma: f64,
    pub ivar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskOutput {
    #[serde(flatten)]
    pub report: RiskReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incremental: Option<Vec<IvarEntry>>,
}

fn cmd_risk(args: &RiskArgs, with_ivar: bool, out: &mut dyn Write) -> Result<i32> {
    let (model, portfolio) = bind(&args.model)?;
    let mut outputs = Vec::with_capacity(args.model.alpha.len());
    for &alpha in &args.model.alpha {
        let report = portfolio.report(&model, alpha)?;
        let incremental = if with_ivar && args.ivar {
            let iv = incremental_var(&model, portfolio.delta(), alpha)?;
            Some(
                portfolio
                    .ids()
                    .iter()
                    .zip(portfolio.delta())
                    .zip(iv.gamma.iter().zip(&iv.ivar))
                    .map(|((id, &delta), (&gamma, &ivar))| IvarEntry { id: id.clone(), delta, gamma, ivar })
                    .collect(),
            )
        } else {
            None
        };
        outputs.push(RiskOutput { report, incremental });
    }
    match args.format {
        OutputFormat::Json => write_json(&outputs, out)?,
        format => {
            let rows = outputs
                .iter()
                .map(|o| {
                    let r = &o.report;
                    vec![
                        r.model.clone(),
                        fmt_sig6(r.alpha),
                        fmt_sig6(r.var),
                        fmt_sig6(r.es),
                        fmt_sig6(r.quantile),
                        fmt_sig6(r.mean),
                        fmt_sig6(r.volatility),
                    ]
                })
                .collect();
            Grid { headers: vec!["model", "alpha", "var", "es", "quantile", "mean", "volatility"], rows }
                .write(format, out)?;
            let ivar_rows: Vec<Vec<String>> = outputs
                .iter()
                .flat_map(|o| {
                    o.incremental.iter().flatten().map(|e| {
                        vec![fmt_sig6(o.report.alpha), e.id.clone(), fmt_sig6(e.delta), fmt_sig6(e.gamma), fmt_sig6(e.ivar)]
                    })
                })
                .collect();
            if !ivar_rows.is_empty() {
                writeln!(out).map_err(io_error)?;
                Grid { headers: vec!["alpha", "id", "delta", "gamma", "ivar"], rows: ivar_rows }.write(format, out)?;
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------- table

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub alpha: f64,
    pub nu: f64,
    pub quantile: f64,
    /// `None` when the ES is infinite (ν ≤ 1).
    pub es_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_quantile: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile_erratum: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_es_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub es_erratum: Option<bool>,
}

/// Quantile and ES multiplier over a grid, optionally diffed against the
/// published tables. A cell is an erratum when it differs by more than
/// [`published::QUANTILE_TOL`].
pub fn quantile_table(alphas: &[f64], nus: &[f64], compare: bool) -> Result<Vec<TableRow>> {
    let mut rows = Vec::with_capacity(alphas.len() * nus.len());
    for &alpha in alphas {
        for &nu in nus {
            let q = student_quantile(alpha, nu)?;
            let m = if nu > 1.0 { Some(student_es_multiplier(alpha, nu)?) } else { None };
            let (pq, pm) = if compare {
                (published::quantile(alpha, nu), published::es_multiplier(alpha, nu))
            } else {
                (None, None)
            };
            rows.push(TableRow {
                alpha,
                nu,
                quantile: q,
                es_multiplier: m,
                published_quantile: pq,
                quantile_erratum: pq.map(|p| (p - q).abs() > published::QUANTILE_TOL),
                published_es_multiplier: pm,
                es_erratum: pm.map(|p| m.is_none_or(|m| (p - m).abs() > published::QUANTILE_TOL)),
            });
        }
    }
    Ok(rows)
}

fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    check_alphas(&args.alpha)?;
    if let Some(nu) = args.nu.iter().find(|&&nu| !(nu > 0.0 && nu.is_finite())) {
        return Err(Error::Input(format!("--nu values must be positive, got {nu}")));
    }
    let rows = quantile_table(&args.alpha, &args.nu, args.compare_published)?;
    if args.format == OutputFormat::Json {
        write_json(&rows, out)?;
        return Ok(0);
    }
    let flag = |f: Option<bool>| match f {
        Some(true) => "ERRATUM".to_string(),
        Some(false) => "ok".to_string(),
        None => "-".to_string(),
    };
    let (headers, cells): (Vec<&'static str>, Vec<Vec<String>>) = if args.compare_published {
        (
            vec!["alpha", "nu", "q", "published_q", "q_check", "es_mult", "published_es", "es_check"],
            rows.iter()
                .map(|r| {
                    vec![
                        fmt_sig6(r.alpha),
                        fmt_sig6(r.nu),
                        fmt_sig6(r.quantile),
                        fmt_opt(r.published_quantile),
                        flag(r.quantile_erratum),
                        fmt_opt(r.es_multiplier),
                        fmt_opt(r.published_es_multiplier),
                        flag(r.es_erratum),
                    ]
                })
                .collect(),
        )
    } else {
        (
            vec!["alpha", "nu", "q", "es_mult"],
            rows.iter()
                .map(|r| vec![fmt_sig6(r.alpha), fmt_sig6(r.nu), fmt_sig6(r.quantile), fmt_opt(r.es_multiplier)])
                .collect(),
        )
    };
    Grid { headers, rows: cells }.write(args.format, out)?;
    Ok(0)
}

// ---------------------------------------------------------------- mc-validate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub alpha: f64,
    /// `var`, `es` or `published_es`.
    pub measure: String,
    #[serde(flatten)]
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model: String,
    pub paths: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub antithetic: bool,
    pub max_z: f64,
    pub pass: bool,
    pub rows: Vec<ValidationRow>,
    pub warnings: Vec<String>,
}

/// Simulates once and compares every requested α.
pub fn mc_validate(
    model: &BoundModel,
    portfolio: &Portfolio,
    alphas: &[f64],
    spec: &SimulationSpec,
    max_z: f64,
    compare_published: bool,
) -> Result<ValidationReport> {
    let law = model.sampling_law()?;
    let pnl = simulate_pnl(&law, portfolio.delta(), spec)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &alpha in alphas {
        let report = portfolio.report(model, alpha)?;
        let est = empirical_var_es(&pnl, alpha)?;
        for w in &est.warnings {
            warnings.push(format!("alpha={alpha}: {w}"));
        }
        rows.push(ValidationRow {
            alpha,
            measure: "var".into(),
            comparison: Comparison::new(report.var, est.var, est.var_se, max_z),
        });
        rows.push(ValidationRow {
            alpha,
            measure: "es".into(),
            comparison: Comparison::new(report.es, est.es, est.es_se, max_z),
        });
        if compare_published {
            match model {
                BoundModel::Student(p) => match published::es_multiplier(alpha, p.nu()) {
                    Some(m) => rows.push(ValidationRow {
                        alpha,
                        measure: "published_es".into(),
                        comparison: Comparison::new(-report.mean + m * report.volatility, est.es, est.es_se, max_z),
                    }),
                    None => warnings.push(format!("no published ES multiplier for alpha={alpha}, nu={}", p.nu())),
                },
                _ => warnings.push("published ES multipliers exist only for Student models".into()),
            }
        }
    }
    warnings.dedup();
    Ok(ValidationReport {
        model: model.label(),
        paths: spec.paths,
        seed: spec.seed,
        batch_size: spec.batch_size,
        antithetic: spec.antithetic,
        max_z,
        pass: rows.iter().all(|r| r.comparison.pass),
        rows,
        warnings,
    })
}

fn cmd_mc_validate(args: &McArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (model, portfolio) = bind(&args.model)?;
    if !(args.max_z > 0.0) {
        return Err(Error::Input(format!("--max-z must be positive, got {}", args.max_z)));
    }
    let spec = SimulationSpec {
        paths: args.paths,
        seed: args.seed,
        batch_size: args.batch_size,
        antithetic: args.antithetic,
        threads: args.threads,
    };
    spec.validate().map_err(|e| Error::Input(e.to_string()))?;
    let report = mc_validate(&model, &portfolio, &args.model.alpha, &spec, args.max_z, args.compare_published)?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match args.format {
        OutputFormat::Json => write_json(&report, out)?,
        format => {
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    let c = &r.comparison;
                    vec![
                        fmt_sig6(r.alpha),
                        r.measure.clone(),
                        fmt_sig6(c.analytic),
                        fmt_sig6(c.empirical),
                        fmt_sig6(c.std_error),
                        fmt_sig6(c.z),
                        if c.pass { "PASS" } else { "FAIL" }.to_string(),
                    ]
                })
                .collect();
            Grid { headers: vec!["alpha", "measure", "analytic", "empirical", "std_error", "z", "result"], rows }
                .write(format, out)?;
            if format == OutputFormat::Table {
                writeln!(
                    out,
                    "model={} paths={} seed={} overall={}",
                    report.model,
                    report.paths,
                    report.seed,
                    if report.pass { "PASS" } else { "FAIL" }
                )
                .map_err(io_error)?;
            }
        }
    }
    Ok(if report.pass { 0 } else { EXIT_VALIDATION_FAILED })
}
