//! Parametric VaR and ES when P&L is linear in elliptically distributed
//! risk factors. Covers normal, Student-t, user-supplied density generators
//! and mixtures of them, with a Monte Carlo engine as a cross-check.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod mixture;
pub mod portfolio;
pub mod published;
pub mod roots;
pub mod specfun;
pub mod student;

pub use elliptic::{DensityGenerator, EllipticModel, Normalization};
pub use error::{Error, Result};
pub use linalg::SpdMatrix;
pub use mixture::MixtureModel;
pub use portfolio::{Portfolio, RiskModel, RiskReport};
pub use student::StudentParams;
