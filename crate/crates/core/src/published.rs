//! Published reference tables for the Student-t quantile multiplier
//! `q_{α,ν}` and the ES multiplier, copied verbatim, misprints included.
//!
//! The quantile table is accurate to its printed digits except in a few
//! cells (see `ellvar table --compare-published`). The ES multipliers are
//! not reproducible from any consistent formula and are kept for errata
//! demonstrations only.

pub const ALPHAS: [f64; 3] = [0.01, 0.025, 0.05];

pub const QUANTILE_NUS: [f64; 16] =
    [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 100.0, 200.0, 250.0, 275.0, 300.0, 400.0, 1000.0];

/// Rows follow [`ALPHAS`], columns follow [`QUANTILE_NUS`].
pub const QUANTILES: [[f64; 16]; 3] = [
    [
        6.96456, 4.54056, 3.74695, 3.36493, 3.14267, 2.99795, 2.89646, 2.8214, 2.76377, 2.36422, 2.34135, 2.34514,
        2.33998, 2.33884, 2.33571, 2.33008,
    ],
    [
        4.3026, 3.18244, 2.77644, 2.57058, 2.44691, 2.36462, 2.3060, 2.26216, 2.22814, 1.98397, 1.97189, 1.96949,
        1.96862, 1.9679, 1.96591, 1.96234,
    ],
    [
        2.91999, 2.35336, 2.13185, 2.01505, 1.94318, 1.89458, 1.85955, 1.81246, 1.66023, 1.66023, 1.65251, 1.65097,
        1.65041, 1.64995, 1.64867, 1.64638,
    ],
];

pub const ES_NUS: [f64; 12] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 100.0, 200.0, 250.0];

/// Rows follow [`ALPHAS`], columns follow [`ES_NUS`].
pub const ES_MULTIPLIERS: [[f64; 12]; 3] = [
    [5.5722, 5.9309, 5.7879, 5.4555, 5.0799, 4.7160, 4.3819, 4.0818, 3.8135, 0.5157, 0.2644, 0.2086],
    [8.6113, 7.6777, 6.8216, 6.0676, 5.4326, 4.9032, 4.4601, 4.0862, 3.7675, 0.4577, 0.2313, 0.1854],
    [11.7123, 9.0750, 7.4966, 6.3797, 5.5457, 4.9007, 4.3880, 3.9711, 3.6257, 0.4073, 0.2050, 0.1642],
];

/// Absolute tolerance the quantile table is expected to meet.
pub const QUANTILE_TOL: f64 = 5e-4;

fn alpha_row(alpha: f64) -> Option<usize> {
    ALPHAS.iter().position(|&a| a == alpha)
}

pub fn quantile(alpha: f64, nu: f64) -> Option<f64> {
    let col = QUANTILE_NUS.iter().position(|&v| v == nu)?;
    Some(QUANTILES[alpha_row(alpha)?][col])
}

pub fn es_multiplier(alpha: f64, nu: f64) -> Option<f64> {
    let col = ES_NUS.iter().position(|&v| v == nu)?;
    Some(ES_MULTIPLIERS[alpha_row(alpha)?][col])
}
