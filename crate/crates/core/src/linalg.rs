//! Dense symmetric positive-definite matrices: Cholesky factorization,
//! quadratic forms and sample moments.
//!
//! Matrices are small (one row per risk factor) and stored row-major in a
//! flat `Vec<f64>`. Non-positive-definite input is rejected; the only repair
//! path is an explicit ridge `εI` requested by the caller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `L Lᵗ = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    data: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `L Lᵗ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum();
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }

    /// `L z` for a column vector `z`. Maps i.i.d. spherical draws to draws
    /// with dispersion `L Lᵗ`.
    pub fn mul_vec(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.data[i * n..i * n + i + 1];
            *o = row.iter().zip(z).map(|(l, z)| l * z).sum();
        }
    }

    /// `δ L` as a row vector; its squared norm is `δ M δᵗ`.
    pub fn row_times(&self, delta: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|j| (j..n).map(|i| delta[i] * self.get(i, j)).sum())
            .collect()
    }
}

/// Cholesky factorization of a symmetric matrix given row-major.
///
/// Fails with [`Error::NotPositiveDefinite`] naming the first leading minor
/// (1-based) whose pivot is not strictly positive.
pub fn cholesky(n: usize, data: &[f64]) -> Result<CholeskyFactor> {
    if data.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = data[j * n + j];
        for k in 0..j {
            pivot -= l[j * n + k] * l[j * n + k];
        }
        // A pivot at roundoff level relative to the diagonal means the
        // minor is numerically singular.
        let floor = 4.0 * n as f64 * f64::EPSILON * data[j * n + j].abs();
        if !(pivot > floor) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { minor: j + 1, pivot });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = data[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(CholeskyFactor { n, data: l })
}

/// Symmetric positive-definite matrix, validated on construction and
/// carrying its Cholesky factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SpdMatrix {
    n: usize,
    data: Vec<f64>,
    #[serde(skip)]
    factor: Option<CholeskyFactor>,
}

impl SpdMatrix {
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("matrix dimension must be at least 1"));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("matrix entry is not finite: {bad}")));
        }
        let mut data = data;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                let gap = (a - b).abs();
                if gap > SYMMETRY_TOL * a.abs().max(b.abs()) {
                    return Err(Error::NotSymmetric { i, j, gap });
                }
                let avg = 0.5 * (a + b);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        let factor = cholesky(n, &data)?;
        Ok(Self { n, data, factor: Some(factor) })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_row_major(n, data).expect("identity is positive definite")
    }

    /// Diagonal matrix with the given (positive) entries.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in entries.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self::from_row_major(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        self.factor.as_ref().expect("factor is computed on construction")
    }

    /// `c · M` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        Self::from_row_major(self.n, self.data.iter().map(|v| v * c).collect())
    }

    /// `M + εI`.
    pub fn with_ridge(&self, eps: f64) -> Result<Self> {
        let mut data = self.data.clone();
        for i in 0..self.n {
            data[i * self.n + i] += eps;
        }
        Self::from_row_major(self.n, data)
    }

    /// `M v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, v.len())?;
        Ok(self
            .data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl TryFrom<Vec<Vec<f64>>> for SpdMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SpdMatrix> for Vec<Vec<f64>> {
    fn from(m: SpdMatrix) -> Self {
        m.rows()
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `δ M δᵗ`, evaluated as `‖δL‖²` so the result is never negative.
pub fn quadratic_form(delta: &[f64], m: &SpdMatrix) -> Result<f64> {
    check_len(m.dim(), delta.len())?;
    Ok(m.cholesky().row_times(delta).iter().map(|v| v * v).sum())
}

/// Sample mean and covariance of a returns table.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub covariance: SpdMatrix,
}

/// Sample mean and Bessel-corrected (`1/(T-1)`) covariance of a `T × n`
/// table of observations, one row per observation.
///
/// `ridge`, when given, adds `εI` before the positive-definiteness check.
pub fn estimate_moments(returns: &[Vec<f64>], ridge: Option<f64>) -> Result<Moments> {
    let t = returns.len();
    let n = returns.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::Input("returns table has no columns".into()));
    }
    if t < 2 {
        return Err(Error::Input(format!("need at least 2 observations, got {t}")));
    }
    for (row_idx, row) in returns.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Input(format!(
                "observation {} has {} entries, expected {n}",
                row_idx + 1,
                row.len()
            )));
        }
        if let Some(col) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "observation {}, column {} is not finite",
                row_idx + 1,
                col + 1
            )));
        }
    }
    let tf = t as f64;
    let mut mean = vec![0.0; n];
    for row in returns {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= tf);

    let mut cov = vec![0.0; n * n];
    for row in returns {
        for i in 0..n {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[i * n + j] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = cov[i * n + j] / (tf - 1.0);
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
        if let Some(eps) = ridge {
            cov[i * n + i] += eps;
        }
    }
    let covariance = SpdMatrix::from_row_major(n, cov).map_err(|e| match e {
        Error::NotPositiveDefinite { minor, .. } => Error::DegenerateCovariance { minor },
        other => other,
    })?;
    // Without a ridge, fewer than n+1 rows cannot produce a PD estimate and
    // were rejected above; with one, the table is still too short to trust.
    if t < n + 1 {
        return Err(Error::Input(format!(
            "need at least {} observations for {n} instruments, got {t}",
            n + 1
        )));
    }
    Ok(Moments { mean, covariance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor_is_identity() {
        let m = SpdMatrix::identity(3);
        assert_eq!(m.cholesky().rows(), m.rows());
    }

    #[test]
    fn two_by_two_by_hand() {
        let m = SpdMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(m.cholesky().rows(), vec![vec![2.0, 0.0], vec![1.0, 2.0]]);
    }

    #[test]
    fn rejects_indefinite_with_minor_index() {
        let err = SpdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { minor: 2, .. }));
        let err = SpdMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { minor: 1, .. }));
    }

    #[test]
    fn rejects_asymmetric_and_ragged() {
        let err = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![0.5, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { i: 0, j: 1, .. }));
        let err = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn quadratic_form_small_cases() {
        let m = SpdMatrix::identity(3);
        assert_eq!(quadratic_form(&[1.0, 0.0, 0.0], &m).unwrap(), 1.0);
        let rho = 0.3;
        let m = SpdMatrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let q = quadratic_form(&[1.0, 1.0], &m).unwrap();
        assert!((q - (2.0 + 2.0 * rho)).abs() < 1e-15);
        assert!(matches!(
            quadratic_form(&[1.0], &m),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn ridge_repairs_singular() {
        let data = vec![vec![0.0, 0.0], vec![2.0, 2.0], vec![1.0, 1.0]];
        assert!(matches!(estimate_moments(&data, None), Err(Error::DegenerateCovariance { minor: 2 })));
        let m = estimate_moments(&data, Some(1e-6)).unwrap();
        assert!((m.covariance.get(0, 0) - (1.0 + 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn constant_columns_are_degenerate() {
        let data = vec![vec![1.0, 2.0]; 10];
        assert!(matches!(estimate_moments(&data, None), Err(Error::DegenerateCovariance { minor: 1 })));
    }

    #[test]
    fn two_points_rank_one() {
        // mean (1,1), covariance [[2,2],[2,2]]: rank one.
        let data = vec![vec![0.0, 0.0], vec![2.0, 2.0]];
        assert!(matches!(estimate_moments(&data, None), Err(Error::DegenerateCovariance { minor: 2 })));
        assert!(matches!(estimate_moments(&data, Some(0.1)), Err(Error::Input(_))));
        assert!(matches!(estimate_moments(&data[..1], None), Err(Error::Input(_))));
        let err = SpdMatrix::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { minor: 2, .. }));
    }

    #[test]
    fn rejects_non_finite_observations() {
        let data = vec![vec![0.0, 1.0], vec![f64::NAN, 1.0], vec![1.0, 0.0]];
        assert!(matches!(estimate_moments(&data, None), Err(Error::Input(_))));
    }

    #[test]
    fn serde_round_trip() {
        let m = SpdMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[4.0,2.0],[2.0,5.0]]");
        let back: SpdMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SpdMatrix>("[[1.0,2.0],[2.0,1.0]]").is_err());
    }
}
