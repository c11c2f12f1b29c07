//! VaR and ES of a linear portfolio under a multivariate Student-t model.
//!
//! Run with `cargo run --example student_var`.

use ellvar::linalg::SpdMatrix;
use ellvar::portfolio::{Portfolio, RiskModel};
use ellvar::student::{student_es_multiplier, student_quantile, StudentParams};

fn main() -> ellvar::Result<()> {
    // Daily log-returns of three assets: dispersion matrix, not covariance.
    let sigma = SpdMatrix::from_rows(&[
        vec![4.0e-4, 1.2e-4, 0.6e-4],
        vec![1.2e-4, 2.5e-4, 0.8e-4],
        vec![0.6e-4, 0.8e-4, 1.0e-4],
    ])?;
    let model = StudentParams::new(5.0, vec![2e-4, 1e-4, 1e-4], sigma)?;
    let book = Portfolio::new(
        vec!["equity".into(), "credit".into(), "rates".into()],
        vec![1.0e6, -4.0e5, 2.5e6],
    )?;

    for alpha in [0.01, 0.025, 0.05] {
        let r = book.report(&model, alpha)?;
        println!(
            "{}  alpha={alpha:<5}  VaR={:>10.2}  ES={:>10.2}  q={:.5}  m={:.5}",
            r.model,
            r.var,
            r.es,
            student_quantile(alpha, model.nu())?,
            student_es_multiplier(alpha, model.nu())?,
        );
    }

    // The same numbers, calibrated from a sample covariance instead.
    let cov = SpdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let from_cov = StudentParams::from_covariance(5.0, vec![0.0, 0.0], &cov)?;
    println!("covariance-calibrated VaR(1%) of (1, 1): {:.5}", from_cov.var(&[1.0, 1.0], 0.01)?);
    Ok(())
}
