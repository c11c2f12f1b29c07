//! VaR for an arbitrary elliptic law given only its density generator.
//!
//! The quantile is found by quadrature, so any `g(u)` with finite mass works.
//! Here a Kotz-type generator `g(u) ∝ exp(-√u)` is normalised on the fly and
//! a hand-written Gaussian generator is checked against the built-in one.

use std::f64::consts::PI;

use ellvar::elliptic::{solve_quantile, DensityGenerator, EllipticModel, Normalization};
use ellvar::linalg::SpdMatrix;
use ellvar::student::gaussian_generator;

fn main() -> ellvar::Result<()> {
    let n = 2;
    let sigma = SpdMatrix::from_rows(&[vec![1.0, 0.4], vec![0.4, 2.0]])?;
    let delta = [1.0, -0.5];

    let gauss = DensityGenerator::new(n, "hand-rolled gaussian", |u| (-0.5 * u).exp() / (2.0 * PI), Normalization::Validate)?;
    let builtin = gaussian_generator(n)?;
    println!("gaussian q(1%): custom {:.10}, built-in {:.10}", solve_quantile(0.01, &gauss)?, solve_quantile(0.01, &builtin)?);

    let kotz = DensityGenerator::new(n, "kotz", |u: f64| (-u.sqrt()).exp(), Normalization::Rescale)?;
    let model = EllipticModel::new(vec![0.0; n], sigma, kotz)?;
    for alpha in [0.01, 0.05] {
        println!(
            "kotz alpha={alpha}: q={:.6}  VaR={:.6}  ES={:.6}",
            solve_quantile(alpha, model.generator())?,
            model.var(&delta, alpha)?,
            model.expected_shortfall(&delta, alpha)?
        );
    }

    // A generator that does not integrate to one is rejected unless rescaling is asked for.
    match DensityGenerator::new(n, "unnormalised", |u| (-0.5 * u).exp(), Normalization::Validate) {
        Err(e) => println!("rejected as expected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
