//! Expected shortfall: closed-form Student multiplier against the generic
//! tail integral, and the approach to the Gaussian limit as ν grows.

use ellvar::elliptic::{solve_quantile, tail_expectation};
use ellvar::student::{gaussian_generator, student_es_multiplier, student_generator, student_quantile};

fn main() -> ellvar::Result<()> {
    let alpha = 0.01;
    println!("{:>6}  {:>9}  {:>12}  {:>12}", "nu", "VaR q", "ES closed", "ES quadrature");
    for nu in [2.0, 3.0, 5.0, 10.0, 100.0, 1000.0] {
        let g = student_generator(3, nu)?;
        let q = solve_quantile(alpha, &g)?;
        println!(
            "{nu:>6}  {:>9.5}  {:>12.6}  {:>12.6}",
            student_quantile(alpha, nu)?,
            student_es_multiplier(alpha, nu)?,
            tail_expectation(q, &g)? / alpha
        );
    }
    let g = gaussian_generator(3)?;
    let q = solve_quantile(alpha, &g)?;
    println!("{:>6}  {q:>9.5}  {:>12}  {:>12.6}", "normal", "-", tail_expectation(q, &g)? / alpha);
    Ok(())
}
