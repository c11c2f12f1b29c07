//! From share holdings and historical returns to a VaR figure.
//!
//! Linearises the book into delta-equivalents, estimates moments from a
//! return history and converts the covariance to a Student dispersion.

use ellvar::linalg::estimate_moments;
use ellvar::portfolio::{delta_equivalents, equity_weights, Portfolio, Position, RiskModel};
use ellvar::student::StudentParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};

fn main() -> ellvar::Result<()> {
    // 100 shares at 50.0 and 40 shares at 125.0.
    let delta = equity_weights(&[(100.0, 50.0), (40.0, 125.0)])?;
    println!("delta-equivalents {delta:?}");

    // An option position enters through its spot sensitivity.
    let with_option = delta_equivalents(&[
        Position { spot: 50.0, dvdx: 100.0 },
        Position { spot: 125.0, dvdx: 40.0 },
        Position { spot: 125.0, dvdx: -15.0 },
    ])?;
    println!("with a short call hedge: {with_option:?}");

    // A synthetic year of fat-tailed daily returns.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = StudentT::new(5.0).unwrap();
    let returns: Vec<Vec<f64>> = (0..250)
        .map(|_| {
            let common = t.sample(&mut rng);
            vec![0.01 * (common + t.sample(&mut rng)) / 2.0, 0.015 * (0.6 * common + t.sample(&mut rng)) / 2.0]
        })
        .collect();
    let moments = estimate_moments(&returns, None)?;
    let model = StudentParams::from_covariance(5.0, moments.mean.clone(), &moments.covariance)?;

    let book = Portfolio::new(vec!["AAA".into(), "BBB".into()], delta)?;
    for alpha in [0.01, 0.05] {
        let r = book.report(&model, alpha)?;
        println!("alpha={alpha}: VaR {:.2}  ES {:.2}  (P&L vol {:.2})", r.var, r.es, r.volatility);
    }
    println!("unit-scale VaR(1%) of one share each: {:.4}", model.var(&[50.0, 125.0], 0.01)?);
    Ok(())
}
