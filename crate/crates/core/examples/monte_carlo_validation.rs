//! Checking analytic VaR/ES against simulation, with standard errors.
//!
//! `cargo run --release --example monte_carlo_validation [paths]`

use ellvar::linalg::SpdMatrix;
use ellvar::mc::{empirical_var_es, simulate_pnl, Comparison, SamplingLaw, SimulationSpec};
use ellvar::portfolio::RiskModel;
use ellvar::student::StudentParams;

fn main() -> ellvar::Result<()> {
    let paths = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let sigma = SpdMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]])?;
    let model = StudentParams::new(4.0, vec![0.01, 0.02], sigma)?;
    let delta = [2.0, -1.0];

    let spec = SimulationSpec { paths, seed: 42, ..SimulationSpec::default() };
    let pnl = simulate_pnl(&SamplingLaw::student(&model)?, &delta, &spec)?;
    println!("{paths} paths, seed {}", spec.seed);
    for alpha in [0.01, 0.05] {
        let est = empirical_var_es(&pnl, alpha)?;
        let var = Comparison::new(model.var(&delta, alpha)?, est.var, est.var_se, 3.0);
        let es = Comparison::new(model.expected_shortfall(&delta, alpha)?, est.es, est.es_se, 3.0);
        for (name, c) in [("VaR", var), ("ES", es)] {
            println!(
                "alpha={alpha} {name:<3} analytic {:.5}  simulated {:.5} ± {:.5}  z={:+.2}  {}",
                c.analytic,
                c.empirical,
                c.std_error,
                c.z,
                if c.pass { "ok" } else { "MISMATCH" }
            );
        }
        for w in &est.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
