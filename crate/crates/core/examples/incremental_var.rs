//! Allocating VaR across desks with incremental VaR (Euler allocation).

use ellvar::linalg::SpdMatrix;
use ellvar::portfolio::{business_unit_portfolio, incremental_var, Portfolio};
use ellvar::student::StudentParams;

fn main() -> ellvar::Result<()> {
    // Each business unit's P&L is one coordinate; the firm holds δ = (1, ..., 1).
    let sigma = SpdMatrix::from_rows(&[
        vec![9.0, 3.0, -1.0, 0.5],
        vec![3.0, 4.0, 0.0, 0.2],
        vec![-1.0, 0.0, 6.0, 1.0],
        vec![0.5, 0.2, 1.0, 1.0],
    ])?;
    let model = StudentParams::new(4.0, vec![0.0; 4], sigma)?;
    let firm = Portfolio::new(
        ["rates", "fx", "credit", "equity"].map(String::from).to_vec(),
        business_unit_portfolio(4)?,
    )?;

    let alpha = 0.01;
    let iv = firm.incremental_var(&model, alpha)?;
    println!("firm VaR({alpha}) = {:.4}", iv.var);
    for ((id, g), c) in firm.ids().iter().zip(&iv.gamma).zip(&iv.ivar) {
        println!("  {id:<7} marginal {g:>8.4}  contribution {c:>8.4}  share {:>6.1}%", 100.0 * c / iv.var);
    }
    println!("sum of contributions = {:.12}", iv.ivar.iter().sum::<f64>());

    // Hedging rates halfway changes every contribution through correlation.
    let hedged = incremental_var(&model, &[0.5, 1.0, 1.0, 1.0], alpha)?;
    println!("after halving rates: VaR {:.4}, contributions {:?}", hedged.var, hedged.ivar.iter().map(|c| (c * 1e4).round() / 1e4).collect::<Vec<_>>());
    Ok(())
}
