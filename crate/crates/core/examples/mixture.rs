//! Regime mixtures: a calm and a stressed market state, each elliptic.

use ellvar::elliptic::EllipticModel;
use ellvar::linalg::SpdMatrix;
use ellvar::mixture::MixtureModel;
use ellvar::student::{gaussian_generator, student_generator};

fn main() -> ellvar::Result<()> {
    let calm = SpdMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]])?;
    let stress = SpdMatrix::from_rows(&[vec![4.0, 2.4], vec![2.4, 4.0]])?;
    let calm_model = EllipticModel::new(vec![0.05, 0.05], calm, gaussian_generator(2)?)?;
    let stress_model = EllipticModel::new(vec![-0.2, -0.2], stress, student_generator(2, 4.0)?)?;
    let mix = MixtureModel::new(vec![(0.85, calm_model.clone()), (0.15, stress_model.clone())])?;

    let delta = [1.0, 1.0];
    for alpha in [0.01, 0.05] {
        println!(
            "alpha={alpha}: calm VaR {:.4}, stress VaR {:.4}, mixture VaR {:.4}, mixture ES {:.4}",
            calm_model.var(&delta, alpha)?,
            stress_model.var(&delta, alpha)?,
            mix.var(&delta, alpha)?,
            mix.expected_shortfall(&delta, alpha)?
        );
    }
    let (mean, vol) = mix.portfolio_moments(&delta)?;
    println!("mixture P&L scale summary: mean {mean:.4}, blended vol {vol:.4}");
    Ok(())
}
