//! Prints Student quantile and ES-multiplier tables next to the commonly
//! circulated reference values, flagging the cells those tables get wrong.

use ellvar::cli::quantile_table;
use ellvar::published::{ALPHAS, QUANTILE_NUS};

fn main() -> ellvar::Result<()> {
    println!("{:>6} {:>6} {:>9} {:>9} {:>10} {:>10}", "alpha", "nu", "q", "ref q", "ES mult", "ref ES");
    for row in quantile_table(&ALPHAS, &QUANTILE_NUS, true)? {
        let cell = |v: Option<f64>, bad: Option<bool>| match (v, bad) {
            (Some(v), Some(true)) => format!("{v:.5}*"),
            (Some(v), _) => format!("{v:.5}"),
            (None, _) => "-".into(),
        };
        println!(
            "{:>6} {:>6} {:>9.5} {:>9} {:>10} {:>10}",
            row.alpha,
            row.nu,
            row.quantile,
            cell(row.published_quantile, row.quantile_erratum),
            row.es_multiplier.map_or("-".into(), |m| format!("{m:.5}")),
            cell(row.published_es_multiplier, row.es_erratum),
        );
    }
    println!("* reference value disagrees with an independent computation");
    Ok(())
}
