//! Generator comparison between two Gibbs measures.

use gibbs_stein::compare::{self, GNormSource};
use gibbs_stein::{GibbsMeasure, Result};

fn main() -> Result<()> {
    let a = GibbsMeasure::from_potential(1.0, vec![0.0, 0.1, 0.0, -0.3, -0.5])?;
    let b = GibbsMeasure::from_potential(1.2, vec![0.0, 0.0, -0.1, -0.2, -0.6])?;
    for source in [GNormSource::Exact, GNormSource::RateRange] {
        let r = compare::compare(&a, &b, source)?;
        println!(
            "{}: exact tv {:.6e}, bound {:.6e} via {}",
            source.label(),
            r.exact_tv,
            r.total_bound(),
            r.branch_used.label()
        );
    }

    // conditioning: the bound is the dropped mass, which is also the distance
    let po = GibbsMeasure::poisson(1.0)?;
    let r = compare::compare(&po.restrict(2)?, &po, GNormSource::Exact)?;
    println!("{}", compare::ComparisonReport::CSV_HEADER);
    println!("{}", r.csv_row());
    println!("1 − 2.5/e = {:.7}", 1.0 - 2.5 * (-1.0f64).exp());
    Ok(())
}
