//! Lattice particle-number laws against their continuum limits.

use gibbs_stein::compare::GNormSource;
use gibbs_stein::lattice::{self, InteractionModel, LatticeBoundReport, PointRule};
use gibbs_stein::{Result, TailRule};

fn main() -> Result<()> {
    for (model, ns) in [
        (InteractionModel::repelling(), 2..=6),
        (InteractionModel::product(), 3..=7),
        (InteractionModel::ideal_gas(), 2..=6),
    ] {
        println!("== {}", model.name());
        println!("{}", LatticeBoundReport::CSV_HEADER);
        for n in ns {
            let r = lattice::theorem_4_2_bound(&model, n, 1.0, 1.0, TailRule::Bound(60), GNormSource::Exact)?;
            println!("{}", r.csv_row());
        }
    }
    let p = InteractionModel::product();
    println!("product ratio sum at n=5: {:.6e}", lattice::ratio_sum(&p, 5, 1.0)?);

    // a separable custom interaction: W from quadrature, W_n from the grid sum
    let custom = InteractionModel::separable("tilted", PointRule::Midpoint, |k, x| 1.0 + x / k as f64);
    for k in 1..=3 {
        println!("tilted k={k}: W = {:.10}, W_6 = {:.10}", custom.w(k)?, custom.wn(6, k)?);
    }
    let mu6 = lattice::lattice_measure(&custom, 6, 1.0)?;
    println!("tilted mu_6: {:?}", mu6.pmf());
    Ok(())
}
