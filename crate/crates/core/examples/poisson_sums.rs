//! Poisson approximation of sums of indicators.

use gibbs_stein::lattice::{self, PoissonSumReport};
use gibbs_stein::size_bias::CouplingSpec;
use gibbs_stein::{GibbsMeasure, MeasureKind, Result, TailRule};

fn main() -> Result<()> {
    println!("{}", PoissonSumReport::CSV_HEADER);
    let n = 6;
    let q = 1.0 / (n - 1) as f64;
    let mut skewed = vec![q * q; n];
    skewed[0] = 1.0 - q;
    for p in [vec![1.0, 0.0, 0.0], vec![0.2; 8], skewed, vec![0.05, 0.3, 0.1, 0.6]] {
        let spec = CouplingSpec::independent(&p)?;
        println!("{}", lattice::poisson_sum_bounds(&spec)?.csv_row());
    }

    // the increment-based bound against a Poisson target
    let spec = CouplingSpec::independent(&[0.05, 0.3, 0.1, 0.6])?;
    let target = GibbsMeasure::builtin(MeasureKind::Poisson { lambda: spec.lambda() }, TailRule::Bound(60))?;
    let b = lattice::proposition_4_4_bound(&target, &spec)?;
    println!(
        "increment bound {:.6e} (transport {:.6e}, fluctuation {:.1e}, licensed {})",
        b.value, b.transport_term, b.fluctuation_term, b.licensed
    );
    Ok(())
}
