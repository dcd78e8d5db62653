//! Exact suprema of the solution and its increments over [0,1]-valued f,
//! next to the closed-form certificates.

use gibbs_stein::bounds::{self, LambdaPair};
use gibbs_stein::stein;
use gibbs_stein::{GibbsMeasure, Result};

fn main() -> Result<()> {
    for m in [
        GibbsMeasure::poisson(3.0)?,
        GibbsMeasure::geometric(0.5)?,
        GibbsMeasure::binomial(10, 0.5)?,
    ] {
        let pair = LambdaPair::of(&m);
        println!("== {}", m.kind().label());
        println!(
            "  rate range ({}, {}), uniform sup-norm bound {:?}, exact sup-norm {:.12}",
            pair.lambda1,
            pair.lambda2,
            pair.supnorm_value(),
            stein::sup_norm_exact(&m)
        );
        for c in bounds::check_conditions(&m) {
            println!("  {:?}: {}", c.name, c.holds);
        }
        for j in [1, 2, 5] {
            println!(
                "  j={j}: sup|dg| exact {:.12}, formula {:.12}, sup|g| exact {:.12}",
                stein::sup_increment_exact(&m, j)?,
                bounds::increment_equality_value(&m, j)?,
                stein::sup_solution_exact(&m, j)?
            );
        }
        for c in bounds::closed_form_bounds(&m).iter().filter(|c| c.j.is_none_or(|j| j <= 2)) {
            println!("  {:?} j={:?}: {:?}", c.formula, c.j, c.value);
        }
    }
    // the indicator attaining the increment supremum
    let m = GibbsMeasure::poisson(3.0)?;
    let f = stein::extremal_increment_indicator(&m, 2)?;
    let sol = stein::solve(&m, &f)?;
    println!("extremal f at j=2 gives |dg(2)| = {:.12}", sol.increment(2).abs());
    Ok(())
}
