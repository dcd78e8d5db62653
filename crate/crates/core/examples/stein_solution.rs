//! Solving the Stein equation and checking the residual.

use gibbs_stein::stein::{self, SolveRoute};
use gibbs_stein::{GibbsMeasure, Result, TestFunction};

fn main() -> Result<()> {
    let m = GibbsMeasure::binomial(10, 0.3)?;
    let f = TestFunction::indicator(11, [0, 1, 2])?;
    let sol = stein::solve(&m, &f)?;
    println!("mu(f) = {:.12}", sol.mean_f());
    println!("{:>3} {:>22} {:>22}", "j", "g(j)", "delta g(j)");
    for j in 0..=m.support_max() {
        println!("{j:>3} {:>22.15e} {:>22.15e}", sol.at(j), sol.increment(j));
    }
    println!("max relative residual: {:.2e}", stein::max_relative_residual(&m, &sol, f.values()));

    // the two partial sums agree where both are well conditioned
    let fwd = stein::solve_with_route(&m, &f, SolveRoute::Forward)?;
    let bwd = stein::solve_with_route(&m, &f, SolveRoute::Backward)?;
    println!("g(3) forward {:.15e}, backward {:.15e}", fwd.at(3), bwd.at(3));

    // vanishing f on a smaller support, solution continued above it
    let small = GibbsMeasure::poisson(1.0)?.restrict(4)?;
    let fv = TestFunction::vanishing(vec![1.0, 0.0, 1.0, 0.0, 0.5, 0.0, 0.0, 0.0], 4)?;
    let ext = stein::solve_extended(&small, &fv, 7)?;
    println!("continued g(5..7): {:.6} {:.6} {:.6}", ext.at(5), ext.at(6), ext.at(7));
    println!("extended residuals: {:?}", stein::extended_residuals(&small, &ext, &fv));
    Ok(())
}
