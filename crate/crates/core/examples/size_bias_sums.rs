//! Size-biased laws and the size-biased sum of Bernoulli indicators.

use gibbs_stein::size_bias::{self, CouplingSpec};
use gibbs_stein::{GibbsMeasure, Result, TestFunction};

fn main() -> Result<()> {
    let b = size_bias::size_bias(&[0.7, 0.3])?;
    println!("Bernoulli(0.3) size-biased: {:?}", b.biased());

    let spec = CouplingSpec::independent(&[0.1, 0.4, 0.25, 0.05])?;
    println!("lambda = {}", spec.lambda());
    println!("law of S:  {:?}", spec.sum_law());
    let built = size_bias::sum_size_bias(&spec);
    let direct = size_bias::size_bias(spec.sum_law())?;
    println!("S* built:  {built:?}");
    println!("S* direct: {:?}", direct.biased());

    // Ef(S) − μ(f) recovered from the generator written with S*
    let target = GibbsMeasure::poisson(spec.lambda())?;
    let f = TestFunction::indicator(target.support_max() + 1, [0, 1])?;
    let lhs = size_bias::generator_residual(&target, spec.sum_law(), &built, &f)?;
    let ef: f64 = spec.sum_law().iter().take(2).sum();
    println!("via S*: {lhs:.15}, direct: {:.15}", ef - target.expectation(f.values())?);

    // dependent indicators from an explicit table over {0,1}^2
    let dep = CouplingSpec::from_configurations(&[0.5, 0.1, 0.1, 0.3])?;
    println!("dependent pair: p = {:?}, law of S = {:?}", dep.p(), dep.sum_law());
    println!("joint (S, S_i) for i=0: {:?}", dep.joint(0));
    Ok(())
}
