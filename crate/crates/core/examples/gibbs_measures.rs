//! Building Gibbs measures: standard families, explicit tables, potentials,
//! truncation and the JSON record.

use gibbs_stein::{GibbsMeasure, MeasureKind, Result, TailRule};

fn main() -> Result<()> {
    let po = GibbsMeasure::poisson(2.0)?;
    let t = po.truncation().expect("infinite support is truncated");
    println!(
        "poisson(2): N = {}, dropped mass {:.2e}, mean {:.12}",
        po.support_max(),
        t.tail_mass,
        po.mean()
    );
    println!("birth rates b_0..b_3: {:?}", &po.birth_rates()[..4]);

    let bin = GibbsMeasure::binomial(10, 0.3)?;
    println!("binomial(10,0.3): mean {:.12}, via rates {:.12}", bin.mean(), bin.mean_via_rates());

    // fixed truncation bound instead of a tail tolerance
    let geo = GibbsMeasure::builtin(MeasureKind::Geometric { p: 0.4 }, TailRule::Bound(30))?;
    println!("geometric(0.4) on 0..=30: P(X > 30) = {:.3e}", geo.truncation().unwrap().tail_mass);

    let table = GibbsMeasure::from_pmf(&[1.0, 1.0, 0.5], 1.0)?;
    println!("pmf:1,1,0.5 -> {:?}, V = {:?}", table.pmf(), table.potential());

    let custom = GibbsMeasure::from_potential(1.5, vec![0.0, 0.3, -0.2, -1.0])?;
    let same = custom.reparametrize(10.0)?;
    println!("pmf unchanged under (10ω, V − k ln 10): {:?} vs {:?}", custom.pmf(), same.pmf());

    let json = custom.to_json();
    println!("record: {json}");
    let back = GibbsMeasure::from_json(&json)?;
    assert_eq!(back.pmf(), custom.pmf());

    let cond = po.restrict(3)?;
    println!("poisson(2) conditioned on 0..=3: {:?}", cond.pmf());
    Ok(())
}
