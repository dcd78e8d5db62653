use proptest::prelude::*;

use gibbs_stein::bounds::{self, LambdaPair};
use gibbs_stein::compare::{self, tv_distance, GNormSource};
use gibbs_stein::lattice::{self, InteractionModel, PointRule};
use gibbs_stein::size_bias::{self, CouplingSpec};
use gibbs_stein::stein::{self, SolveRoute};
use gibbs_stein::{GibbsMeasure, TestFunction};

fn measure() -> impl Strategy<Value = GibbsMeasure> {
    (0.2f64..5.0, prop::collection::vec(-1.0f64..1.0, 1..40)).prop_map(|(omega, steps)| {
        let mut v = vec![0.0];
        for s in steps {
            v.push(v.last().unwrap() + s);
        }
        GibbsMeasure::from_potential(omega, v).unwrap()
    })
}

fn measure_with_f() -> impl Strategy<Value = (GibbsMeasure, Vec<f64>)> {
    measure().prop_flat_map(|m| {
        let n = m.support_max() + 1;
        (Just(m), prop::collection::vec(0.0f64..=1.0, n))
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detailed_balance(m in measure()) {
        let pmf = m.pmf();
        for k in 0..m.support_max() {
            let lhs = pmf[k] * m.birth_rate(k).unwrap();
            let rhs = pmf[k + 1] * (k + 1) as f64;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs).max(1e-300));
        }
    }

    #[test]
    fn generator_has_mean_zero((m, g) in measure_with_f()) {
        let mut table = vec![0.0];
        table.extend_from_slice(&g);
        let s: f64 = (0..=m.support_max())
            .map(|k| m.pmf()[k] * stein::apply_generator(&m, &table, k).unwrap())
            .sum();
        prop_assert!(s.abs() < 1e-10, "{s}");
    }

    #[test]
    fn solution_solves((m, f) in measure_with_f()) {
        let tf = TestFunction::new(f.clone()).unwrap();
        let sol = stein::solve(&m, &tf).unwrap();
        prop_assert!(stein::max_relative_residual(&m, &sol, &f) <= 1e-10);
        let fwd = stein::solve_values(&m, &f, SolveRoute::Forward).unwrap();
        let bwd = stein::solve_values(&m, &f, SolveRoute::Backward).unwrap();
        // a partial sum of O(1) terms carries absolute error ~1e-16 before
        // division by k·pmf(k)
        for k in 1..=m.support_max() {
            let slack = 1e-13 / (k as f64 * m.pmf()[k]);
            let (a, b) = (fwd.at(k), bwd.at(k));
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0) + slack, "k={} {} {}", k, a, b);
        }
    }

    #[test]
    fn exact_suprema_dominate_and_are_attained((m, f) in measure_with_f()) {
        let tf = TestFunction::new(f).unwrap();
        let sol = stein::solve(&m, &tf).unwrap();
        for j in 1..=m.support_max() {
            let sg = stein::sup_solution_exact(&m, j).unwrap();
            let sd = stein::sup_increment_exact(&m, j).unwrap();
            prop_assert!(sol.at(j).abs() <= sg * (1.0 + 1e-12) + 1e-15);
            prop_assert!(sol.increment(j).abs() <= sd * (1.0 + 1e-12) + 1e-15);
            let ind = stein::extremal_increment_indicator(&m, j).unwrap();
            let hit = stein::solve(&m, &ind).unwrap().increment(j).abs();
            prop_assert!(close(hit, sd, 1e-10));
        }
        prop_assert!(sol.sup_norm() <= stein::sup_norm_exact(&m) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn licensed_certificates_dominate(m in measure()) {
        for c in bounds::all_certificates(&m) {
            if let (true, Some(v), Some(exact)) = (c.licensed, c.value, bounds::exact_counterpart(&m, &c)) {
                prop_assert!(exact <= v * (1.0 + 1e-10) + 1e-12, "{:?} {exact} > {v}", c.formula);
            }
        }
    }

    #[test]
    fn reparametrization_is_invisible(m in measure(), alpha in 0.05f64..20.0) {
        let r = m.reparametrize(alpha).unwrap();
        for (a, b) in m.pmf().iter().zip(r.pmf()) {
            prop_assert!(close(*a, *b, 1e-12));
        }
        let (p, q) = (LambdaPair::of(&m), LambdaPair::of(&r));
        prop_assert!(close(p.lambda1, q.lambda1, 1e-12) && close(p.lambda2, q.lambda2, 1e-12));
    }

    #[test]
    fn json_round_trip(m in measure()) {
        let back = GibbsMeasure::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back.pmf(), m.pmf());
    }

    #[test]
    fn tv_is_a_metric(a in measure(), b in measure(), c in measure()) {
        let (p, q, r) = (a.pmf(), b.pmf(), c.pmf());
        let pq = tv_distance(p, q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&pq));
        prop_assert_eq!(pq, tv_distance(q, p).unwrap());
        prop_assert!(pq <= tv_distance(p, r).unwrap() + tv_distance(r, q).unwrap() + 1e-15);
    }

    #[test]
    fn comparison_dominates_tv(a in measure(), b in measure()) {
        let rep = compare::compare(&a, &b, GNormSource::Exact).unwrap();
        prop_assert!(rep.total_bound() >= rep.exact_tv - 1e-10, "{} < {}", rep.total_bound(), rep.exact_tv);
        prop_assert!(rep.tail_term >= 0.0);
    }

    #[test]
    fn restriction_is_sharp((m, cut) in measure().prop_flat_map(|m| {
        let n = m.support_max();
        (Just(m), 0..n)
    })) {
        let r = m.restrict(cut).unwrap();
        let rep = compare::compare(&r, &m, GNormSource::Exact).unwrap();
        let tail = m.cumulatives().survival_at(cut + 1);
        prop_assert!((rep.exact_tv - tail).abs() < 1e-12);
        prop_assert!((rep.total_bound() - tail).abs() < 1e-12);
    }

    #[test]
    fn size_bias_identity((m, f) in measure_with_f()) {
        let sb = size_bias::size_bias(m.pmf()).unwrap();
        let lhs: f64 = m.pmf().iter().zip(&f).enumerate().map(|(k, (p, v))| k as f64 * p * v).sum();
        let rhs: f64 = sb.mean() * sb.biased().iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn sum_size_bias_matches_enumeration(p in prop::collection::vec(0.0f64..=1.0, 1..10)) {
        prop_assume!(p.iter().sum::<f64>() > 0.0);
        let spec = CouplingSpec::independent(&p).unwrap();
        let law = spec.enumerate_sum_law().unwrap();
        for (a, b) in law.iter().zip(spec.sum_law()) {
            prop_assert!((a - b).abs() < 1e-14);
        }
        let direct = size_bias::size_bias(&law).unwrap();
        for (a, b) in size_bias::sum_size_bias(&spec).iter().zip(direct.biased()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_sum_chain(p in prop::collection::vec(0.0f64..=1.0, 1..12)) {
        prop_assume!(p.iter().sum::<f64>() > 0.0);
        let r = lattice::poisson_sum_bounds(&CouplingSpec::independent(&p).unwrap()).unwrap();
        let improved = r.bound_improved.unwrap();
        prop_assert!(r.exact_tv <= improved + 1e-12);
        prop_assert!(improved <= r.bound_4_8.unwrap() + 1e-15);
        prop_assert!(r.bound_4_5 <= r.bound_4_6 + 1e-15);
        prop_assert!(r.exact_tv <= r.bound_4_5 + 1e-12);
    }

    #[test]
    fn normalizer_independence(n in 2usize..9, z in 0.1f64..4.0, alpha in 0.1f64..10.0) {
        let mu = lattice::lattice_measure(&InteractionModel::repelling(), n, z).unwrap();
        let scaled = mu.reparametrize(alpha).unwrap();
        for (a, b) in mu.pmf().iter().zip(scaled.pmf()) {
            prop_assert!(close(*a, *b, 1e-12));
        }
    }
}

#[test]
fn grid_sums_match_closed_forms() {
    for model in [InteractionModel::repelling(), InteractionModel::product(), InteractionModel::ideal_gas()] {
        for n in 1..=8 {
            for k in 0..=n.min(5) {
                let fast = model.wn(n, k).unwrap();
                let grid = model.brute_force_wn(n, k).unwrap();
                assert!(close(fast, grid, 1e-10), "{} n={n} k={k}: {fast} vs {grid}", model.name());
            }
        }
    }
}

#[test]
fn grid_sum_independent_of_thread_count() {
    let model = InteractionModel::custom("wiggle", PointRule::Midpoint, |x| {
        1.0 + x.iter().map(|v| (7.0 * v).sin()).sum::<f64>().powi(2)
    });
    let many = model.brute_force_wn(9, 5).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| model.brute_force_wn(9, 5).unwrap());
    assert_eq!(many.to_bits(), one.to_bits());
}
