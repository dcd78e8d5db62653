//! Closed-form solutions of the Stein equation
//!
//! ```text
//! b_k g(k+1) − k g(k) = f(k) − μ(f),   0 ≤ k ≤ N,   g(0) = 0,
//! ```
//!
//! and exact suprema of `|g_f(j)|` and `|Δg_f(j)|` over test functions with
//! values in `[0, 1]`.
//!
//! Substituting `μ(k) = e^{V(k)} ω^k / (k! 𝒵)` into the explicit solution gives
//!
//! ```text
//! g(j+1) =  Σ_{k≤j} μ(k) (f(k) − μ(f)) / ((j+1) μ(j+1))
//!        = −Σ_{k>j} μ(k) (f(k) − μ(f)) / ((j+1) μ(j+1)),
//! ```
//!
//! which needs neither factorials, powers of `ω`, nor the partition function.

use crate::error::{Error, Result};
use crate::gibbs::GibbsMeasure;

/// A test function with values in `[0, 1]`.
///
/// When `vanishes_above` is set the function is zero beyond that point (the
/// class used with extended generators).
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    values: Vec<f64>,
    vanishes_above: Option<usize>,
}

impl TestFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && **v <= 1.0))
        {
            return Err(Error::TestFunctionRange { index, value });
        }
        Ok(TestFunction {
            values,
            vanishes_above: None,
        })
    }

    /// Member of the vanishing class: zero above `support_max`.
    pub fn vanishing(values: Vec<f64>, support_max: usize) -> Result<Self> {
        let mut f = Self::new(values)?;
        if let Some((index, &value)) = f
            .values
            .iter()
            .enumerate()
            .skip(support_max + 1)
            .find(|(_, v)| **v != 0.0)
        {
            return Err(Error::NotVanishing { index, value });
        }
        f.vanishes_above = Some(support_max);
        Ok(f)
    }

    /// Indicator of `set` on `0..len`.
    pub fn indicator(len: usize, set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut values = vec![0.0; len];
        for k in set {
            if k >= len {
                return Err(Error::OutOfRange {
                    index: k,
                    range: format!("0..{len}"),
                });
            }
            values[k] = 1.0;
        }
        Self::new(values)
    }

    pub fn constant(len: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vanishes_above(&self) -> Option<usize> {
        self.vanishes_above
    }
}

/// Which partial sum evaluates `g(j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveRoute {
    /// Sum over `k ≤ j`.
    Forward,
    /// Sum over `k > j`.
    Backward,
    /// Per `j`, the partial sum with the smaller accumulated magnitude.
    Auto,
}

/// Table of `g_f` on `0..=M+1` together with `μ(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinSolution {
    g: Vec<f64>,
    mean_f: f64,
    support_max: usize,
    extended: bool,
}

impl SteinSolution {
    /// The value table; `g()[0] = 0`.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `g(k)`, continued beyond the table by `μ(f)/k` for extended
    /// solutions and by 0 otherwise.
    pub fn at(&self, k: usize) -> f64 {
        match self.g.get(k) {
            Some(v) => *v,
            None if self.extended => self.mean_f / k as f64,
            None => 0.0,
        }
    }

    /// `Δg(j) = g(j+1) − g(j)`.
    pub fn increment(&self, j: usize) -> f64 {
        self.at(j + 1) - self.at(j)
    }

    /// `μ(f)`.
    pub fn mean_f(&self) -> f64 {
        self.mean_f
    }

    /// Largest point of the measure's support.
    pub fn support_max(&self) -> usize {
        self.support_max
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// `max_k |g(k)|` over the table.
    pub fn sup_norm(&self) -> f64 {
        self.g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Solve the Stein equation of `m` for `f`.
pub fn solve(m: &GibbsMeasure, f: &TestFunction) -> Result<SteinSolution> {
    solve_with_route(m, f, SolveRoute::Auto)
}

pub fn solve_with_route(
    m: &GibbsMeasure,
    f: &TestFunction,
    route: SolveRoute,
) -> Result<SteinSolution> {
    solve_values(m, f.values(), route)
}

/// Solve for an arbitrary real-valued `f` on `0..=N`.
pub fn solve_values(m: &GibbsMeasure, f: &[f64], route: SolveRoute) -> Result<SteinSolution> {
    let n = m.support_max();
    let mean_f = m.expectation(f)?;
    let pmf = m.pmf();
    // f(k) − μ(f) = f(k) μ(1−f) − (1−f(k)) μ(f): keeps the complement mass
    // when μ(f) rounds to 1
    let mean_rest: f64 = f.iter().zip(pmf).map(|(fk, p)| p * (1.0 - fk)).sum();
    let centered: Vec<f64> = f
        .iter()
        .zip(pmf)
        .map(|(fk, p)| p * (fk * mean_rest - (1.0 - fk) * mean_f))
        .collect();

    // forward[j] = Σ_{k≤j}, backward[j] = −Σ_{k>j}, with matching magnitudes.
    let mut forward = vec![0.0; n + 1];
    let mut forward_abs = vec![0.0; n + 1];
    let (mut s, mut a) = (0.0, 0.0);
    for k in 0..=n {
        s += centered[k];
        a += centered[k].abs();
        forward[k] = s;
        forward_abs[k] = a;
    }
    let mut backward = vec![0.0; n + 1];
    let mut backward_abs = vec![0.0; n + 1];
    let (mut s, mut a) = (0.0, 0.0);
    for k in (0..=n).rev() {
        backward[k] = -s;
        backward_abs[k] = a;
        s += centered[k];
        a += centered[k].abs();
    }

    let mut g = vec![0.0; n + 2];
    for j in 0..n {
        let use_forward = match route {
            SolveRoute::Forward => true,
            SolveRoute::Backward => false,
            SolveRoute::Auto => forward_abs[j] <= backward_abs[j],
        };
        let partial = if use_forward { forward[j] } else { backward[j] };
        g[j + 1] = partial / ((j + 1) as f64 * pmf[j + 1]);
    }
    Ok(SteinSolution {
        g,
        mean_f,
        support_max: n,
        extended: false,
    })
}

/// `(𝒜g)(k) = g(k+1) ω e^{V(k+1)−V(k)} − k g(k)` for `g` on `0..=N+1`.
pub fn apply_generator(m: &GibbsMeasure, g: &[f64], k: usize) -> Result<f64> {
    let n = m.support_max();
    if k > n {
        return Err(Error::OutOfRange {
            index: k,
            range: format!("0..={n}"),
        });
    }
    if g.len() < n + 2 {
        return Err(Error::LengthMismatch {
            expected: n + 2,
            got: g.len(),
        });
    }
    Ok(m.birth_rate_unchecked(k) * g[k + 1] - k as f64 * g[k])
}

/// Largest relative residual of the Stein equation over `0..=N`, scaled by
/// the largest of `|b_k g(k+1)|`, `|k g(k)|` and `|f(k) − μ(f)|`.
pub fn max_relative_residual(m: &GibbsMeasure, sol: &SteinSolution, f: &[f64]) -> f64 {
    (0..=m.support_max())
        .map(|k| {
            let birth = m.birth_rate_unchecked(k) * sol.at(k + 1);
            let death = k as f64 * sol.at(k);
            let target = f[k] - sol.mean_f;
            let scale = birth.abs().max(death.abs()).max(target.abs());
            let r = (birth - death - target).abs();
            if scale > 0.0 {
                r / scale
            } else {
                r
            }
        })
        .fold(0.0, f64::max)
}

/// Solution for the generator continued as a pure-death process above the
/// support: `g` as usual on `0..=n` and `g(k) = μ(f)/k` for `n < k ≤ domain_max + 1`.
pub fn solve_extended(
    m: &GibbsMeasure,
    f: &TestFunction,
    domain_max: usize,
) -> Result<SteinSolution> {
    let n = m.support_max();
    if domain_max <= n {
        return Err(Error::OutOfRange {
            index: domain_max,
            range: format!("{}..", n + 1),
        });
    }
    if let Some((index, &value)) = f
        .values()
        .iter()
        .enumerate()
        .skip(n + 1)
        .find(|(_, v)| **v != 0.0)
    {
        return Err(Error::NotVanishing { index, value });
    }
    let mut on_support = f.values().to_vec();
    on_support.resize(n + 1, 0.0);
    let base = solve_values(m, &on_support, SolveRoute::Auto)?;
    let mut g = base.g;
    g.truncate(n + 1);
    for k in (n + 1)..=(domain_max + 1) {
        g.push(base.mean_f / k as f64);
    }
    Ok(SteinSolution {
        g,
        mean_f: base.mean_f,
        support_max: n,
        extended: true,
    })
}

/// Residuals of the extended equation on `0..=domain_max`: `(𝒜̃g)(k) − (f(k) − μ(f))`.
pub fn extended_residuals(m: &GibbsMeasure, sol: &SteinSolution, f: &TestFunction) -> Vec<f64> {
    let domain_max = sol.g.len() - 2;
    (0..=domain_max)
            .map(|k| {
                let fk = f.values().get(k).copied().unwrap_or(0.0);
                let birth = if k <= m.support_max() {
                    m.birth_rate_unchecked(k) * sol.at(k + 1)
                } else {
                    0.0
                };
                birth - k as f64 * sol.at(k) - (fk - sol.mean_f)
            })
            .collect()
}

/// Coefficients `c_k` with `g_f(j) = Σ_k c_k f(k)` for every `f`.
pub fn solution_functional(m: &GibbsMeasure, j: usize) -> Result<Vec<f64>> {
    let n = m.support_max();
    if j > n + 1 {
        return Err(Error::OutOfRange {
            index: j,
            range: format!("0..={}", n + 1),
        });
    }
    let mut c = vec![0.0; n + 1];
    if j == 0 || j == n + 1 {
        return Ok(c);
    }
    let pmf = m.pmf();
    let cum = m.cumulatives();
    let denom = j as f64 * pmf[j];
    let below = cum.survival_at(j) / denom;
    let above = cum.cdf_before(j) / denom;
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = if k < j {
            pmf[k] * below
        } else {
            -pmf[k] * above
        };
    }
    Ok(c)
}

/// Coefficients `d_k` with `Δg_f(j) = Σ_k d_k f(k)`.
pub fn increment_functional(m: &GibbsMeasure, j: usize) -> Result<Vec<f64>> {
    let n = m.support_max();
    if j > n {
        return Err(Error::OutOfRange {
            index: j,
            range: format!("0..={n}"),
        });
    }
    let upper = solution_functional(m, j + 1)?;
    let lower = solution_functional(m, j)?;
    Ok(upper.iter().zip(&lower).map(|(a, b)| a - b).collect())
}

/// Supremum of `|Σ c_k f(k)|` over `f` with values in `[0, 1]`, with the
/// maximizing indicator. Zero coefficients are left out of the indicator.
fn box_sup(c: &[f64]) -> (f64, Vec<f64>) {
    let pos: f64 = c.iter().filter(|&&x| x > 0.0).sum();
    let neg: f64 = -c.iter().filter(|&&x| x < 0.0).sum::<f64>();
    let take_pos = pos >= neg;
    let f = c
        .iter()
        .map(|&x| {
            if (take_pos && x > 0.0) || (!take_pos && x < 0.0) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    (pos.max(neg), f)
}

fn check_interior(m: &GibbsMeasure, j: usize) -> Result<()> {
    let n = m.support_max();
    if j == 0 || j > n {
        return Err(Error::OutOfRange {
            index: j,
            range: format!("1..={n}"),
        });
    }
    Ok(())
}

/// `sup_f |g_f(j)|` over `[0, 1]`-valued `f`, for `1 ≤ j ≤ N`.
pub fn sup_solution_exact(m: &GibbsMeasure, j: usize) -> Result<f64> {
    check_interior(m, j)?;
    Ok(box_sup(&solution_functional(m, j)?).0)
}

/// `sup_f |Δg_f(j)|` over `[0, 1]`-valued `f`, for `1 ≤ j ≤ N`.
pub fn sup_increment_exact(m: &GibbsMeasure, j: usize) -> Result<f64> {
    check_interior(m, j)?;
    Ok(box_sup(&increment_functional(m, j)?).0)
}

/// Indicator attaining [`sup_solution_exact`].
pub fn extremal_solution_indicator(m: &GibbsMeasure, j: usize) -> Result<TestFunction> {
    check_interior(m, j)?;
    TestFunction::new(box_sup(&solution_functional(m, j)?).1)
}

/// Indicator attaining [`sup_increment_exact`].
pub fn extremal_increment_indicator(m: &GibbsMeasure, j: usize) -> Result<TestFunction> {
    check_interior(m, j)?;
    TestFunction::new(box_sup(&increment_functional(m, j)?).1)
}

/// `sup_f ‖g_f‖` over `[0, 1]`-valued `f`; zero for a one-point support.
pub fn sup_norm_exact(m: &GibbsMeasure) -> f64 {
    (1..=m.support_max())
        .map(|j| sup_solution_exact(m, j).expect("j in range"))
        .fold(0.0, f64::max)
}

/// `sup_f max_j |Δg_f(j)|` over `[0, 1]`-valued `f`.
pub fn sup_increment_norm_exact(m: &GibbsMeasure) -> f64 {
    (1..=m.support_max())
        .map(|j| sup_increment_exact(m, j).expect("j in range"))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::MeasureKind;
    use crate::numeric::TailRule;

    fn poisson_window(lambda: f64, n: usize) -> GibbsMeasure {
        GibbsMeasure::builtin(MeasureKind::Poisson { lambda }, TailRule::Bound(n)).unwrap()
    }

    #[test]
    fn constant_f_gives_zero() {
        let m = GibbsMeasure::binomial(8, 0.4).unwrap();
        let f = TestFunction::constant(9, 0.7).unwrap();
        let sol = solve(&m, &f).unwrap();
        assert!(sol.g().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn poisson_point_indicator_first_value() {
        let m = poisson_window(1.0, 40);
        let f = TestFunction::indicator(41, [0]).unwrap();
        let sol = solve(&m, &f).unwrap();
        let e = 1.0 - (-1.0f64).exp();
        assert!((sol.g()[1] - e).abs() < 1e-12);
        assert_eq!(sol.g()[0], 0.0);
        assert_eq!(sol.g()[41], 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let m = GibbsMeasure::binomial(3, 0.4).unwrap();
        let f = TestFunction::constant(2, 0.5).unwrap();
        assert!(matches!(
            solve(&m, &f),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn test_function_validation() {
        assert!(TestFunction::new(vec![0.0, 1.2]).is_err());
        assert!(TestFunction::new(vec![]).is_err());
        assert!(TestFunction::vanishing(vec![0.5, 0.0, 0.1], 1).is_err());
        assert!(TestFunction::vanishing(vec![0.5, 0.3, 0.0], 1).is_ok());
        assert!(TestFunction::indicator(3, [3]).is_err());
    }

    #[test]
    fn generator_on_solution_reproduces_centered_f() {
        let m = GibbsMeasure::binomial(10, 0.3).unwrap();
        let f = TestFunction::indicator(11, [1, 4, 5]).unwrap();
        let sol = solve(&m, &f).unwrap();
        for k in 0..=10 {
            let a = apply_generator(&m, sol.g(), k).unwrap();
            assert!((a - (f.values()[k] - sol.mean_f())).abs() < 1e-12);
        }
        assert!(apply_generator(&m, sol.g(), 11).is_err());
        assert_eq!(apply_generator(&m, &[0.0; 12], 3).unwrap(), 0.0);
    }

    #[test]
    fn extended_solution_tail() {
        let m = GibbsMeasure::from_pmf(&[0.2, 0.5, 0.3], 1.5).unwrap();
        let f = TestFunction::vanishing(vec![0.0, 1.0, 0.25, 0.0, 0.0, 0.0], 2).unwrap();
        let sol = solve_extended(&m, &f, 5).unwrap();
        let mu_f = sol.mean_f();
        let n = 2usize;
        let lhs = sol.at(n + 1) - sol.at(n);
        let rhs = (f.values()[n] - mu_f / (n as f64 + 1.0)) / n as f64;
        assert!((lhs - rhs).abs() < 1e-12);
        for j in 3..=6 {
            assert!((sol.at(j) - mu_f / j as f64).abs() < 1e-15);
            assert!(sol.at(j).abs() <= 1.0 / j as f64);
        }
        assert!(extended_residuals(&m, &sol, &f).iter().all(|r| r.abs() < 1e-12));

        let zero = TestFunction::constant(6, 0.0).unwrap();
        let sol = solve_extended(&m, &zero, 5).unwrap();
        assert!(sol.g().iter().all(|&v| v == 0.0));

        let bad = TestFunction::new(vec![0.0, 1.0, 0.25, 0.5]).unwrap();
        assert!(matches!(
            solve_extended(&m, &bad, 5),
            Err(Error::NotVanishing { index: 3, .. })
        ));
        assert!(solve_extended(&m, &zero, 2).is_err());
    }

    #[test]
    fn geometric_increment_closed_form() {
        let m = GibbsMeasure::geometric(0.5).unwrap();
        assert!((sup_increment_exact(&m, 1).unwrap() - 0.75).abs() < 1e-12);
        let e2 = (3.0 - 0.25) / 6.0;
        assert!((sup_increment_exact(&m, 2).unwrap() - e2).abs() < 1e-12);
        assert!(sup_norm_exact(&m) <= 2.0 + 1e-10);
    }

    #[test]
    fn extremal_indicator_attains() {
        let m = GibbsMeasure::binomial(9, 0.35).unwrap();
        for j in 1..=9 {
            let f = extremal_increment_indicator(&m, j).unwrap();
            let sol = solve(&m, &f).unwrap();
            let sup = sup_increment_exact(&m, j).unwrap();
            assert!((sol.increment(j).abs() - sup).abs() < 1e-12, "j={j}");
            let f = extremal_solution_indicator(&m, j).unwrap();
            let sol = solve(&m, &f).unwrap();
            assert!((sol.at(j).abs() - sup_solution_exact(&m, j).unwrap()).abs() < 1e-12);
        }
        assert!(sup_increment_exact(&m, 0).is_err());
        assert!(sup_solution_exact(&m, 10).is_err());
    }

    #[test]
    fn functional_matches_solver() {
        let m = GibbsMeasure::from_pmf(&[0.1, 0.3, 0.2, 0.25, 0.15], 0.7).unwrap();
        let f = [0.3, 0.9, 0.1, 0.6, 0.4];
        let sol = solve_values(&m, &f, SolveRoute::Auto).unwrap();
        for j in 0..=5 {
            let c = solution_functional(&m, j).unwrap();
            let v: f64 = c.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((v - sol.at(j)).abs() < 1e-14, "j={j}");
        }
    }
}
