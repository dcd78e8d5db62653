//! Total-variation distance and bounds obtained by comparing the birth rates
//! of two Gibbs measures.
//!
//! For `g_a` the Stein solution of `μ_a` and `X_b ~ μ_b`,
//!
//! ```text
//! Ef(X_b) − μ_a(f) = E X_b · E[g_a(X_b*) (b_a/b_b − 1)(X_b* − 1)] + boundary,
//! b_a/b_b = (ω_a/ω_b) e^{ΔV_a − ΔV_b},
//! ```
//!
//! where the sum runs over the common support. When `μ_a` lives on a larger
//! support than `μ_b`, the top point of `μ_b` contributes the boundary term
//! `μ_b(n) b_a(n) g_a(n+1)`. When it lives on a smaller one, the solution is
//! continued as a pure-death process and the mass of `μ_b` above the support
//! of `μ_a` enters as a separate tail term.

use serde::{Deserialize, Serialize};

use crate::bounds::LambdaPair;
use crate::error::{Error, Result};
use crate::gibbs::GibbsMeasure;
use crate::numeric::NORMALIZATION_TOL;
use crate::size_bias::size_bias;
use crate::stein;

/// `½ Σ |p(k) − q(k)|`, padding the shorter table with zeros.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    for (name, law) in [("p", p), ("q", q)] {
        if law.is_empty() {
            return Err(Error::Empty);
        }
        let total: f64 = law.iter().sum();
        if law.iter().any(|x| !x.is_finite() || *x < 0.0) || (total - 1.0).abs() > NORMALIZATION_TOL
        {
            return Err(Error::NotNormalized(format!("{name}: sum = {total}")));
        }
    }
    let len = p.len().max(q.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    Ok(0.5 * (0..len).map(|k| (at(p, k) - at(q, k)).abs()).sum::<f64>())
}

/// Where the `‖g‖` factors come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum GNormSource {
    /// `sup_f ‖g_f‖` by sign-pattern maximization.
    Exact,
    /// Uniform bound from the birth-rate range.
    RateRange,
    /// Rate-range bound for the solution continued above a finite support.
    ExtendedRateRange,
    /// Caller-provided norms for the solutions of the first and second measure.
    UserSupplied { g1: f64, g2: f64 },
}

impl GNormSource {
    pub fn label(&self) -> &'static str {
        match self {
            GNormSource::Exact => "exact",
            GNormSource::RateRange => "rate_range",
            GNormSource::ExtendedRateRange => "extended_rate_range",
            GNormSource::UserSupplied { .. } => "user_supplied",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Solution of the first measure, expectations under the second.
    Direction1To2,
    /// Solution of the second measure, expectations under the first.
    Direction2To1,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::Direction1To2 => "direction_1_to_2",
            Branch::Direction2To1 => "direction_2_to_1",
        }
    }
}

/// Terms of one comparison branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTerms {
    /// `‖g_a‖` used; infinite when no bound is available.
    pub g_norm: f64,
    /// `E X_b · P(X_b* ≤ cap) · |ω_a − ω_b|/ω_b`.
    pub omega_term: f64,
    /// `E X_b · (ω_a/ω_b) · E|e^{ΔV_a − ΔV_b}(X_b* − 1) − 1| 1{X_b* ≤ cap}`.
    pub ratio_term: f64,
    /// `μ_b(n) b_a(n) ‖g_a‖` when `μ_b` stops at `n` below the top of `μ_a`.
    pub boundary_term: f64,
    /// `‖g_a‖ (omega_term + ratio_term) + boundary_term`.
    pub value: f64,
}

/// One branch with the solution of `ma` and expectations under `mb`.
pub fn branch_terms(ma: &GibbsMeasure, mb: &GibbsMeasure, g_norm: f64) -> BranchTerms {
    let na = ma.support_max();
    let nb = mb.support_max();
    let cap = na.min(nb);
    let (wa, wb) = (ma.omega(), mb.omega());
    let mean_b = mb.mean();
    let (mut omega_term, mut ratio_term) = (0.0, 0.0);
    if mean_b > 0.0 {
        let sb = size_bias(mb.pmf()).expect("positive mean");
        let star = sb.biased();
        let mut mass = 0.0;
        let mut ratio = 0.0;
        for (m, &w) in star.iter().enumerate().take(cap + 1).skip(1) {
            mass += w;
            let exponent = ma.potential_step(m - 1) - mb.potential_step(m - 1);
            ratio += w * (exponent.exp() - 1.0).abs();
        }
        omega_term = mean_b * mass * (wa - wb).abs() / wb;
        ratio_term = mean_b * (wa / wb) * ratio;
    }
    let boundary_term = if na > nb {
        let b = mb.pmf_at(nb) * ma.birth_rate_unchecked(nb);
        if b == 0.0 {
            0.0
        } else {
            b * g_norm
        }
    } else {
        0.0
    };
    let main = omega_term + ratio_term;
    let value = if main == 0.0 { 0.0 } else { g_norm * main } + boundary_term;
    BranchTerms {
        g_norm,
        omega_term,
        ratio_term,
        boundary_term,
        value,
    }
}

/// Result of a generator comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub measure_1: String,
    pub measure_2: String,
    pub exact_tv: f64,
    /// Minimum over the two branches, without the tail term.
    pub bound_value: f64,
    pub branch_used: Branch,
    pub branch_1_to_2: BranchTerms,
    pub branch_2_to_1: BranchTerms,
    /// `Σ_{k>n} μ_2(k)`; zero for equal supports.
    pub tail_term: f64,
    pub g_norm_source: GNormSource,
}

impl ComparisonReport {
    /// `bound_value + tail_term`.
    pub fn total_bound(&self) -> f64 {
        self.bound_value + self.tail_term
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "m1,m2,exact_tv,bound,branch,tail,g_norm_source";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{},{:.16e},{}",
            csv_field(&self.measure_1),
            csv_field(&self.measure_2),
            self.exact_tv,
            self.bound_value,
            self.branch_used.label(),
            self.tail_term,
            self.g_norm_source.label()
        )
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn norm_for(m: &GibbsMeasure, source: GNormSource, first: bool) -> f64 {
    match source {
        GNormSource::Exact => stein::sup_norm_exact(m),
        GNormSource::RateRange | GNormSource::ExtendedRateRange => {
            LambdaPair::of(m).supnorm_value().unwrap_or(f64::INFINITY)
        }
        GNormSource::UserSupplied { g1, g2 } => {
            if first {
                g1
            } else {
                g2
            }
        }
    }
}

fn check_source(source: GNormSource) -> Result<()> {
    if let GNormSource::UserSupplied { g1, g2 } = source {
        if !(g1 >= 0.0 && g2 >= 0.0) {
            return Err(crate::error::param("g_norm", "user norms must be nonnegative"));
        }
    }
    Ok(())
}

fn assemble(
    m1: &GibbsMeasure,
    m2: &GibbsMeasure,
    source: GNormSource,
    tail_term: f64,
) -> Result<ComparisonReport> {
    check_source(source)?;
    let b12 = branch_terms(m1, m2, norm_for(m1, source, true));
    let b21 = branch_terms(m2, m1, norm_for(m2, source, false));
    let (bound_value, branch_used) = if b12.value <= b21.value {
        (b12.value, Branch::Direction1To2)
    } else {
        (b21.value, Branch::Direction2To1)
    };
    Ok(ComparisonReport {
        measure_1: m1.kind().label(),
        measure_2: m2.kind().label(),
        exact_tv: tv_distance(m1.pmf(), m2.pmf())?,
        bound_value,
        branch_used,
        branch_1_to_2: b12,
        branch_2_to_1: b21,
        tail_term,
        g_norm_source: source,
    })
}

/// Comparison of two measures on the same support.
pub fn generator_comparison_bound(
    m1: &GibbsMeasure,
    m2: &GibbsMeasure,
    source: GNormSource,
) -> Result<ComparisonReport> {
    if m1.support_max() != m2.support_max() {
        return Err(Error::SupportMismatch(format!(
            "supports {{0..{}}} and {{0..{}}} differ; use generator_comparison_extended",
            m1.support_max(),
            m2.support_max()
        )));
    }
    assemble(m1, m2, source, 0.0)
}

/// Comparison of `m1` on `{0..n}` with `m2` on `{0..N}`, `N > n`.
pub fn generator_comparison_extended(
    m1: &GibbsMeasure,
    m2: &GibbsMeasure,
    source: GNormSource,
) -> Result<ComparisonReport> {
    let (n, big) = (m1.support_max(), m2.support_max());
    if n >= big {
        return Err(Error::SupportMismatch(format!(
            "first support {{0..{n}}} must be strictly inside {{0..{big}}}"
        )));
    }
    let tail = m2.cumulatives().survival_at(n + 1);
    assemble(m1, m2, source, tail)
}

/// Pick the same-support or nested-support comparison. Measures are swapped
/// so that the first has the smaller support; the report names them in the
/// order used.
pub fn compare(
    m1: &GibbsMeasure,
    m2: &GibbsMeasure,
    source: GNormSource,
) -> Result<ComparisonReport> {
    use std::cmp::Ordering;
    match m1.support_max().cmp(&m2.support_max()) {
        Ordering::Equal => generator_comparison_bound(m1, m2, source),
        Ordering::Less => generator_comparison_extended(m1, m2, source),
        Ordering::Greater => {
            let swapped = match source {
                GNormSource::UserSupplied { g1, g2 } => GNormSource::UserSupplied { g1: g2, g2: g1 },
                s => s,
            };
            generator_comparison_extended(m2, m1, swapped)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::MeasureKind;
    use crate::numeric::TailRule;

    fn poisson(lambda: f64, n: usize) -> GibbsMeasure {
        GibbsMeasure::builtin(MeasureKind::Poisson { lambda }, TailRule::Bound(n)).unwrap()
    }

    #[test]
    fn tv_basics() {
        assert_eq!(tv_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv_distance(&[1.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(tv_distance(&[0.5, 0.4], &[1.0]).is_err());
    }

    #[test]
    fn tv_equals_best_set() {
        let p = [0.1, 0.4, 0.2, 0.3];
        let q = [0.25, 0.25, 0.25, 0.25];
        let best = (0u32..16)
            .map(|set| {
                (0..4)
                    .filter(|k| set >> k & 1 == 1)
                    .map(|k| p[k] - q[k])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        assert!((tv_distance(&p, &q).unwrap() - best).abs() < 1e-15);
    }

    #[test]
    fn identical_measures_give_zero() {
        let m = GibbsMeasure::binomial(8, 0.3).unwrap();
        let r = generator_comparison_bound(&m, &m, GNormSource::Exact).unwrap();
        assert_eq!(r.bound_value, 0.0);
        assert_eq!(r.exact_tv, 0.0);
    }

    #[test]
    fn poisson_pair_reduces_to_activity_gap() {
        let (m1, m2) = (poisson(1.0, 40), poisson(1.1, 40));
        let r = generator_comparison_bound(&m1, &m2, GNormSource::Exact).unwrap();
        let b = r.branch_1_to_2;
        assert_eq!(b.ratio_term, 0.0);
        let star_mass: f64 = size_bias(m2.pmf()).unwrap().biased()[1..].iter().sum();
        assert!((b.omega_term - m2.mean() * star_mass * 0.1 / 1.1).abs() < 1e-14);
        assert!(r.bound_value >= r.exact_tv);
    }

    #[test]
    fn conditioned_poisson_is_sharp() {
        let m2 = poisson(1.0, 40);
        let m1 = m2.restrict(2).unwrap();
        let r = generator_comparison_extended(&m1, &m2, GNormSource::Exact).unwrap();
        assert_eq!(r.branch_1_to_2.value, 0.0);
        assert_eq!(r.bound_value, 0.0);
        let expected = 1.0 - 2.5 * (-1.0f64).exp();
        assert!((r.tail_term - expected).abs() < 1e-12);
        assert!((r.exact_tv - expected).abs() < 1e-12);
        assert!(generator_comparison_extended(&m2, &m1, GNormSource::Exact).is_err());
        assert!(generator_comparison_bound(&m1, &m2, GNormSource::Exact).is_err());
        let swapped = compare(&m2, &m1, GNormSource::Exact).unwrap();
        assert_eq!(swapped.measure_1, "restricted(2)");
    }

    #[test]
    fn rate_range_source_can_be_inapplicable() {
        let (a, b) = (GibbsMeasure::geometric(0.5).unwrap(), GibbsMeasure::geometric(0.5).unwrap());
        let r = generator_comparison_bound(&a, &b, GNormSource::RateRange).unwrap();
        assert_eq!(r.bound_value, 0.0);
        assert!(r.branch_1_to_2.g_norm.is_infinite());
    }

    #[test]
    fn csv_row_shape() {
        let m = GibbsMeasure::from_pmf(&[0.2, 0.5, 0.3], 1.0).unwrap();
        let r = generator_comparison_bound(&m, &m, GNormSource::Exact).unwrap();
        assert_eq!(r.csv_row().split(',').count(), 7);
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
