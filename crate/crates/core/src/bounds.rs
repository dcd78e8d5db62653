//! Stein factors in closed form, the rate conditions that license them, and
//! certificates pairing each value with the checks it relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{GibbsMeasure, MeasureKind};
use crate::stein;

/// Relative slack allowed when checking rate inequalities.
pub const CONDITION_SLACK: f64 = 1e-12;

/// `(inf b_k, sup b_k)` over `0 ≤ k ≤ N−1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Computed on a truncation window without a closed-form envelope, so
    /// the untruncated law may have rates outside this range.
    pub window_limited: bool,
}

impl LambdaPair {
    pub fn of(m: &GibbsMeasure) -> Self {
        if let Some(env) = m.rate_envelope() {
            return LambdaPair {
                lambda1: env.inf,
                lambda2: env.sup,
                window_limited: false,
            };
        }
        let n = m.support_max();
        let (lo, hi) = (0..n)
            .map(|k| m.birth_rate_unchecked(k))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), b| (lo.min(b), hi.max(b)));
        let (lo, hi) = if n == 0 { (0.0, 0.0) } else { (lo, hi) };
        LambdaPair {
            lambda1: lo,
            lambda2: hi,
            window_limited: m.truncation().is_some(),
        }
    }

    /// Whether the uniform sup-norm bound applies: `λ1 > 0`, `λ2 < ∞`.
    pub fn admits_supnorm_bound(&self) -> bool {
        self.lambda1 > 0.0 && self.lambda2.is_finite()
    }

    /// `2 + ½ (λ2/(λ1+1))^{λ2−λ1−2}` when `λ2 − 2 ≥ λ1`, else 2.
    pub fn supnorm_value(&self) -> Option<f64> {
        if !self.admits_supnorm_bound() {
            return None;
        }
        let (l1, l2) = (self.lambda1, self.lambda2);
        if l2 - 2.0 >= l1 {
            Some(2.0 + 0.5 * (l2 / (l1 + 1.0)).powf(l2 - l1 - 2.0))
        } else {
            Some(2.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionName {
    /// `k F(k)/F(k−1) ≥ b_k ≥ k F̄(k+1)/F̄(k)`.
    TwoSidedRatio,
    /// `b_k ≤ b_{k−1}`.
    NonincreasingBirthRates,
    /// `b_k ≥ k F̄(k+1)/F̄(k)`.
    LowerTailRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: ConditionName,
    pub holds: bool,
    /// Smallest `k` at which the inequality fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<usize>,
}

fn at_least(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - CONDITION_SLACK * lhs.abs().max(rhs.abs())
}

/// Evaluate the three rate conditions for `1 ≤ k ≤ N−1`.
pub fn check_conditions(m: &GibbsMeasure) -> Vec<ConditionCheck> {
    let n = m.support_max();
    let cum = m.cumulatives();
    let mut upper = None;
    let mut lower = None;
    let mut mono = None;
    for k in 1..n {
        let b = m.birth_rate_unchecked(k);
        let kf = k as f64;
        let up = kf * cum.cdf_at(k) / cum.cdf_at(k - 1);
        let low = kf * cum.survival_at(k + 1) / cum.survival_at(k);
        if upper.is_none() && !at_least(up, b) {
            upper = Some(k);
        }
        if lower.is_none() && !at_least(b, low) {
            lower = Some(k);
        }
        if mono.is_none() && !at_least(m.birth_rate_unchecked(k - 1), b) {
            mono = Some(k);
        }
    }
    let two_sided = match (upper, lower) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let check = |name, first_violation: Option<usize>| ConditionCheck {
        name,
        holds: first_violation.is_none(),
        first_violation,
    };
    vec![
        check(ConditionName::TwoSidedRatio, two_sided),
        check(ConditionName::NonincreasingBirthRates, mono),
        check(ConditionName::LowerTailRatio, lower),
    ]
}

/// Look up one condition from [`check_conditions`].
pub fn condition(m: &GibbsMeasure, name: ConditionName) -> ConditionCheck {
    check_conditions(m)
        .into_iter()
        .find(|c| c.name == name)
        .expect("all conditions are evaluated")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `sup_f ‖g_f‖`.
    SupNormG,
    /// `sup_f |Δg_f(j)|`.
    SupIncrementAtJ,
    /// `sup_f |g_f(j)|`.
    SolutionAtJ,
    /// `sup_f |Δg_f(j)|` for the binomial operator with death rates
    /// `(1−p)k`, whose solution is the native one divided by `1−p`.
    ClassicalIncrementAtJ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// Sign-pattern maximization of the solution functional.
    ExactSupremum,
    /// `F̄(j+1)/b_j + F(j−1)/j`.
    IncrementEquality,
    /// `1/j ∧ 1/b_j`.
    IncrementSimple,
    /// `(min{ln j, E X} + 1/b_0)/F̄(j)`.
    NonuniformSolution,
    /// `2 + ½(λ2/(λ1+1))^{λ2−λ1−2}`.
    UniformSupNorm,
    /// Uniform bound continued by `1/j` above the support.
    ExtendedSolution,
    /// `1/j ∧ 1/b_j` on the support, `1/j` above.
    ExtendedIncrement,
    /// `1/k ∧ (1 − e^{−λ})/λ`.
    PoissonIncrement,
    /// `1/k ∧ 1/λ`.
    PoissonIncrementBasic,
    /// `1 ∧ λ^{−1/2}`.
    PoissonSupNorm,
    /// `1/j ∧ (1−p)/(p(n−j))`.
    BinomialIncrement,
    /// `1/((1−p)j) ∧ 1/(p(n−j))`.
    BinomialClassicalIncrement,
    /// `(j+1 − (1−p)^j)/(j(j+1))`.
    GeometricIncrement,
    /// `1/j ∧ (1+p)/(j+1)`.
    GeometricIncrementSimple,
    /// `1/p`.
    GeometricSupNorm,
    /// `(min{ln j, 1/p} + 1/(1−p))/(1−p)^j`.
    GeometricNonuniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    ExactEquality,
    UpperBound,
}

/// A bound value together with the formula and the checks licensing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub quantity: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    /// `None` when the formula does not apply.
    pub value: Option<f64>,
    pub formula: Formula,
    pub conditions: Vec<ConditionCheck>,
    pub exactness: Exactness,
    /// All listed conditions hold and the formula is applicable.
    pub licensed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundCertificate {
    fn new(
        quantity: Quantity,
        j: Option<usize>,
        value: Option<f64>,
        formula: Formula,
        conditions: Vec<ConditionCheck>,
        exactness: Exactness,
    ) -> Self {
        let licensed = value.is_some() && conditions.iter().all(|c| c.holds);
        BoundCertificate {
            quantity,
            j,
            value,
            formula,
            conditions,
            exactness,
            licensed,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }
}

fn check_j(m: &GibbsMeasure, j: usize) -> Result<()> {
    let n = m.support_max();
    if j == 0 || j > n {
        return Err(Error::OutOfRange {
            index: j,
            range: format!("1..={n}"),
        });
    }
    Ok(())
}

/// `1/b_j`, infinite where `b_j = 0`.
fn inverse_rate(m: &GibbsMeasure, j: usize) -> f64 {
    1.0 / m.birth_rate_unchecked(j)
}

/// `F̄(j+1)/b_j + F(j−1)/j`, with `0·∞ = 0` at `j = N`.
pub fn increment_equality_value(m: &GibbsMeasure, j: usize) -> Result<f64> {
    check_j(m, j)?;
    let cum = m.cumulatives();
    let tail = cum.survival_at(j + 1);
    let upper = if tail == 0.0 {
        0.0
    } else {
        tail * inverse_rate(m, j)
    };
    Ok(upper + cum.cdf_before(j) / j as f64)
}

/// Pair of increment certificates at `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBounds {
    pub equality: BoundCertificate,
    pub simple: BoundCertificate,
}

/// The equality form and the simpler `1/j ∧ 1/b_j` bound on `sup_f |Δg_f(j)|`.
pub fn increment_bound(m: &GibbsMeasure, j: usize) -> Result<IncrementBounds> {
    let cond = vec![condition(m, ConditionName::TwoSidedRatio)];
    let equality = BoundCertificate::new(
        Quantity::SupIncrementAtJ,
        Some(j),
        Some(increment_equality_value(m, j)?),
        Formula::IncrementEquality,
        cond.clone(),
        Exactness::ExactEquality,
    );
    let simple = BoundCertificate::new(
        Quantity::SupIncrementAtJ,
        Some(j),
        Some((1.0 / j as f64).min(inverse_rate(m, j))),
        Formula::IncrementSimple,
        cond,
        Exactness::UpperBound,
    );
    Ok(IncrementBounds { equality, simple })
}

/// `(min{ln j, E X} + 1/b_0)/F̄(j)` bounding `sup_f |g_f(j)|`.
pub fn solution_bound_nonuniform(m: &GibbsMeasure, j: usize) -> Result<BoundCertificate> {
    check_j(m, j)?;
    let log_branch = if j == 1 { 0.0 } else { (j as f64).ln() };
    let head = log_branch.min(m.mean());
    let value = (head + inverse_rate(m, 0)) / m.cumulatives().survival_at(j);
    Ok(BoundCertificate::new(
        Quantity::SolutionAtJ,
        Some(j),
        Some(value),
        Formula::NonuniformSolution,
        vec![condition(m, ConditionName::LowerTailRatio)],
        Exactness::UpperBound,
    ))
}

/// Uniform bound on `sup_f ‖g_f‖` from the birth-rate range.
pub fn supnorm_bound(m: &GibbsMeasure) -> BoundCertificate {
    let pair = LambdaPair::of(m);
    let cert = BoundCertificate::new(
        Quantity::SupNormG,
        None,
        pair.supnorm_value(),
        Formula::UniformSupNorm,
        Vec::new(),
        Exactness::UpperBound,
    );
    let note = format!("lambda1={}, lambda2={}", pair.lambda1, pair.lambda2);
    match (pair.admits_supnorm_bound(), pair.window_limited) {
        (false, _) => cert.with_note(format!("inapplicable: {note}")),
        (true, true) => cert.with_note(format!("window-limited: {note}")),
        (true, false) => cert.with_note(note),
    }
}

/// Bound on `sup_f |g_f(j)|` over the vanishing class for the solution
/// continued above the support `{0, …, n}`; any `j ≥ 1`.
pub fn extended_solution_bound(m: &GibbsMeasure, j: usize) -> BoundCertificate {
    let n = m.support_max();
    if j > n {
        return BoundCertificate::new(
            Quantity::SolutionAtJ,
            Some(j),
            Some(1.0 / j as f64),
            Formula::ExtendedSolution,
            Vec::new(),
            Exactness::UpperBound,
        );
    }
    let pair = LambdaPair::of(m);
    BoundCertificate::new(
        Quantity::SolutionAtJ,
        Some(j),
        pair.supnorm_value(),
        Formula::ExtendedSolution,
        Vec::new(),
        Exactness::UpperBound,
    )
}

/// Bound on `sup_f |Δg_f(j)|` for the continued solution, `j ≥ 1`.
pub fn extended_increment_bound(m: &GibbsMeasure, j: usize) -> Result<BoundCertificate> {
    if j == 0 {
        return Err(Error::OutOfRange {
            index: 0,
            range: "1..".to_string(),
        });
    }
    let n = m.support_max();
    let value = if j <= n {
        (1.0 / j as f64).min(inverse_rate(m, j))
    } else {
        1.0 / j as f64
    };
    Ok(BoundCertificate::new(
        Quantity::SupIncrementAtJ,
        Some(j),
        Some(value),
        Formula::ExtendedIncrement,
        vec![condition(m, ConditionName::TwoSidedRatio)],
        Exactness::UpperBound,
    ))
}

/// Family-specific closed forms, for the built-in kinds that have them.
pub fn closed_form_bounds(m: &GibbsMeasure) -> Vec<BoundCertificate> {
    let n = m.support_max();
    let conds = check_conditions(m);
    let two_sided: Vec<_> = conds
        .iter()
        .filter(|c| c.name == ConditionName::TwoSidedRatio)
        .copied()
        .collect();
    let mut out = Vec::new();
    let cert = |q, j, v, f, c: &Vec<ConditionCheck>, e| {
        BoundCertificate::new(q, j, Some(v), f, c.clone(), e)
    };
    match *m.kind() {
        MeasureKind::Poisson { lambda } => {
            let improved = (1.0 - (-lambda).exp()) / lambda;
            out.push(cert(
                Quantity::SupNormG,
                None,
                1f64.min(lambda.powf(-0.5)),
                Formula::PoissonSupNorm,
                &Vec::new(),
                Exactness::UpperBound,
            ));
            for j in 1..=n {
                let inv = 1.0 / j as f64;
                out.push(cert(
                    Quantity::SupIncrementAtJ,
                    Some(j),
                    inv.min(improved),
                    Formula::PoissonIncrement,
                    &two_sided,
                    Exactness::UpperBound,
                ));
                out.push(cert(
                    Quantity::SupIncrementAtJ,
                    Some(j),
                    inv.min(1.0 / lambda),
                    Formula::PoissonIncrementBasic,
                    &two_sided,
                    Exactness::UpperBound,
                ));
            }
        }
        MeasureKind::Binomial { n: trials, p } => {
            for j in 1..=n {
                let jf = j as f64;
                let rest = (trials - j) as f64;
                out.push(cert(
                    Quantity::SupIncrementAtJ,
                    Some(j),
                    (1.0 / jf).min((1.0 - p) / (p * rest)),
                    Formula::BinomialIncrement,
                    &two_sided,
                    Exactness::UpperBound,
                ));
                out.push(cert(
                    Quantity::ClassicalIncrementAtJ,
                    Some(j),
                    (1.0 / ((1.0 - p) * jf)).min(1.0 / (p * rest)),
                    Formula::BinomialClassicalIncrement,
                    &two_sided,
                    Exactness::UpperBound,
                ));
            }
        }
        MeasureKind::Geometric { p } => {
            let q = 1.0 - p;
            out.push(cert(
                Quantity::SupNormG,
                None,
                1.0 / p,
                Formula::GeometricSupNorm,
                &Vec::new(),
                Exactness::UpperBound,
            ));
            let lower: Vec<_> = conds
                .iter()
                .filter(|c| c.name == ConditionName::LowerTailRatio)
                .copied()
                .collect();
            for j in 1..=n {
                let jf = j as f64;
                let qj = q.powi(j as i32);
                out.push(cert(
                    Quantity::SupIncrementAtJ,
                    Some(j),
                    (jf + 1.0 - qj) / (jf * (jf + 1.0)),
                    Formula::GeometricIncrement,
                    &two_sided,
                    Exactness::ExactEquality,
                ));
                out.push(cert(
                    Quantity::SupIncrementAtJ,
                    Some(j),
                    (1.0 / jf).min((1.0 + p) / (jf + 1.0)),
                    Formula::GeometricIncrementSimple,
                    &two_sided,
                    Exactness::UpperBound,
                ));
                let log_branch = if j == 1 { 0.0 } else { jf.ln() };
                out.push(cert(
                    Quantity::SolutionAtJ,
                    Some(j),
                    (log_branch.min(1.0 / p) + 1.0 / q) / qj,
                    Formula::GeometricNonuniform,
                    &lower,
                    Exactness::UpperBound,
                ));
            }
        }
        _ => {}
    }
    out
}

/// Exact suprema from the solution functionals, as certificates.
pub fn exact_certificates(m: &GibbsMeasure) -> Vec<BoundCertificate> {
    let mut out = vec![BoundCertificate::new(
        Quantity::SupNormG,
        None,
        Some(stein::sup_norm_exact(m)),
        Formula::ExactSupremum,
        Vec::new(),
        Exactness::ExactEquality,
    )];
    for j in 1..=m.support_max() {
        for (q, v) in [
            (Quantity::SupIncrementAtJ, stein::sup_increment_exact(m, j)),
            (Quantity::SolutionAtJ, stein::sup_solution_exact(m, j)),
        ] {
            out.push(BoundCertificate::new(
                q,
                Some(j),
                Some(v.expect("j in range")),
                Formula::ExactSupremum,
                Vec::new(),
                Exactness::ExactEquality,
            ));
        }
    }
    out
}

/// Every generic and family-specific certificate for `m`, without the
/// exact suprema.
pub fn all_certificates(m: &GibbsMeasure) -> Vec<BoundCertificate> {
    let mut out = vec![supnorm_bound(m)];
    for j in 1..=m.support_max() {
        let inc = increment_bound(m, j).expect("j in range");
        out.push(inc.equality);
        out.push(inc.simple);
        out.push(solution_bound_nonuniform(m, j).expect("j in range"));
    }
    out.extend(closed_form_bounds(m));
    out
}

/// The exact supremum a certificate bounds, when one is defined.
pub fn exact_counterpart(m: &GibbsMeasure, cert: &BoundCertificate) -> Option<f64> {
    let n = m.support_max();
    match (cert.quantity, cert.j) {
        (Quantity::SupNormG, _) => Some(stein::sup_norm_exact(m)),
        (Quantity::SupIncrementAtJ, Some(j)) if (1..=n).contains(&j) => {
            stein::sup_increment_exact(m, j).ok()
        }
        (Quantity::SolutionAtJ, Some(j)) if (1..=n).contains(&j) => {
            stein::sup_solution_exact(m, j).ok()
        }
        (Quantity::ClassicalIncrementAtJ, Some(j)) => match *m.kind() {
            MeasureKind::Binomial { p, .. } => stein::sup_increment_exact(m, j)
                .ok()
                .map(|v| v / (1.0 - p)),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::TailRule;

    #[test]
    fn poisson_rates_are_monotone() {
        let m = GibbsMeasure::builtin(MeasureKind::Poisson { lambda: 2.0 }, TailRule::Bound(40))
            .unwrap();
        let c = condition(&m, ConditionName::NonincreasingBirthRates);
        assert!(c.holds);
        assert!(condition(&m, ConditionName::TwoSidedRatio).holds);
    }

    #[test]
    fn geometric_two_sided_ratio_holds() {
        let m = GibbsMeasure::geometric(0.3).unwrap();
        assert!(condition(&m, ConditionName::TwoSidedRatio).holds);
        assert!(!condition(&m, ConditionName::NonincreasingBirthRates).holds);
        assert_eq!(
            condition(&m, ConditionName::NonincreasingBirthRates).first_violation,
            Some(1)
        );
    }

    #[test]
    fn lambda_pairs() {
        let m = GibbsMeasure::poisson(3.0).unwrap();
        let l = LambdaPair::of(&m);
        assert_eq!((l.lambda1, l.lambda2), (3.0, 3.0));
        assert_eq!(l.supnorm_value(), Some(2.0));

        let b = GibbsMeasure::binomial(10, 0.5).unwrap();
        let l = LambdaPair::of(&b);
        assert!((l.lambda1 - 1.0).abs() < 1e-12 && (l.lambda2 - 10.0).abs() < 1e-12);
        assert!((l.supnorm_value().unwrap() - 39064.5).abs() < 1e-6);
        assert!(!l.window_limited);

        let g = GibbsMeasure::geometric(0.5).unwrap();
        let cert = supnorm_bound(&g);
        assert_eq!(cert.value, None);
        assert!(!cert.licensed);
        assert!(cert.note.unwrap().starts_with("inapplicable"));
    }

    #[test]
    fn binomial_lambda_pair_follows_rate_definition() {
        let p = 0.3;
        let b = GibbsMeasure::binomial(7, p).unwrap();
        let l = LambdaPair::of(&b);
        let w = p / (1.0 - p);
        assert!((l.lambda1 - w).abs() < 1e-12);
        assert!((l.lambda2 - 7.0 * w).abs() < 1e-12);
    }

    #[test]
    fn equality_form_matches_exact_sup() {
        let m = GibbsMeasure::binomial(12, 0.4).unwrap();
        for j in 1..=12 {
            let inc = increment_bound(&m, j).unwrap();
            assert!(inc.equality.licensed);
            let exact = stein::sup_increment_exact(&m, j).unwrap();
            assert!((inc.equality.value.unwrap() - exact).abs() < 1e-12, "j={j}");
            assert!(inc.simple.value.unwrap() >= exact - 1e-12);
        }
        assert!(increment_bound(&m, 0).is_err());
    }

    #[test]
    fn nonuniform_at_one_uses_rate_only() {
        let m = GibbsMeasure::binomial(6, 0.45).unwrap();
        let c = solution_bound_nonuniform(&m, 1).unwrap();
        let expected = 1.0 / m.birth_rate(0).unwrap() / m.cumulatives().survival_at(1);
        assert!((c.value.unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn extended_bounds_above_support() {
        let m = GibbsMeasure::binomial(4, 0.5).unwrap();
        assert_eq!(extended_solution_bound(&m, 8).value, Some(0.125));
        assert_eq!(extended_increment_bound(&m, 5).unwrap().value, Some(0.2));
        assert_eq!(extended_increment_bound(&m, 4).unwrap().value, Some(0.25));
    }

    #[test]
    fn certificate_json_fields() {
        let m = GibbsMeasure::geometric(0.5).unwrap();
        let c = &closed_form_bounds(&m)[0];
        let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(v["quantity"], "sup_norm_g");
        assert_eq!(v["formula"], "geometric_sup_norm");
        assert_eq!(v["value"], 2.0);
        assert_eq!(v["exactness"], "upper_bound");
        assert!(v["conditions"].is_array());
    }
}
