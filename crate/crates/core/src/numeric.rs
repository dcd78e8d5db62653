//! Log-space helpers shared by the measure, solver and bound modules.

use crate::error::{Error, Result};

/// Stable `ln Σ exp(x_i)`. Returns `-inf` for an empty slice or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln k!`.
pub fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// `ln Γ(x)`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Harmonic partial sum `Σ_{ℓ = min(x,y)+1}^{max(x,y)} 1/ℓ`; zero when `x == y`.
pub fn harmonic_gap(x: usize, y: usize) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    ((lo + 1)..=hi).map(|l| 1.0 / l as f64).sum()
}

/// Normalization tolerance used for probability-vector inputs.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Validate a probability vector: finite, nonnegative, summing to one.
pub fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Empty);
    }
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::NotNormalized(format!("entry {i} = {x}")));
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(format!("sum = {total}")));
    }
    Ok(())
}

/// Law of a sum of independent Bernoulli variables by iterated convolution.
pub fn bernoulli_sum_law(ps: &[f64]) -> Vec<f64> {
    let mut law = vec![1.0];
    for &p in ps {
        let mut next = vec![0.0; law.len() + 1];
        for (k, &w) in law.iter().enumerate() {
            next[k] += w * (1.0 - p);
            next[k + 1] += w * p;
        }
        law = next;
    }
    law
}

/// How an infinite-support law is cut down to a finite window `{0, …, N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    /// Smallest `N` whose discarded tail mass is at most the tolerance.
    Tolerance(f64),
    /// Fixed window `{0, …, N}`.
    Bound(usize),
}

impl Default for TailRule {
    fn default() -> Self {
        TailRule::Tolerance(DEFAULT_TAIL_TOLERANCE)
    }
}

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-14;

const MAX_SERIES_TERMS: usize = 200_000;

/// Result of truncating a convergent series of unnormalized log weights.
#[derive(Debug, Clone)]
pub(crate) struct SeriesWindow {
    /// Unnormalized log weights on `0..=N`.
    pub log_terms: Vec<f64>,
    /// Mass of the untruncated law beyond `N`.
    pub tail_mass: f64,
    /// Tolerance the window was chosen for, if any.
    pub tolerance: Option<f64>,
}

/// Sum the series `Σ_k exp(log_term(k))` far enough that the remainder is
/// negligible, then pick the truncation window prescribed by `rule`.
///
/// The remainder past the last evaluated term is bounded by a geometric series
/// using the last term ratio, which assumes the ratios are eventually
/// nonincreasing (true for every family built here).
pub(crate) fn truncate_series(
    log_term: impl Fn(usize) -> f64,
    rule: TailRule,
) -> Result<SeriesWindow> {
    let tol = match rule {
        TailRule::Tolerance(t) => {
            if !(t > 0.0 && t < 1.0) {
                return Err(crate::error::param(
                    "truncation_tolerance",
                    format!("{t} not in (0, 1)"),
                ));
            }
            Some(t)
        }
        TailRule::Bound(_) => None,
    };
    let min_len = match rule {
        TailRule::Bound(n) => n + 1,
        TailRule::Tolerance(_) => 1,
    };
    let stop_rel = tol.map_or(1e-22, |t| (t * 1e-6).min(1e-22));

    let mut terms: Vec<f64> = Vec::new();
    let mut running = f64::NEG_INFINITY;
    let remainder;
    loop {
        let k = terms.len();
        if k >= MAX_SERIES_TERMS {
            return Err(Error::Divergent(format!(
                "partial sums not settled after {MAX_SERIES_TERMS} terms"
            )));
        }
        let t = log_term(k);
        if t.is_nan() || t == f64::INFINITY {
            return Err(Error::Divergent(format!("term {k} is {t}")));
        }
        terms.push(t);
        running = log_sum_exp(&[running, t]);
        if k >= 2 && terms.len() >= min_len {
            let ratio = (t - terms[k - 1]).exp();
            if t == f64::NEG_INFINITY {
                remainder = 0.0;
                break;
            }
            if ratio < 1.0 {
                let rel = (t - running).exp() * ratio / (1.0 - ratio);
                if rel < stop_rel {
                    remainder = rel;
                    break;
                }
            }
        }
    }

    // Suffix masses relative to the full (approximated) total.
    let log_total = running + remainder.ln_1p();
    let mut tails = vec![0.0; terms.len()];
    let mut acc = remainder / (1.0 + remainder);
    for k in (0..terms.len()).rev() {
        tails[k] = acc;
        acc += (terms[k] - log_total).exp();
    }
    let n = match rule {
        TailRule::Bound(n) => n,
        TailRule::Tolerance(t) => tails
            .iter()
            .position(|&tail| tail <= t)
            .unwrap_or(terms.len() - 1),
    };
    terms.truncate(n + 1);
    Ok(SeriesWindow {
        log_terms: terms,
        tail_mass: tails[n],
        tolerance: tol,
    })
}
