//! Size-bias transforms, the size-biased sum construction for sums of
//! Bernoulli variables, and the size-bias form of the Stein identity.

use serde::Deserialize;

use crate::error::{param, Error, Result};
use crate::gibbs::GibbsMeasure;
use crate::numeric::{bernoulli_sum_law, check_probability_vector, NORMALIZATION_TOL};
use crate::stein::{self, TestFunction};

/// A law and its size-biased version `x·P(X = x)/EX`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeBiasLaw {
    base: Vec<f64>,
    biased: Vec<f64>,
    mean: f64,
}

impl SizeBiasLaw {
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn biased(&self) -> &[f64] {
        &self.biased
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

pub fn size_bias(base: &[f64]) -> Result<SizeBiasLaw> {
    check_probability_vector(base)?;
    let mean: f64 = base.iter().enumerate().map(|(x, p)| x as f64 * p).sum();
    if mean <= 0.0 {
        return Err(param("base", "mean must be positive"));
    }
    let biased = base
        .iter()
        .enumerate()
        .map(|(x, p)| x as f64 * p / mean)
        .collect();
    Ok(SizeBiasLaw {
        base: base.to_vec(),
        biased,
        mean,
    })
}

/// Sum `S_n` of Bernoulli variables with the conditional laws of
/// `Ŝ_{n,i} = Σ_{j≠i} X̂_j` given `X_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    p: Vec<f64>,
    conditional: Vec<Vec<f64>>,
    sum_law: Vec<f64>,
    independent: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingInput {
    #[serde(default)]
    p: Option<Vec<f64>>,
    #[serde(default)]
    independent: bool,
    #[serde(default)]
    conditional_sums: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    sum_law: Option<Vec<f64>>,
    /// Joint law over `{0,1}^n`, bit `i` of the index giving `X_i`.
    #[serde(default)]
    configurations: Option<Vec<f64>>,
}

fn check_means(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
        return Err(param("p", format!("{x} not in [0, 1]")));
    }
    let lambda: f64 = p.iter().sum();
    if lambda <= 0.0 {
        return Err(param("p", "at least one mean must be positive"));
    }
    Ok(lambda)
}

fn pad(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    v.resize(len.max(v.len()), 0.0);
    v
}

impl CouplingSpec {
    /// Independent indicators with `Ŝ_{n,i} = S_n − X_i`.
    pub fn independent(p: &[f64]) -> Result<Self> {
        check_means(p)?;
        let conditional = (0..p.len())
            .map(|i| {
                let others: Vec<f64> = p
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, x)| *x)
                    .collect();
                bernoulli_sum_law(&others)
            })
            .collect();
        Ok(CouplingSpec {
            p: p.to_vec(),
            conditional,
            sum_law: bernoulli_sum_law(p),
            independent: true,
        })
    }

    /// Dependent indicators given by the conditional laws of `Ŝ_{n,i}`.
    ///
    /// The law of `S_n` is recovered from the mixture `m*` of the shifted
    /// conditional laws as `P(S_n = s) = λ m*(s)/s`; if `sum_law` is given
    /// it must agree with that.
    pub fn with_conditional_sums(
        p: &[f64],
        conditional: Vec<Vec<f64>>,
        sum_law: Option<Vec<f64>>,
    ) -> Result<Self> {
        let lambda = check_means(p)?;
        let n = p.len();
        if conditional.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: conditional.len(),
            });
        }
        for (i, law) in conditional.iter().enumerate() {
            check_probability_vector(law)
                .map_err(|e| Error::InconsistentCoupling(format!("law of index {i}: {e}")))?;
            if let Some(s) = law.iter().rposition(|&x| x > 0.0) {
                if s >= n {
                    return Err(Error::InconsistentCoupling(format!(
                        "index {i} puts mass on {s} > n - 1"
                    )));
                }
            }
        }
        let conditional: Vec<Vec<f64>> = conditional.into_iter().map(|l| pad(l, n)).collect();
        let mixture = shifted_mixture(p, &conditional);
        let mut implied = vec![0.0; n + 1];
        for s in 1..=n {
            implied[s] = lambda * mixture[s] / s as f64;
        }
        let rest: f64 = implied[1..].iter().sum();
        if rest > 1.0 + NORMALIZATION_TOL {
            return Err(Error::InconsistentCoupling(format!(
                "implied P(S_n >= 1) = {rest} exceeds 1"
            )));
        }
        implied[0] = (1.0 - rest).max(0.0);
        if let Some(given) = sum_law {
            check_probability_vector(&given)?;
            let given = pad(given, n + 1);
            if given.len() > n + 1 {
                return Err(Error::InconsistentCoupling(
                    "sum law longer than n + 1".to_string(),
                ));
            }
            let sb = size_bias(&given)?;
            let gap = sb
                .biased()
                .iter()
                .zip(&mixture)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let mean_gap = (sb.mean() - lambda).abs();
            if gap > 1e-10 || mean_gap > 1e-10 {
                return Err(Error::InconsistentCoupling(format!(
                    "mixture differs from the size-biased sum law by {gap:e} (mean gap {mean_gap:e})"
                )));
            }
        }
        Ok(CouplingSpec {
            p: p.to_vec(),
            conditional,
            sum_law: implied,
            independent: false,
        })
    }

    /// Aggregate a full joint law over `{0,1}^n`.
    pub fn from_configurations(probs: &[f64]) -> Result<Self> {
        let len = probs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(param("configurations", format!("length {len} is not 2^n, n >= 1")));
        }
        check_probability_vector(probs)?;
        let n = len.trailing_zeros() as usize;
        let mut p = vec![0.0; n];
        let mut sum_law = vec![0.0; n + 1];
        let mut conditional = vec![vec![0.0; n]; n];
        for (cfg, &w) in probs.iter().enumerate() {
            let s = cfg.count_ones() as usize;
            sum_law[s] += w;
            for i in 0..n {
                if cfg >> i & 1 == 1 {
                    p[i] += w;
                    conditional[i][s - 1] += w;
                }
            }
        }
        check_means(&p)?;
        for i in 0..n {
            if p[i] > 0.0 {
                conditional[i].iter_mut().for_each(|x| *x /= p[i]);
            } else {
                conditional[i][0] = 1.0;
            }
        }
        Ok(CouplingSpec {
            p,
            conditional,
            sum_law,
            independent: false,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let input: CouplingInput =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(cfg) = input.configurations {
            return Self::from_configurations(&cfg);
        }
        let p = input
            .p
            .ok_or_else(|| Error::Parse("missing field `p`".to_string()))?;
        match (input.independent, input.conditional_sums) {
            (true, None) => Self::independent(&p),
            (false, Some(laws)) => Self::with_conditional_sums(&p, laws, input.sum_law),
            (true, Some(_)) => Err(Error::Parse(
                "`independent` and `conditional_sums` are exclusive".to_string(),
            )),
            (false, None) => Err(Error::Parse(
                "need `independent: true`, `conditional_sums` or `configurations`".to_string(),
            )),
        }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `λ = Σ p_i = E S_n`.
    pub fn lambda(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn is_independent(&self) -> bool {
        self.independent
    }

    /// Law of `Ŝ_{n,i}` on `0..n`.
    pub fn conditional_law(&self, i: usize) -> &[f64] {
        &self.conditional[i]
    }

    /// Law of `S_n` on `0..=n`.
    pub fn sum_law(&self) -> &[f64] {
        &self.sum_law
    }

    /// Joint law of `(S_n, Ŝ_{n,i})` under index `i`, as `(s, ŝ, prob)`.
    ///
    /// Independent specs use `Ŝ_{n,i} = S_n − X_i`; otherwise the two
    /// marginals are joined by their quantile coupling.
    pub fn joint(&self, i: usize) -> Vec<(usize, usize, f64)> {
        if self.independent {
            let pi = self.p[i];
            let mut out = Vec::new();
            for (r, &w) in self.conditional[i].iter().enumerate() {
                if w > 0.0 {
                    out.push((r, r, (1.0 - pi) * w));
                    out.push((r + 1, r, pi * w));
                }
            }
            out.retain(|e| e.2 > 0.0);
            out
        } else {
            quantile_coupling(&self.sum_law, &self.conditional[i])
        }
    }

    /// Brute-force law of `S_n` for independent specs, by enumerating
    /// `{0,1}^n`.
    pub fn enumerate_sum_law(&self) -> Result<Vec<f64>> {
        if !self.independent {
            return Err(Error::Unsupported("enumeration needs an independent spec".into()));
        }
        let n = self.n();
        if n > 20 {
            return Err(param("n", "enumeration limited to n <= 20"));
        }
        let mut law = vec![0.0; n + 1];
        for cfg in 0usize..(1 << n) {
            let w: f64 = (0..n)
                .map(|i| {
                    if cfg >> i & 1 == 1 {
                        self.p[i]
                    } else {
                        1.0 - self.p[i]
                    }
                })
                .product();
            law[cfg.count_ones() as usize] += w;
        }
        Ok(law)
    }
}

/// `m*(s) = Σ_i (p_i/λ) P(Ŝ_{n,i} = s − 1)` on `0..=n`.
fn shifted_mixture(p: &[f64], conditional: &[Vec<f64>]) -> Vec<f64> {
    let lambda: f64 = p.iter().sum();
    let n = p.len();
    let mut m = vec![0.0; n + 1];
    for (pi, law) in p.iter().zip(conditional) {
        for (s, w) in law.iter().enumerate() {
            m[s + 1] += pi / lambda * w;
        }
    }
    m
}

/// Law of `S_n* = Ŝ_{n,I} + 1` with `P(I = i) = p_i/λ`.
pub fn sum_size_bias(spec: &CouplingSpec) -> Vec<f64> {
    shifted_mixture(&spec.p, &spec.conditional)
}

/// Quantile coupling of two laws on the integers.
fn quantile_coupling(a: &[f64], b: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (a.first().copied().unwrap_or(0.0), b.first().copied().unwrap_or(0.0));
    while i < a.len() && j < b.len() {
        let w = ra.min(rb);
        if w > 0.0 {
            out.push((i, j, w));
        }
        ra -= w;
        rb -= w;
        if ra <= 1e-17 {
            i += 1;
            ra = a.get(i).copied().unwrap_or(0.0);
        }
        if rb <= 1e-17 {
            j += 1;
            rb = b.get(j).copied().unwrap_or(0.0);
        }
    }
    out
}

fn check_law_support(law: &[f64], name: &'static str) -> Result<()> {
    check_probability_vector(law).map_err(|e| match e {
        Error::NotNormalized(msg) => Error::NotNormalized(format!("{name}: {msg}")),
        other => other,
    })
}

/// `b_k`, zero at and beyond the top of the support.
fn rate(m: &GibbsMeasure, k: usize) -> f64 {
    if k <= m.support_max() {
        m.birth_rate_unchecked(k)
    } else {
        0.0
    }
}

/// `ω {E e^{ΔV(W)} g(W+1) − E e^{ΔV(W)} E g(W*)}` with `g` the Stein
/// solution of `m` for `f`.
///
/// Equals `Ef(W) − μ(f)` when `W*` is the size bias of `W` and
/// `EW = ω E e^{ΔV(W)}`; see [`generator_residual`] for the form that does
/// not need the second condition.
pub fn stein_residual_via_size_bias(
    m: &GibbsMeasure,
    w: &[f64],
    wstar: &[f64],
    f: &TestFunction,
) -> Result<f64> {
    check_law_support(w, "W")?;
    check_law_support(wstar, "W*")?;
    let sol = stein::solve(m, f)?;
    let weighted: f64 = w
        .iter()
        .enumerate()
        .map(|(k, p)| p * rate(m, k) * sol.at(k + 1))
        .sum();
    let rate_mean: f64 = w.iter().enumerate().map(|(k, p)| p * rate(m, k)).sum();
    let g_star: f64 = wstar.iter().enumerate().map(|(k, p)| p * sol.at(k)).sum();
    Ok(weighted - rate_mean * g_star)
}

/// `E b(W) g(W+1) − EW·E g(W*)`, equal to `Ef(W) − μ(f)` whenever `W*` is
/// the size bias of `W` and `W` lives on the support of `m`.
pub fn generator_residual(
    m: &GibbsMeasure,
    w: &[f64],
    wstar: &[f64],
    f: &TestFunction,
) -> Result<f64> {
    check_law_support(w, "W")?;
    check_law_support(wstar, "W*")?;
    let sol = stein::solve(m, f)?;
    let weighted: f64 = w
        .iter()
        .enumerate()
        .map(|(k, p)| p * rate(m, k) * sol.at(k + 1))
        .sum();
    let mean: f64 = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let g_star: f64 = wstar.iter().enumerate().map(|(k, p)| p * sol.at(k)).sum();
    Ok(weighted - mean * g_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::MeasureKind;
    use crate::numeric::TailRule;

    #[test]
    fn small_table() {
        let sb = size_bias(&[0.5, 0.25, 0.25]).unwrap();
        assert!((sb.mean() - 0.75).abs() < 1e-15);
        let b = sb.biased();
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 1.0 / 3.0).abs() < 1e-15 && (b[2] - 2.0 / 3.0).abs() < 1e-15);
        assert!(size_bias(&[1.0]).is_err());
        assert!(size_bias(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn bernoulli_biases_to_one() {
        for p in [0.1, 0.5, 1.0] {
            let sb = size_bias(&[1.0 - p, p]).unwrap();
            assert_eq!(sb.biased(), &[0.0, 1.0]);
        }
    }

    #[test]
    fn poisson_bias_is_shift() {
        let m = GibbsMeasure::builtin(MeasureKind::Poisson { lambda: 2.0 }, TailRule::Bound(60))
            .unwrap();
        let sb = size_bias(m.pmf()).unwrap();
        for k in 1..=60 {
            assert!((sb.biased()[k] - m.pmf()[k - 1]).abs() < 1e-14);
        }
    }

    #[test]
    fn independent_pair() {
        let spec = CouplingSpec::independent(&[0.5, 0.5]).unwrap();
        assert_eq!(sum_size_bias(&spec), vec![0.0, 0.5, 0.5]);
        let one = CouplingSpec::independent(&[0.3]).unwrap();
        assert_eq!(sum_size_bias(&one), vec![0.0, 1.0]);
    }

    #[test]
    fn configurations_aggregate() {
        // X_1 = X_2 with probability 1, each Be(0.4).
        let probs = [0.6, 0.0, 0.0, 0.4];
        let spec = CouplingSpec::from_configurations(&probs).unwrap();
        assert!((spec.p()[0] - 0.4).abs() < 1e-15);
        assert_eq!(spec.conditional_law(0), &[0.0, 1.0]);
        assert_eq!(spec.sum_law(), &[0.6, 0.0, 0.4]);
        let sb = size_bias(spec.sum_law()).unwrap();
        assert_eq!(sum_size_bias(&spec), sb.biased());
    }

    #[test]
    fn conditional_sums_recover_sum_law() {
        let spec = CouplingSpec::from_json(
            r#"{"p": [0.4, 0.4], "conditional_sums": [[0.0, 1.0], [0.0, 1.0]]}"#,
        )
        .unwrap();
        let law = spec.sum_law();
        assert!((law[0] - 0.6).abs() < 1e-15 && law[1].abs() < 1e-15 && (law[2] - 0.4).abs() < 1e-15);
        let bad = CouplingSpec::from_json(
            r#"{"p": [0.4, 0.4], "conditional_sums": [[0.0, 1.0], [0.0, 1.0]], "sum_law": [0.36, 0.48, 0.16]}"#,
        );
        assert!(matches!(bad, Err(Error::InconsistentCoupling(_))));
        let too_much = CouplingSpec::with_conditional_sums(&[1.0, 1.0], vec![vec![1.0, 0.0]; 2], None);
        assert!(matches!(too_much, Err(Error::InconsistentCoupling(_))));
    }

    #[test]
    fn joint_marginals() {
        let spec = CouplingSpec::independent(&[0.2, 0.5, 0.7]).unwrap();
        for i in 0..3 {
            let joint = spec.joint(i);
            let mut s = [0.0; 4];
            for (a, b, w) in &joint {
                s[*a] += w;
                assert!(a - b <= 1);
            }
            for (a, b) in s.iter().zip(spec.sum_law()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        let dep = CouplingSpec::from_configurations(&[0.6, 0.0, 0.0, 0.4]).unwrap();
        let total: f64 = dep.joint(1).iter().map(|e| e.2).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_vanishes_under_target() {
        let m = GibbsMeasure::binomial(6, 0.35).unwrap();
        let sb = size_bias(m.pmf()).unwrap();
        let f = TestFunction::indicator(7, [0, 3]).unwrap();
        let r = stein_residual_via_size_bias(&m, m.pmf(), sb.biased(), &f).unwrap();
        assert!(r.abs() < 1e-12);
        let c = TestFunction::constant(7, 0.4).unwrap();
        assert!(stein_residual_via_size_bias(&m, m.pmf(), sb.biased(), &c).unwrap().abs() < 1e-15);
        assert!(stein_residual_via_size_bias(&m, m.pmf(), &[0.5], &f).is_err());
    }
}
