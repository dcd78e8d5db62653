//! Discrete Gibbs measures on `{0, …, N}`.
//!
//! A measure is stored through its activity `ω > 0` and potential `V`, with
//!
//! ```text
//! μ(k) = exp(V(k)) ω^k / (k! 𝒵),   k = 0, …, N.
//! ```
//!
//! Every distribution with contiguous support `{0, …, N}` has such a
//! representation. It is not unique: `(αω, V(k) − k ln α)` describes the same
//! law for every `α > 0`, and adding a constant to `V` only changes `𝒵`.
//! Everything downstream uses `ω` and differences of `V`, so the choice is
//! observationally neutral.
//!
//! With unit per-capita death rates `d_k = k`, the birth rates
//! `b_k = ω exp(V(k+1) − V(k)) = (k+1) μ(k+1)/μ(k)` make `μ` the reversible
//! stationary law of a birth–death chain.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::numeric::{
    check_probability_vector, ln_factorial, ln_gamma, log_sum_exp, truncate_series, SeriesWindow,
    TailRule,
};

/// Where a measure came from. Serialized as the `kind` / `params` pair of the
/// measure record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum MeasureKind {
    Poisson {
        lambda: f64,
    },
    Binomial {
        n: usize,
        p: f64,
    },
    Geometric {
        p: f64,
    },
    /// Number of failures before the `r`-th success, success probability `p`.
    NegativeBinomial {
        r: f64,
        p: f64,
    },
    /// `draws` items from a population of `population` containing `successes`.
    Hypergeometric {
        population: usize,
        successes: usize,
        draws: usize,
    },
    DiscreteUniform {
        max: usize,
    },
    /// Explicit probability table.
    Pmf,
    /// A measure conditioned on `{0, …, bound}`.
    Restricted {
        bound: usize,
    },
    /// Lattice particle-number law `μ_n`.
    Lattice {
        model: String,
        n: usize,
        z: f64,
    },
    /// Continuum particle-number law `μ`.
    LatticeLimit {
        model: String,
        z: f64,
    },
}

impl MeasureKind {
    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            MeasureKind::Poisson { lambda } => format!("poisson({lambda})"),
            MeasureKind::Binomial { n, p } => format!("binomial({n},{p})"),
            MeasureKind::Geometric { p } => format!("geometric({p})"),
            MeasureKind::NegativeBinomial { r, p } => format!("negative_binomial({r},{p})"),
            MeasureKind::Hypergeometric {
                population,
                successes,
                draws,
            } => format!("hypergeometric({population},{successes},{draws})"),
            MeasureKind::DiscreteUniform { max } => format!("discrete_uniform({max})"),
            MeasureKind::Pmf => "pmf".to_string(),
            MeasureKind::Restricted { bound } => format!("restricted({bound})"),
            MeasureKind::Lattice { model, n, z } => format!("lattice({model},n={n},z={z})"),
            MeasureKind::LatticeLimit { model, z } => format!("limit({model},z={z})"),
        }
    }

    /// Infimum and supremum of the birth rates of the untruncated law, for
    /// families where they are known in closed form.
    fn rate_envelope(&self) -> Option<RateEnvelope> {
        let env = |inf: f64, sup: f64| Some(RateEnvelope { inf, sup });
        match self {
            MeasureKind::Poisson { lambda } => env(*lambda, *lambda),
            MeasureKind::Geometric { p } => env(1.0 - p, f64::INFINITY),
            MeasureKind::NegativeBinomial { r, p } => env(r * (1.0 - p), f64::INFINITY),
            MeasureKind::LatticeLimit { model, z } => match model.as_str() {
                "ideal_gas" => env(*z, *z),
                // b_0 = z, b_1 = z/3, b_k = z (k+1)/(k-1) for k >= 2.
                "repelling" => env(z / 3.0, 3.0 * z),
                // b_0 = z, b_k = z k^k / (k+1)^(k+1) -> 0.
                "product" => env(0.0, *z),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Closed-form range of the birth rates of an untruncated law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEnvelope {
    pub inf: f64,
    pub sup: f64,
}

/// Truncation record of a measure that stands in for an infinite-support law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Largest retained point `N`.
    pub bound: usize,
    /// Mass of the untruncated law beyond `N`.
    pub tail_mass: f64,
    /// Tolerance the bound was chosen for, when chosen automatically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Cumulative tables `F(k) = Σ_{i≤k} μ(i)` and `F̄(k) = Σ_{i≥k} μ(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTables {
    /// `F(k)` for `k = 0..=N`.
    pub cdf: Vec<f64>,
    /// `F̄(k)` for `k = 0..=N+1`; the last entry is 0.
    pub survival: Vec<f64>,
}

impl CumulativeTables {
    fn new(pmf: &[f64]) -> Self {
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &p in pmf {
            acc += p;
            cdf.push(acc);
        }
        let mut survival = vec![0.0; pmf.len() + 1];
        let mut acc = 0.0;
        for k in (0..pmf.len()).rev() {
            acc += pmf[k];
            survival[k] = acc;
        }
        CumulativeTables { cdf, survival }
    }

    /// `F(j − 1)`, with `F(−1) = 0`.
    pub fn cdf_before(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.cdf[(j - 1).min(self.cdf.len() - 1)]
        }
    }

    /// `F(k)`, equal to 1 beyond the support.
    pub fn cdf_at(&self, k: usize) -> f64 {
        self.cdf[k.min(self.cdf.len() - 1)]
    }

    /// `F̄(k)`, equal to 0 beyond the support.
    pub fn survival_at(&self, k: usize) -> f64 {
        self.survival.get(k).copied().unwrap_or(0.0)
    }
}

/// A discrete Gibbs measure on `{0, …, N}`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GibbsMeasure {
    kind: MeasureKind,
    omega: f64,
    potential: Vec<f64>,
    log_partition: f64,
    log_pmf: Vec<f64>,
    pmf: Vec<f64>,
    cumulative: CumulativeTables,
    truncation: Option<Truncation>,
    envelope: Option<RateEnvelope>,
}

/// Log-pmf floor below which `exp` would leave the normal range.
const LOG_PMF_FLOOR: f64 = -700.0;

impl GibbsMeasure {
    /// Build from activity and potential on `0..=N`.
    pub fn from_potential(omega: f64, potential: Vec<f64>) -> Result<Self> {
        Self::from_parts(MeasureKind::Pmf, omega, potential, None)
    }

    pub(crate) fn from_parts(
        kind: MeasureKind,
        omega: f64,
        potential: Vec<f64>,
        truncation: Option<Truncation>,
    ) -> Result<Self> {
        if potential.is_empty() {
            return Err(Error::Empty);
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(param("omega", format!("{omega} must be positive and finite")));
        }
        if let Some((k, v)) = potential.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Support(format!("V({k}) = {v} inside the support")));
        }
        if let Some(t) = &truncation {
            if t.bound + 1 != potential.len() {
                return Err(Error::Parse(format!(
                    "truncation bound {} does not match potential length {}",
                    t.bound,
                    potential.len()
                )));
            }
        }
        let ln_omega = omega.ln();
        let log_weights: Vec<f64> = potential
            .iter()
            .enumerate()
            .map(|(k, v)| v + k as f64 * ln_omega - ln_factorial(k))
            .collect();
        let log_partition = log_sum_exp(&log_weights);
        let log_pmf: Vec<f64> = log_weights.iter().map(|w| w - log_partition).collect();
        if let Some(k) = log_pmf.iter().position(|&lp| lp < LOG_PMF_FLOOR) {
            return Err(Error::Underflow(k));
        }
        let pmf: Vec<f64> = log_pmf.iter().map(|lp| lp.exp()).collect();
        let cumulative = CumulativeTables::new(&pmf);
        let envelope = truncation.as_ref().and_then(|_| kind.rate_envelope());
        Ok(GibbsMeasure {
            kind,
            omega,
            potential,
            log_partition,
            log_pmf,
            pmf,
            cumulative,
            truncation,
            envelope,
        })
    }

    /// Identify a strictly positive weight table with a Gibbs measure, fixing
    /// `𝒵 = 1` by absorbing the normalizer into `V`.
    pub fn from_pmf(weights: &[f64], omega: f64) -> Result<Self> {
        Self::from_weights(MeasureKind::Pmf, weights, omega, None)
    }

    fn from_weights(
        kind: MeasureKind,
        weights: &[f64],
        omega: f64,
        truncation: Option<Truncation>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::Support(format!("weight {w} at k = {k}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(param("omega", format!("{omega} must be positive and finite")));
        }
        let log_total = log_sum_exp(&weights.iter().map(|w| w.ln()).collect::<Vec<_>>());
        let ln_omega = omega.ln();
        let potential = weights
            .iter()
            .enumerate()
            .map(|(k, w)| w.ln() - log_total + ln_factorial(k) - k as f64 * ln_omega)
            .collect();
        Self::from_parts(kind, omega, potential, truncation)
    }

    /// Build one of the standard families. `rule` only matters for families
    /// with infinite support.
    pub fn builtin(kind: MeasureKind, rule: TailRule) -> Result<Self> {
        match kind {
            MeasureKind::Poisson { lambda } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(param("lambda", format!("{lambda} must be positive")));
                }
                let ln_l = lambda.ln();
                let w = truncate_series(|k| -lambda + k as f64 * ln_l - ln_factorial(k), rule)?;
                let n = w.log_terms.len();
                Self::from_parts(kind, lambda, vec![-lambda; n], Some(truncation_record(&w)))
            }
            MeasureKind::Binomial { n, p } => {
                check_open_unit("p", p)?;
                let omega = p / (1.0 - p);
                let potential = (0..=n).map(|k| -ln_factorial(n - k)).collect();
                Self::from_parts(kind, omega, potential, None)
            }
            MeasureKind::Geometric { p } => {
                check_open_unit("p", p)?;
                let ln_q = (1.0 - p).ln();
                let w = truncate_series(|k| p.ln() + k as f64 * ln_q, rule)?;
                let potential = (0..w.log_terms.len())
                    .map(|k| ln_factorial(k) + p.ln())
                    .collect();
                Self::from_parts(kind, 1.0 - p, potential, Some(truncation_record(&w)))
            }
            MeasureKind::NegativeBinomial { r, p } => {
                check_open_unit("p", p)?;
                if !(r.is_finite() && r > 0.0) {
                    return Err(param("r", format!("{r} must be positive")));
                }
                let (ln_p, ln_q, ln_gr) = (p.ln(), (1.0 - p).ln(), ln_gamma(r));
                let log_pmf = |k: usize| {
                    ln_gamma(k as f64 + r) - ln_gr - ln_factorial(k) + r * ln_p + k as f64 * ln_q
                };
                let w = truncate_series(log_pmf, rule)?;
                let weights: Vec<f64> = w.log_terms.iter().map(|t| t.exp()).collect();
                Self::from_weights(kind, &weights, 1.0, Some(truncation_record(&w)))
            }
            MeasureKind::Hypergeometric {
                population,
                successes,
                draws,
            } => {
                if successes > population || draws > population {
                    return Err(param(
                        "hypergeometric",
                        "successes and draws must not exceed the population",
                    ));
                }
                if draws + successes > population {
                    return Err(Error::Support(format!(
                        "hypergeometric support starts at {} > 0",
                        draws + successes - population
                    )));
                }
                let top = draws.min(successes);
                let ln_choose =
                    |a: usize, b: usize| ln_factorial(a) - ln_factorial(b) - ln_factorial(a - b);
                let weights: Vec<f64> = (0..=top)
                    .map(|k| {
                        (ln_choose(successes, k) + ln_choose(population - successes, draws - k)
                            - ln_choose(population, draws))
                        .exp()
                    })
                    .collect();
                Self::from_weights(kind, &weights, 1.0, None)
            }
            MeasureKind::DiscreteUniform { max } => {
                Self::from_weights(kind, &vec![1.0; max + 1], 1.0, None)
            }
            other => Err(Error::Unsupported(format!(
                "{} is not a built-in family",
                other.label()
            ))),
        }
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::builtin(MeasureKind::Poisson { lambda }, TailRule::default())
    }

    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        Self::builtin(MeasureKind::Binomial { n, p }, TailRule::default())
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::builtin(MeasureKind::Geometric { p }, TailRule::default())
    }

    /// Law built from an infinite series of unnormalized log weights
    /// `ln W(k) + k ln z − ln k!`, truncated per `rule`.
    pub(crate) fn from_log_weight_series(
        kind: MeasureKind,
        z: f64,
        ln_w: impl Fn(usize) -> f64,
        rule: TailRule,
    ) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(param("z", format!("{z} must be positive")));
        }
        let ln_z = z.ln();
        let w = truncate_series(|k| ln_w(k) + k as f64 * ln_z - ln_factorial(k), rule)?;
        let potential = (0..w.log_terms.len()).map(ln_w).collect();
        Self::from_parts(kind, z, potential, Some(truncation_record(&w)))
    }

    pub(crate) fn with_kind(mut self, kind: MeasureKind) -> Self {
        self.envelope = self.truncation.as_ref().and_then(|_| kind.rate_envelope());
        self.kind = kind;
        self
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// `N`.
    pub fn support_max(&self) -> usize {
        self.potential.len() - 1
    }

    /// Activity `ω`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Potential `V(0..=N)`.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `ln 𝒵`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn log_pmf(&self) -> &[f64] {
        &self.log_pmf
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `μ(k)`, zero outside the support.
    pub fn pmf_at(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn cumulatives(&self) -> &CumulativeTables {
        &self.cumulative
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    /// Closed-form birth-rate range of the untruncated law, when known.
    pub fn rate_envelope(&self) -> Option<RateEnvelope> {
        self.envelope
    }

    /// `V(k + 1) − V(k)`; `−∞` at `k = N`.
    pub fn potential_step(&self, k: usize) -> f64 {
        if k + 1 < self.potential.len() {
            self.potential[k + 1] - self.potential[k]
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `b_k = ω exp(V(k+1) − V(k))`, with `b_N = 0`.
    pub fn birth_rate(&self, k: usize) -> Result<f64> {
        let n = self.support_max();
        if k > n {
            return Err(Error::OutOfRange {
                index: k,
                range: format!("0..={n}"),
            });
        }
        Ok(self.birth_rate_unchecked(k))
    }

    pub(crate) fn birth_rate_unchecked(&self, k: usize) -> f64 {
        if k >= self.support_max() {
            0.0
        } else {
            self.omega * self.potential_step(k).exp()
        }
    }

    /// Unit per-capita death rate `d_k = k`, defined for `1 ≤ k ≤ N`.
    pub fn death_rate(&self, k: usize) -> Result<f64> {
        let n = self.support_max();
        if k == 0 || k > n {
            return Err(Error::OutOfRange {
                index: k,
                range: format!("1..={n}"),
            });
        }
        Ok(k as f64)
    }

    /// `b_0, …, b_N`.
    pub fn birth_rates(&self) -> Vec<f64> {
        (0..=self.support_max())
            .map(|k| self.birth_rate_unchecked(k))
            .collect()
    }

    /// `Σ_k k μ(k)`.
    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// `ω Σ_k μ(k) exp(V(k+1) − V(k))`, the mean via the birth rates.
    pub fn mean_via_rates(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, p)| p * self.birth_rate_unchecked(k))
            .sum()
    }

    /// `μ(f) = Σ_k f(k) μ(k)`.
    pub fn expectation(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.pmf.len() {
            return Err(Error::LengthMismatch {
                expected: self.pmf.len(),
                got: f.len(),
            });
        }
        Ok(f.iter().zip(&self.pmf).map(|(a, b)| a * b).sum())
    }

    /// Same law under `(αω, V(k) − k ln α)`.
    pub fn reparametrize(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(param("alpha", format!("{alpha} must be positive")));
        }
        let ln_a = alpha.ln();
        let potential = self
            .potential
            .iter()
            .enumerate()
            .map(|(k, v)| v - k as f64 * ln_a)
            .collect();
        Self::from_parts(
            self.kind.clone(),
            self.omega * alpha,
            potential,
            self.truncation.clone(),
        )
    }

    /// The measure conditioned on `{0, …, bound}`: same `ω` and `V`, hence the
    /// same birth rates below `bound`.
    pub fn restrict(&self, bound: usize) -> Result<Self> {
        let n = self.support_max();
        if bound >= n {
            return Err(Error::OutOfRange {
                index: bound,
                range: format!("0..{n}"),
            });
        }
        Self::from_parts(
            MeasureKind::Restricted { bound },
            self.omega,
            self.potential[..=bound].to_vec(),
            None,
        )
    }

    /// Structured-text record `{kind, params, omega, V, truncation}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("measure record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: MeasureRecord =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_record(rec)
    }

    pub fn record(&self) -> MeasureRecord {
        MeasureRecord {
            kind: self.kind.clone(),
            omega: self.omega,
            potential: self.potential.clone(),
            truncation: self.truncation.clone(),
        }
    }

    pub fn from_record(rec: MeasureRecord) -> Result<Self> {
        Self::from_parts(rec.kind, rec.omega, rec.potential, rec.truncation)
    }
}

/// Serialized form of a [`GibbsMeasure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    #[serde(flatten)]
    pub kind: MeasureKind,
    pub omega: f64,
    #[serde(rename = "V")]
    pub potential: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
}

fn truncation_record(w: &SeriesWindow) -> Truncation {
    Truncation {
        bound: w.log_terms.len() - 1,
        tail_mass: w.tail_mass,
        tolerance: w.tolerance,
    }
}

fn check_open_unit(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(param(name, format!("{p} not in (0, 1)")))
    }
}

/// Check that `weights` is a valid normalized table; used by callers that
/// accept explicit laws.
pub fn validate_law(weights: &[f64]) -> Result<()> {
    check_probability_vector(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalizes_weight_table() {
        let m = GibbsMeasure::from_pmf(&[1.0, 1.0, 0.5], 1.0).unwrap();
        for (p, e) in m.pmf().iter().zip([0.4, 0.4, 0.2]) {
            assert!(close(*p, e, 1e-12));
        }
    }

    #[test]
    fn rejects_holes_and_empty() {
        assert!(matches!(
            GibbsMeasure::from_pmf(&[1.0, 0.0, 1.0], 1.0),
            Err(Error::Support(_))
        ));
        assert!(matches!(
            GibbsMeasure::from_pmf(&[0.5, -0.1], 1.0),
            Err(Error::Support(_))
        ));
        assert_eq!(GibbsMeasure::from_pmf(&[], 1.0).unwrap_err(), Error::Empty);
        assert!(GibbsMeasure::from_pmf(&[1.0], 0.0).is_err());
    }

    #[test]
    fn poisson_has_constant_potential() {
        let m = GibbsMeasure::poisson(2.0).unwrap();
        assert_eq!(m.omega(), 2.0);
        assert!(m.potential().iter().all(|&v| v == -2.0));
        for k in 0..m.support_max() {
            assert!(close(m.birth_rate(k).unwrap(), 2.0, 1e-15));
        }
        let direct: Vec<f64> = (0..=m.support_max())
            .map(|k| (-2.0 + k as f64 * 2f64.ln() - ln_factorial(k)).exp())
            .collect();
        let mass: f64 = direct.iter().sum();
        for (p, d) in m.pmf().iter().zip(&direct) {
            assert!(close(*p, d / mass, 1e-15));
        }
        let t = m.truncation().unwrap();
        assert!(t.tail_mass <= 1e-14);
    }

    #[test]
    fn truncated_geometric_matches_series() {
        let m = GibbsMeasure::builtin(MeasureKind::Geometric { p: 0.4 }, TailRule::Bound(50))
            .unwrap();
        assert_eq!(m.support_max(), 50);
        let norm = 1.0 - 0.6f64.powi(51);
        for (k, p) in m.pmf().iter().enumerate() {
            let e = 0.4 * 0.6f64.powi(k as i32) / norm;
            assert!(close(*p, e, 1e-12), "k={k}");
        }
        let tail = m.truncation().unwrap().tail_mass;
        assert!(close(tail / 0.6f64.powi(51), 1.0, 1e-10));
    }

    #[test]
    fn builtin_birth_rates() {
        let b = GibbsMeasure::binomial(10, 0.3).unwrap();
        for k in 0..=10 {
            let e = 0.3 * (10 - k) as f64 / 0.7;
            assert!(close(b.birth_rate(k).unwrap(), e, 1e-12), "k={k}");
        }
        let g = GibbsMeasure::geometric(0.5).unwrap();
        for k in 0..g.support_max() {
            assert!(close(g.birth_rate(k).unwrap(), 0.5 * (k + 1) as f64, 1e-12));
        }
        let b = GibbsMeasure::binomial(10, 0.5).unwrap();
        assert!(close(b.birth_rate(0).unwrap(), 10.0, 1e-12));
        assert!(close(b.birth_rate(9).unwrap(), 1.0, 1e-12));
        assert_eq!(b.birth_rate(10).unwrap(), 0.0);
        assert!(b.birth_rate(11).is_err());
        assert!(b.death_rate(0).is_err());
        assert_eq!(b.death_rate(3).unwrap(), 3.0);
    }

    #[test]
    fn uniform_and_hypergeometric() {
        let u = GibbsMeasure::builtin(MeasureKind::DiscreteUniform { max: 3 }, TailRule::default())
            .unwrap();
        assert!(u.pmf().iter().all(|&p| close(p, 0.25, 1e-15)));
        let h = GibbsMeasure::builtin(
            MeasureKind::Hypergeometric {
                population: 20,
                successes: 7,
                draws: 5,
            },
            TailRule::default(),
        )
        .unwrap();
        assert_eq!(h.support_max(), 5);
        // C(7,2) C(13,3) / C(20,5)
        assert!(close(h.pmf()[2], 21.0 * 286.0 / 15504.0, 1e-12));
        assert!(matches!(
            GibbsMeasure::builtin(
                MeasureKind::Hypergeometric {
                    population: 10,
                    successes: 7,
                    draws: 5
                },
                TailRule::default()
            ),
            Err(Error::Support(_))
        ));
    }

    #[test]
    fn negative_binomial_mean() {
        let m = GibbsMeasure::builtin(
            MeasureKind::NegativeBinomial { r: 3.0, p: 0.4 },
            TailRule::default(),
        )
        .unwrap();
        assert!(close(m.mean(), 3.0 * 0.6 / 0.4, 1e-10));
        assert!(close(m.birth_rate(4).unwrap(), 0.6 * 7.0, 1e-10));
        assert_eq!(m.rate_envelope().unwrap().sup, f64::INFINITY);
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(GibbsMeasure::poisson(0.0).is_err());
        assert!(GibbsMeasure::binomial(5, 1.0).is_err());
        assert!(GibbsMeasure::geometric(-0.1).is_err());
        assert!(GibbsMeasure::builtin(MeasureKind::Pmf, TailRule::default()).is_err());
    }

    #[test]
    fn means_agree() {
        let m = GibbsMeasure::builtin(MeasureKind::Poisson { lambda: 3.0 }, TailRule::Bound(60))
            .unwrap();
        assert!(close(m.mean(), 3.0, 1e-10));
        assert!(close(m.mean_via_rates(), m.mean(), 1e-10));
        let g = GibbsMeasure::builtin(MeasureKind::Geometric { p: 0.5 }, TailRule::Bound(80))
            .unwrap();
        assert!(close(g.mean(), 1.0, 1e-10));
        assert!(close(g.expectation(&vec![1.0; 81]).unwrap(), 1.0, 1e-12));
        assert!(g.expectation(&[1.0]).is_err());
    }

    #[test]
    fn cumulative_invariants() {
        let m = GibbsMeasure::binomial(12, 0.35).unwrap();
        let c = m.cumulatives();
        let n = m.support_max();
        assert!(close(c.cdf[n], 1.0, 1e-12));
        assert!(close(c.survival[0], 1.0, 1e-12));
        for k in 0..n {
            assert!(close(c.cdf[k] + c.survival[k + 1], 1.0, 1e-12));
        }
    }

    #[test]
    fn restriction_keeps_rates() {
        let m = GibbsMeasure::poisson(1.0).unwrap();
        let r = m.restrict(2).unwrap();
        let s = m.pmf()[0] + m.pmf()[1] + m.pmf()[2];
        assert!(close(r.pmf()[2], m.pmf()[2] / s, 1e-15));
        assert_eq!(r.birth_rate(1).unwrap(), m.birth_rate(1).unwrap());
        assert!(r.truncation().is_none());
        assert!(m.restrict(m.support_max()).is_err());
    }

    #[test]
    fn json_record_shape() {
        let m = GibbsMeasure::geometric(0.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["kind"], "geometric");
        assert_eq!(v["params"]["p"], 0.5);
        assert!(v["V"].is_array());
        assert_eq!(v["truncation"]["bound"], m.support_max());
        let p = GibbsMeasure::from_pmf(&[1.0, 2.0], 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["kind"], "pmf");
        assert!(v.get("truncation").is_none());
        assert!(GibbsMeasure::from_json("{\"kind\":\"pmf\"}").is_err());
    }
}
