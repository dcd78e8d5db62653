//! Particle-number laws of lattice gases on `[0, 1]` and their continuum
//! limits, with the total-variation bounds between them and the bounds for
//! sums of indicators.
//!
//! With `n` cells, grid points `q_i` and a symmetric interaction `f_k`,
//!
//! ```text
//! W_n(k) = n^{−k} Σ_{i_1..i_k} f_k(q_{i_1}, …, q_{i_k}),    W(k) = ∫_{[0,1]^k} f_k,
//! μ_n(k) ∝ z_n^k W_n(k)/k!  on {0..n},                      μ(k) ∝ z^k W(k)/k!.
//! ```

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{condition, ConditionName};
use crate::compare::{branch_terms, csv_field, tv_distance, Branch, GNormSource};
use crate::error::{param, Error, Result};
use crate::gibbs::{GibbsMeasure, MeasureKind};
use crate::numeric::{harmonic_gap, ln_factorial, log_sum_exp, TailRule};
use crate::size_bias::CouplingSpec;
use crate::stein;

/// Largest `n^k` accepted by the brute-force grid sum.
pub const MAX_GRID_TERMS: f64 = 1e7;

const QUADRATURE_DEGREE: usize = 64;

/// Where the grid point of cell `i` sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointRule {
    /// `(2i − 1)/(2n)`.
    Midpoint,
    /// `(i − 1)/n`.
    LeftEndpoint,
}

impl PointRule {
    /// Grid point of cell `i ∈ {1..n}`.
    pub fn point(self, i: usize, n: usize) -> f64 {
        match self {
            PointRule::Midpoint => (2 * i - 1) as f64 / (2 * n) as f64,
            PointRule::LeftEndpoint => (i - 1) as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `f_k ≡ 1`.
    IdealGas,
    /// `f_k = Σ_{i≠j} (x_i − x_j)²` over ordered pairs.
    Repelling,
    /// `f_k = Π_{i<j} x_i x_j`.
    Product,
    Custom,
}

type Interaction = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Factor = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// A family of interactions `(f_k)` with its grid rule.
#[derive(Clone)]
pub struct InteractionModel {
    kind: ModelKind,
    name: String,
    point_rule: PointRule,
    interaction: Option<Interaction>,
    factor: Option<Factor>,
}

impl std::fmt::Debug for InteractionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InteractionModel")
            .field("kind", &self.kind)
            .field("name", &self.name)
            .field("point_rule", &self.point_rule)
            .field("separable", &self.factor.is_some())
            .finish()
    }
}

impl InteractionModel {
    pub fn ideal_gas() -> Self {
        Self::builtin(ModelKind::IdealGas, "ideal_gas", PointRule::Midpoint)
    }

    pub fn repelling() -> Self {
        Self::builtin(ModelKind::Repelling, "repelling", PointRule::Midpoint)
    }

    pub fn product() -> Self {
        Self::builtin(ModelKind::Product, "product", PointRule::LeftEndpoint)
    }

    fn builtin(kind: ModelKind, name: &str, point_rule: PointRule) -> Self {
        InteractionModel {
            kind,
            name: name.to_string(),
            point_rule,
            interaction: None,
            factor: None,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ideal_gas" => Ok(Self::ideal_gas()),
            "repelling" => Ok(Self::repelling()),
            "product" => Ok(Self::product()),
            other => Err(param("model", format!("unknown model `{other}`"))),
        }
    }

    /// A user interaction; `f` receives the `k` coordinates. `W` is not
    /// available for such models.
    pub fn custom(
        name: impl Into<String>,
        point_rule: PointRule,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        InteractionModel {
            kind: ModelKind::Custom,
            name: name.into(),
            point_rule,
            interaction: Some(Arc::new(f)),
            factor: None,
        }
    }

    /// A user interaction `f_k(x) = Π_i h(k, x_i)` for `k ≥ 1`; `W(k)` is
    /// `(∫_0^1 h(k, x) dx)^k` by Gauss–Legendre quadrature.
    pub fn separable(
        name: impl Into<String>,
        point_rule: PointRule,
        h: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let h: Factor = Arc::new(h);
        let hf = h.clone();
        InteractionModel {
            kind: ModelKind::Custom,
            name: name.into(),
            point_rule,
            interaction: Some(Arc::new(move |x: &[f64]| {
                x.iter().map(|&xi| hf(x.len(), xi)).product()
            })),
            factor: Some(h),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn point_rule(&self) -> PointRule {
        self.point_rule
    }

    /// `f_k(x)` with `k = x.len()`; `f_0 ≡ 1`.
    pub fn interaction(&self, x: &[f64]) -> f64 {
        if x.is_empty() {
            return 1.0;
        }
        match self.kind {
            ModelKind::IdealGas => 1.0,
            ModelKind::Repelling => {
                if x.len() < 2 {
                    return 1.0;
                }
                let mut s = 0.0;
                for (i, a) in x.iter().enumerate() {
                    for (j, b) in x.iter().enumerate() {
                        if i != j {
                            s += (a - b) * (a - b);
                        }
                    }
                }
                s
            }
            ModelKind::Product => {
                if x.len() < 2 {
                    return 1.0;
                }
                let e = (x.len() - 1) as i32;
                x.iter().map(|v| v.powi(e)).product()
            }
            ModelKind::Custom => (self.interaction.as_ref().expect("custom interaction"))(x),
        }
    }

    /// `ln W(k)`.
    pub fn ln_w(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        match self.kind {
            ModelKind::IdealGas => Ok(0.0),
            ModelKind::Repelling => Ok(if k < 2 {
                0.0
            } else {
                ((k * (k - 1)) as f64 / 6.0).ln()
            }),
            ModelKind::Product => Ok(if k < 2 { 0.0 } else { -(k as f64) * (k as f64).ln() }),
            ModelKind::Custom => {
                let h = self.factor.as_ref().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "model `{}` is not separable; W is not available",
                        self.name
                    ))
                })?;
                let rule = GaussLegendre::new(NonZeroUsize::new(QUADRATURE_DEGREE).unwrap());
                let one = rule.integrate(0.0, 1.0, |x| h(k, x));
                Ok(k as f64 * one.ln())
            }
        }
    }

    pub fn w(&self, k: usize) -> Result<f64> {
        self.ln_w(k).map(f64::exp)
    }

    /// `ln W_n(k)`, in closed form for the built-in families and by the
    /// grid sum otherwise.
    pub fn ln_wn(&self, n: usize, k: usize) -> Result<f64> {
        if n == 0 {
            return Err(param("n", "need at least one cell"));
        }
        if k > n {
            return Err(Error::OutOfRange {
                index: k,
                range: format!("0..={n}"),
            });
        }
        if k == 0 {
            return Ok(0.0);
        }
        match self.kind {
            ModelKind::IdealGas => Ok(0.0),
            ModelKind::Repelling => Ok(if k < 2 {
                0.0
            } else {
                let (kf, nf) = (k as f64, n as f64);
                (kf * (kf - 1.0) * (nf + 1.0) * (nf - 1.0) / (6.0 * nf * nf)).ln()
            }),
            ModelKind::Product => Ok(if k < 2 {
                0.0
            } else {
                let (kf, nf) = (k as f64, n as f64);
                let terms: Vec<f64> = (1..n).map(|i| (kf - 1.0) * (i as f64).ln()).collect();
                kf * (log_sum_exp(&terms) - kf * nf.ln())
            }),
            ModelKind::Custom => self.brute_force_wn(n, k).map(f64::ln),
        }
    }

    pub fn wn(&self, n: usize, k: usize) -> Result<f64> {
        self.ln_wn(n, k).map(f64::exp)
    }

    /// `W_n(k)` as the explicit `k`-fold grid sum. The outer index is split
    /// across threads and the block sums are added in index order, so the
    /// result does not depend on the thread count.
    pub fn brute_force_wn(&self, n: usize, k: usize) -> Result<f64> {
        if n == 0 {
            return Err(param("n", "need at least one cell"));
        }
        if (n as f64).powi(k as i32) > MAX_GRID_TERMS {
            return Err(Error::Unsupported(format!(
                "grid sum with {n}^{k} terms exceeds {MAX_GRID_TERMS:e}"
            )));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let points: Vec<f64> = (1..=n).map(|i| self.point_rule.point(i, n)).collect();
        let blocks: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut idx = vec![0usize; k];
                idx[0] = first;
                let mut x = vec![0.0; k];
                let mut sum = 0.0;
                loop {
                    for (xi, &i) in x.iter_mut().zip(&idx) {
                        *xi = points[i];
                    }
                    sum += self.interaction(&x);
                    // advance the odometer over positions 1..k
                    let mut pos = k;
                    loop {
                        if pos == 1 {
                            return sum;
                        }
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < n {
                            break;
                        }
                        idx[pos] = 0;
                    }
                }
            })
            .collect();
        Ok(blocks.iter().sum::<f64>() / (n as f64).powi(k as i32))
    }
}

/// `μ_n` on `{0..n}` with activity `z_n`.
pub fn lattice_measure(model: &InteractionModel, n: usize, z_n: f64) -> Result<GibbsMeasure> {
    if n == 0 {
        return Err(param("n", "need at least one cell"));
    }
    if model.kind == ModelKind::Product && n < 3 {
        return Err(param("n", "the product model needs n >= 3"));
    }
    if !(z_n.is_finite() && z_n > 0.0) {
        return Err(param("z_n", format!("{z_n} must be positive")));
    }
    let potential = (0..=n)
        .map(|k| model.ln_wn(n, k))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(k) = potential.iter().position(|v| !v.is_finite()) {
        return Err(Error::Support(format!("W_n({k}) is zero or not finite")));
    }
    let kind = MeasureKind::Lattice {
        model: model.name.clone(),
        n,
        z: z_n,
    };
    GibbsMeasure::from_potential(z_n, potential).map(|m| m.with_kind(kind))
}

/// Continuum law `μ` with activity `z`, truncated per `rule`.
pub fn limit_measure(model: &InteractionModel, z: f64, rule: TailRule) -> Result<GibbsMeasure> {
    model.ln_w(2)?;
    let kind = MeasureKind::LatticeLimit {
        model: model.name.clone(),
        z,
    };
    let m = model.clone();
    GibbsMeasure::from_log_weight_series(kind, z, move |k| m.ln_w(k).unwrap_or(f64::NAN), rule)
}

/// Limit law on a window reaching at least `min_bound`.
fn limit_window(
    model: &InteractionModel,
    z: f64,
    rule: TailRule,
    min_bound: usize,
) -> Result<GibbsMeasure> {
    let m = limit_measure(model, z, rule)?;
    if m.support_max() >= min_bound {
        Ok(m)
    } else {
        limit_measure(model, z, TailRule::Bound(min_bound))
    }
}

/// Comparison of `μ_n` with `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeBoundReport {
    pub model: String,
    pub n: usize,
    pub z_n: f64,
    pub z: f64,
    pub exact_tv: f64,
    pub theorem_4_2_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_value: Option<f64>,
    /// `max(‖g_μ‖, ‖g_{μ_n}‖)`.
    pub g_norm: f64,
    pub branch: Branch,
    pub omega_term: f64,
    pub ratio_term: f64,
    pub boundary_term: f64,
    pub tail_term: f64,
    /// Truncation bound of the limit law.
    pub window: usize,
}

impl LatticeBoundReport {
    pub const CSV_HEADER: &'static str =
        "n,exact_tv,thm42,closed_form,omega_term,ratio_term,tail_term";

    pub fn csv_row(&self) -> String {
        let closed = self
            .closed_form_value
            .map_or_else(String::new, |v| format!("{v:.16e}"));
        format!(
            "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            self.n,
            self.exact_tv,
            self.theorem_4_2_value,
            closed,
            self.omega_term,
            self.ratio_term,
            self.tail_term
        )
    }
}

/// The two-branch generator bound between `μ_n` and `μ` with a common
/// factor `max(‖g_μ‖, ‖g_{μ_n}‖)`, plus the mass of `μ` above `n`.
///
/// The branch with the solution of `μ` and expectations under `μ_n` carries
/// a boundary term at `k = n`, where `μ_n` has no births but `μ` does.
pub fn theorem_4_2_bound(
    model: &InteractionModel,
    n: usize,
    z_n: f64,
    z: f64,
    rule: TailRule,
    source: GNormSource,
) -> Result<LatticeBoundReport> {
    let mu_n = lattice_measure(model, n, z_n)?;
    let mu = limit_window(model, z, rule, n + 1)?;
    let norm = |m: &GibbsMeasure, first: bool| -> f64 {
        match source {
            GNormSource::Exact => stein::sup_norm_exact(m),
            GNormSource::RateRange | GNormSource::ExtendedRateRange => {
                crate::bounds::LambdaPair::of(m)
                    .supnorm_value()
                    .unwrap_or(f64::INFINITY)
            }
            GNormSource::UserSupplied { g1, g2 } => {
                if first {
                    g1
                } else {
                    g2
                }
            }
        }
    };
    let g = norm(&mu_n, true).max(norm(&mu, false));
    if g.is_nan() {
        return Err(param("g_norm", "not a number"));
    }
    // direction_1_to_2: solution of μ_n, expectations under μ (restricted to
    // the support of μ_n); direction_2_to_1: solution of μ under μ_n.
    let b12 = branch_terms(&mu_n, &mu, g);
    let b21 = branch_terms(&mu, &mu_n, g);
    let (terms, branch) = if b12.value <= b21.value {
        (b12, Branch::Direction1To2)
    } else {
        (b21, Branch::Direction2To1)
    };
    let tail_term = mu.cumulatives().survival_at(n + 1);
    let exact_tv = tv_distance(mu_n.pmf(), mu.pmf())?;
    let closed_form_value = match model.kind {
        ModelKind::Repelling if z == z_n => corollary_bound(model, n, z).ok(),
        ModelKind::Product if z == 1.0 && z_n == 1.0 => corollary_bound(model, n, z).ok(),
        _ => None,
    };
    Ok(LatticeBoundReport {
        model: model.name.clone(),
        n,
        z_n,
        z,
        exact_tv,
        theorem_4_2_value: terms.value + tail_term,
        closed_form_value,
        g_norm: g,
        branch,
        omega_term: terms.omega_term,
        ratio_term: terms.ratio_term,
        boundary_term: terms.boundary_term,
        tail_term,
        window: mu.support_max(),
    })
}

/// `Σ_{k=1}^{n} k μ_n(k) |W(k)W_n(k−1)/(W(k−1)W_n(k)) − 1|`.
pub fn ratio_sum(model: &InteractionModel, n: usize, z_n: f64) -> Result<f64> {
    let mu_n = lattice_measure(model, n, z_n)?;
    let mut s = 0.0;
    for k in 1..=n {
        let e = model.ln_w(k)? - model.ln_w(k - 1)? - model.ln_wn(n, k)? + model.ln_wn(n, k - 1)?;
        s += k as f64 * mu_n.pmf()[k] * (e.exp() - 1.0).abs();
    }
    Ok(s)
}

/// Closed-form bounds on `d_TV(μ_n, μ)`: for the repelling family
/// `λ^{n+1} e^λ/((n+1)! (1 + λ + λ² e^λ/6))`, for the product family at
/// `λ = 1`, `n ≥ 3`: `2 e^{e+1/e}/n + e^{1/n} n^{−(n+1)}/(n+1)!`.
pub fn corollary_bound(model: &InteractionModel, n: usize, lambda: f64) -> Result<f64> {
    match model.kind {
        ModelKind::Repelling => {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(param("lambda", format!("{lambda} must be positive")));
            }
            let z = 1.0 + lambda + lambda * lambda * lambda.exp() / 6.0;
            let ln = (n + 1) as f64 * lambda.ln() + lambda - ln_factorial(n + 1) - z.ln();
            Ok(ln.exp())
        }
        ModelKind::Product => {
            if n < 3 {
                return Err(param("n", "the product bound needs n >= 3"));
            }
            if lambda != 1.0 {
                return Err(Error::Unsupported(
                    "the product bound is stated for lambda = 1".to_string(),
                ));
            }
            let e = std::f64::consts::E;
            let nf = n as f64;
            let tail = (1.0 / nf - (nf + 1.0) * nf.ln() - ln_factorial(n + 1)).exp();
            Ok(2.0 * (e + 1.0 / e).exp() / nf + tail)
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form bound for model `{}`",
            model.name
        ))),
    }
}

/// Terms of the increment-based bound for a sum of indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSumBound {
    pub value: f64,
    /// `Σ_i (p_i/λ) E_i[b(S) min{S(S, Ŝ), |S − Ŝ|/b_{max(S,Ŝ)}}]`.
    pub transport_term: f64,
    /// `‖g‖ E|b(S) − E b(S)|`.
    pub fluctuation_term: f64,
    /// `‖g‖ |E b(S) − E S|`.
    pub mean_mismatch_term: f64,
    pub g_norm: f64,
    /// Birth rates nonincreasing.
    pub licensed: bool,
}

/// Increment-based bound on `d_TV(L(S_n), μ)` for a target with
/// nonincreasing birth rates.
///
/// `|g(a+1) − g(c+1)|` is bounded by `Σ_{j=min+1}^{max} (1/j ∧ 1/b_j)`,
/// which is at most `S(a, c)` and, for nonincreasing rates, at most
/// `|a − c|/b_{max(a,c)}`.
pub fn proposition_4_4_bound(m: &GibbsMeasure, spec: &CouplingSpec) -> Result<IndicatorSumBound> {
    let n = spec.n();
    if m.support_max() < n {
        return Err(Error::SupportMismatch(format!(
            "target support {{0..{}}} must contain {{0..{n}}}",
            m.support_max()
        )));
    }
    let licensed = condition(m, ConditionName::NonincreasingBirthRates).holds;
    let lambda = spec.lambda();
    let b = |k: usize| m.birth_rate_unchecked(k);
    let mut transport = 0.0;
    for (i, &pi) in spec.p().iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        let mut e = 0.0;
        for (s, sh, w) in spec.joint(i) {
            if s == sh {
                continue;
            }
            let hi = s.max(sh);
            let steps = s.abs_diff(sh) as f64;
            let rate_form = if b(hi) > 0.0 { steps / b(hi) } else { f64::INFINITY };
            e += w * b(s) * harmonic_gap(s, sh).min(rate_form);
        }
        transport += pi / lambda * e;
    }
    let law = spec.sum_law();
    let mean_rate: f64 = law.iter().enumerate().map(|(k, w)| w * b(k)).sum();
    let spread: f64 = law
        .iter()
        .enumerate()
        .map(|(k, w)| w * (b(k) - mean_rate).abs())
        .sum();
    let g = stein::sup_norm_exact(m);
    let fluctuation_term = if spread == 0.0 { 0.0 } else { g * spread };
    let gap = (mean_rate - lambda).abs();
    let mean_mismatch_term = if gap == 0.0 { 0.0 } else { g * gap };
    Ok(IndicatorSumBound {
        value: transport + fluctuation_term + mean_mismatch_term,
        transport_term: transport,
        fluctuation_term,
        mean_mismatch_term,
        g_norm: g,
        licensed,
    })
}

/// Poisson-approximation bounds for `S_n` with `λ = E S_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonSumReport {
    pub lambda: f64,
    /// `Σ p_i E_i min{S(S, Ŝ), |S − Ŝ|(1 − e^{−λ})/λ}`.
    pub bound_4_5: f64,
    /// `(1 − e^{−λ})/λ Σ p_i E_i|S − Ŝ|`.
    pub bound_4_6: f64,
    /// `Σ p_i² (1 − e^{−λ})/λ`; independent specs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_4_8: Option<f64>,
    /// `Σ p_i² min{½(1 + Π_{j≠i}(1 − p_j)), (1 − e^{−λ})/λ}`; independent only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_improved: Option<f64>,
    /// `Σ p_i P_i(S≠Ŝ) min{½(1 + P_i(min(S,Ŝ) = 0 | S≠Ŝ)), (1 − e^{−λ})/λ}`
    /// for couplings with `|S − Ŝ| ≤ 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_unit_step: Option<f64>,
    pub exact_tv: f64,
}

impl PoissonSumReport {
    pub const CSV_HEADER: &'static str =
        "lambda,bound_4_5,bound_4_6,bound_4_8,bound_improved,bound_unit_step,exact_tv";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.16e}"));
        format!(
            "{:.16e},{:.16e},{:.16e},{},{},{},{:.16e}",
            self.lambda,
            self.bound_4_5,
            self.bound_4_6,
            opt(self.bound_4_8),
            opt(self.bound_improved),
            opt(self.bound_unit_step),
            self.exact_tv
        )
    }
}

/// `d_TV(L(S_n), Po(λ))`, with the Poisson mass beyond the table counted
/// in full.
pub fn poisson_tv(law: &[f64], lambda: f64) -> Result<f64> {
    let po = GibbsMeasure::builtin(MeasureKind::Poisson { lambda }, TailRule::default())?;
    let bound = po.support_max().max(law.len() - 1);
    let po = GibbsMeasure::builtin(MeasureKind::Poisson { lambda }, TailRule::Bound(bound))?;
    let tail = po.truncation().map_or(0.0, |t| t.tail_mass);
    let scale = 1.0 - tail;
    let body: f64 = (0..=bound)
        .map(|k| (law.get(k).copied().unwrap_or(0.0) - po.pmf()[k] * scale).abs())
        .sum();
    Ok(0.5 * (body + tail))
}

pub fn poisson_sum_bounds(spec: &CouplingSpec) -> Result<PoissonSumReport> {
    let lambda = spec.lambda();
    let factor = (1.0 - (-lambda).exp()) / lambda;
    let p = spec.p();
    let (mut b45, mut b46) = (0.0, 0.0);
    let mut unit_step = Some(0.0);
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        let joint = spec.joint(i);
        let (mut e45, mut e46, mut moved, mut from_zero) = (0.0, 0.0, 0.0, 0.0);
        for &(s, sh, w) in &joint {
            if s == sh {
                continue;
            }
            let d = s.abs_diff(sh) as f64;
            e45 += w * harmonic_gap(s, sh).min(d * factor);
            e46 += w * d;
            moved += w;
            if s.min(sh) == 0 {
                from_zero += w;
            }
            if d > 1.0 {
                unit_step = None;
            }
        }
        b45 += pi * e45;
        b46 += pi * e46;
        if let Some(u) = unit_step.as_mut() {
            if moved > 0.0 {
                *u += pi * moved * (0.5 * (1.0 + from_zero / moved)).min(factor);
            }
        }
    }
    let (bound_4_8, bound_improved) = if spec.is_independent() {
        let b48 = p.iter().map(|x| x * x).sum::<f64>() * factor;
        let improved = (0..p.len())
            .map(|i| {
                let others: f64 = p
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, x)| 1.0 - x)
                    .product();
                p[i] * p[i] * (0.5 * (1.0 + others)).min(factor)
            })
            .sum();
        (Some(b48), Some(improved))
    } else {
        (None, None)
    };
    Ok(PoissonSumReport {
        lambda,
        bound_4_5: b45,
        bound_4_6: factor * b46,
        bound_4_8,
        bound_improved,
        bound_unit_step: unit_step,
        exact_tv: poisson_tv(spec.sum_law(), lambda)?,
    })
}

/// `n` as a single value or an inclusive range `"a..b"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    One(usize),
    Range(String),
}

impl NSpec {
    pub fn values(&self) -> Result<Vec<usize>> {
        match self {
            NSpec::One(n) => Ok(vec![*n]),
            NSpec::Range(s) => parse_n_range(s),
        }
    }
}

/// Parse `"5"` or `"2..6"` (inclusive).
pub fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad n range `{s}`"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

/// Structured-text model descriptor.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub model: String,
    pub n: NSpec,
    #[serde(default, alias = "z")]
    pub lambda: Option<f64>,
    /// Lattice activity; defaults to the limit activity.
    #[serde(default)]
    pub z_n: Option<f64>,
    #[serde(default)]
    pub truncation_tolerance: Option<f64>,
}

impl ModelDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reports for every `n` in the descriptor, exact `‖g‖`.
    pub fn run(&self) -> Result<Vec<LatticeBoundReport>> {
        let model = InteractionModel::by_name(&self.model)?;
        let z = self.lambda.unwrap_or(1.0);
        let z_n = self.z_n.unwrap_or(z);
        let rule = self
            .truncation_tolerance
            .map_or(TailRule::default(), TailRule::Tolerance);
        self.n
            .values()?
            .into_iter()
            .map(|n| theorem_4_2_bound(&model, n, z_n, z, rule, GNormSource::Exact))
            .collect()
    }
}

/// Label usable as a CSV field.
pub fn model_label(model: &InteractionModel) -> String {
    csv_field(model.name())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repelling_weights() {
        let m = InteractionModel::repelling();
        assert!((m.wn(2, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!((m.brute_force_wn(2, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!((m.w(4).unwrap() - 2.0).abs() < 1e-14);
        for n in 2..=6 {
            for k in 2..=n {
                let ratio = m.ln_wn(n, k).unwrap() - m.ln_wn(n, k - 1).unwrap();
                let limit = m.ln_w(k).unwrap() - m.ln_w(k - 1).unwrap();
                if k > 2 {
                    assert!((ratio - limit).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_weights() {
        let m = InteractionModel::product();
        assert!((m.wn(3, 2).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((m.brute_force_wn(3, 2).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((m.w(3).unwrap() - 1.0 / 27.0).abs() < 1e-15);
        assert!(lattice_measure(&m, 2, 1.0).is_err());
    }

    #[test]
    fn separable_custom_quadrature() {
        let m = InteractionModel::separable("linear", PointRule::Midpoint, |_, x| 2.0 * x);
        assert!((m.w(3).unwrap() - 1.0).abs() < 1e-12);
        let brute = m.brute_force_wn(4, 3).unwrap();
        // midpoint rule is exact for linear factors
        assert!((brute - 1.0).abs() < 1e-12);
        let opaque = InteractionModel::custom("opaque", PointRule::Midpoint, |_| 1.0);
        assert!(matches!(opaque.w(2), Err(Error::Unsupported(_))));
        assert!(opaque.brute_force_wn(1000, 3).is_err());
    }

    #[test]
    fn ideal_gas_is_conditioned_poisson() {
        let m = lattice_measure(&InteractionModel::ideal_gas(), 5, 2.0).unwrap();
        let po = GibbsMeasure::builtin(MeasureKind::Poisson { lambda: 2.0 }, TailRule::Bound(5))
            .unwrap();
        for k in 0..=5 {
            assert!((m.pmf()[k] - po.pmf()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn repelling_partition_function() {
        let mu = limit_measure(&InteractionModel::repelling(), 1.0, TailRule::default()).unwrap();
        let z = 2.0 + std::f64::consts::E / 6.0;
        assert!((mu.pmf()[0] - 1.0 / z).abs() < 1e-13);
    }

    #[test]
    fn corollary_values() {
        let e = std::f64::consts::E;
        let v = corollary_bound(&InteractionModel::repelling(), 2, 1.0).unwrap();
        assert!((v - e / (12.0 + e)).abs() < 1e-14);
        assert!(corollary_bound(&InteractionModel::ideal_gas(), 2, 1.0).is_err());
        assert!(corollary_bound(&InteractionModel::product(), 2, 1.0).is_err());
    }

    #[test]
    fn ideal_gas_bound_is_tail() {
        let r = theorem_4_2_bound(
            &InteractionModel::ideal_gas(),
            4,
            1.5,
            1.5,
            TailRule::default(),
            GNormSource::Exact,
        )
        .unwrap();
        assert_eq!(r.omega_term, 0.0);
        assert_eq!(r.ratio_term, 0.0);
        assert!((r.theorem_4_2_value - r.tail_term).abs() < 1e-15);
        assert!((r.exact_tv - r.tail_term).abs() < 1e-12);
    }

    #[test]
    fn n_ranges() {
        assert_eq!(parse_n_range("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_n_range("7").unwrap(), vec![7]);
        assert!(parse_n_range("4..2").is_err());
        let d = ModelDescriptor::from_json(r#"{"model": "repelling", "n": "2..3", "lambda": 1}"#)
            .unwrap();
        assert_eq!(d.run().unwrap().len(), 2);
    }

    #[test]
    fn unit_point_mass_example() {
        let spec = CouplingSpec::independent(&[1.0, 0.0, 0.0]).unwrap();
        let r = poisson_sum_bounds(&spec).unwrap();
        let target = 1.0 - (-1.0f64).exp();
        assert!((r.exact_tv - target).abs() < 1e-12);
        assert!(r.bound_4_8.unwrap() >= r.exact_tv - 1e-12);
        assert!(r.bound_improved.unwrap() >= r.exact_tv - 1e-12);
    }
}
