//! Explicit exponential bounds for the screened error event
//! `{S_n > nε, |T_n| < nu}` of a normalized pair (`E F = E U = 0`,
//! `Var F ≤ 1`, `Var U = 1`).
//!
//! The chain is: dominate the event by the tail of `Y = F - βU` with
//! `β = αε/u`; bound the log-MGF of `Y ≤ m` with Bennett's inequality;
//! evaluate the resulting binary relative entropy at an explicit tilt and
//! lower-bound it with Pinsker. Everything is reported as a per-sample
//! exponent `I`, so the bound at horizon `n` is `e^{-nI}`.

use serde::{Deserialize, Serialize};

use crate::dist::{self, DistributionModel, Observable, ObservablePair, PowerForm, PowerSum};
use crate::error::{Error, Result};
use crate::optimize::{golden_max, grid_then_refine};

/// What is known about `γ = Cov(F(X), U(X))` of the normalized pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariance {
    Exact(f64),
    /// `|γ| ≤ bound`.
    AbsBound(f64),
}

impl Covariance {
    /// The value entering `1 + β² - 2βγ`. With only `|γ| ≤ b` known, `-b`
    /// gives the largest (most conservative) variance proxy.
    pub fn for_bound(&self) -> f64 {
        match *self {
            Covariance::Exact(g) => g,
            Covariance::AbsBound(b) => -b.abs(),
        }
    }
}

/// Upper bound on `ess sup [F(X) - β U(X)]` for the normalized pair.
#[derive(Clone, Debug, PartialEq)]
pub enum MarginOracle {
    /// Exact maximum over the atoms of a discrete model.
    Atoms { f: Vec<f64>, u: Vec<f64> },
    /// Closed-form `sup_{x ≥ 1}` of `F̄(x) - β U(x)` where both are power forms;
    /// the maximizer is either `x = 1` or the unique interior stationary point.
    PowerForms { f_upper: PowerForm, u: PowerForm },
}

impl MarginOracle {
    pub fn margin(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain { what: "beta", value: beta });
        }
        Ok(match self {
            MarginOracle::Atoms { f, u } => f
                .iter()
                .zip(u)
                .map(|(x, y)| x - beta * y)
                .fold(f64::NEG_INFINITY, f64::max),
            MarginOracle::PowerForms { f_upper, u } => PowerSum::combine(1.0, f_upper, -beta, u).sup().0,
        })
    }
}

/// Inputs to the affine normalization of a raw pair.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationInput {
    pub pair: ObservablePair,
    /// Known mean of `U`.
    pub nu: f64,
    /// Known variance of `U`.
    pub var_u: f64,
    /// Dominance constants: `|F(x)| ≤ c1 U(x) + c2` on the support.
    pub c1: f64,
    pub c2: f64,
    /// Known lower bound on `F` (hence on `μ`); tightens the variance bound
    /// and the margin. `None` falls back to the exact mean.
    pub f_lower: Option<f64>,
    /// Known `Cov(F, U)` on the raw scale, if any.
    pub covariance: Option<f64>,
}

impl NormalizationInput {
    /// `F(x) = x^{3/4}`, `U(x) = x` under the pareto-like law with `ν = 5/3`,
    /// `Var U = 20/9`, `x^{3/4} ≤ x` and `F ≥ 1`.
    pub fn heavy_tail_example(with_covariance: bool) -> Self {
        NormalizationInput {
            pair: ObservablePair::heavy_tail_example(),
            nu: 5.0 / 3.0,
            var_u: 20.0 / 9.0,
            c1: 1.0,
            c2: 0.0,
            f_lower: Some(1.0),
            covariance: with_covariance.then_some(20.0 / 21.0),
        }
    }
}

/// A pair rescaled so that `E F = E U = 0`, `Var F ≤ 1`, `Var U = 1`:
/// `F_n = c (F - μ)`, `U_n = a (U - ν)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedPair {
    pub f_scale: f64,
    pub u_scale: f64,
    pub nu: f64,
    /// Raw-scale bound on `Var F` used to pick `f_scale`.
    pub var_f_bound: f64,
    pub gamma: Covariance,
    pub margin: MarginOracle,
}

impl NormalizedPair {
    /// An already-normalized discrete pair (values given per atom).
    pub fn from_atoms(f: Vec<f64>, u: Vec<f64>, gamma: Covariance) -> Self {
        NormalizedPair {
            f_scale: 1.0,
            u_scale: 1.0,
            nu: 0.0,
            var_f_bound: 1.0,
            gamma,
            margin: MarginOracle::Atoms { f, u },
        }
    }

    pub fn margin(&self, beta: f64) -> Result<f64> {
        self.margin.margin(beta)
    }

    /// Raw `ε` to the normalized scale.
    pub fn epsilon(&self, raw: f64) -> f64 {
        self.f_scale * raw
    }

    /// Raw `u` to the normalized scale.
    pub fn u(&self, raw: f64) -> f64 {
        self.u_scale * raw
    }

    /// `U_n(x) = a U(x) - a ν`.
    pub fn u_observable(&self, raw: &Observable) -> Observable {
        Observable::affine(self.u_scale, -self.u_scale * self.nu, raw.clone())
    }

    /// `F_n(x) = c F(x) - c μ`.
    pub fn f_observable(&self, raw: &Observable, mu: f64) -> Observable {
        Observable::affine(self.f_scale, -self.f_scale * mu, raw.clone())
    }
}

/// Affine normalization of a raw pair from known `ν`, `Var U` and the
/// dominance constants `(c1, c2)`.
///
/// `Var F ≤ E F² ≤ E[(c1 U + c2)²] = c1² (Var U + ν²) + 2 c1 c2 ν + c2²`,
/// less `f_lower²` when `F ≥ f_lower ≥ 0`.
pub fn normalize_observables(model: &DistributionModel, input: &NormalizationInput) -> Result<NormalizedPair> {
    if !(input.var_u > 0.0) {
        return Err(Error::DegenerateScreen);
    }
    if !(input.c1.is_finite() && input.c2.is_finite()) {
        return Err(Error::Config("dominance constants must be finite".into()));
    }
    let u_scale = 1.0 / input.var_u.sqrt();
    let second = input.c1 * input.c1 * (input.var_u + input.nu * input.nu)
        + 2.0 * input.c1 * input.c2 * input.nu
        + input.c2 * input.c2;
    let floor = match input.f_lower {
        Some(l) => l,
        None => dist::means(model, &input.pair)?.0,
    };
    let var_f_bound = match input.f_lower {
        Some(l) if l >= 0.0 => second - l * l,
        _ => second,
    };
    if !(var_f_bound > 0.0) {
        return Err(Error::Config(format!("variance bound for F is {var_f_bound}, not positive")));
    }
    let f_scale = 1.0 / var_f_bound.sqrt();
    let margin = match model.atoms() {
        Some(_) => {
            let (f, u) = input.pair.tabulate(model)?;
            MarginOracle::Atoms {
                f: f.iter().map(|v| f_scale * (v - floor)).collect(),
                u: u.iter().map(|v| u_scale * (v - input.nu)).collect(),
            }
        }
        None => {
            let (Some(f), Some(u)) = (input.pair.f.power_form(), input.pair.u.power_form()) else {
                return Err(Error::Config("table observables need a discrete model".into()));
            };
            MarginOracle::PowerForms {
                f_upper: PowerForm { coef: f_scale * f.coef, power: f.power, offset: f_scale * (f.offset - floor) },
                u: PowerForm { coef: u_scale * u.coef, power: u.power, offset: u_scale * (u.offset - input.nu) },
            }
        }
    };
    let gamma = match input.covariance {
        Some(cov) => Covariance::Exact(f_scale * u_scale * cov),
        None => Covariance::AbsBound(1.0),
    };
    Ok(NormalizedPair { f_scale, u_scale, nu: input.nu, var_f_bound, gamma, margin })
}

/// Whether some `β ∈ (0, ε/u)` has `m(β) ≤ ε - βu`, which makes the
/// screened error event empty.
pub fn zero_event_check(pair: &NormalizedPair, epsilon: f64, u: f64) -> Result<bool> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain { what: "epsilon", value: epsilon });
    }
    if !(u > 0.0) {
        return Err(Error::Domain { what: "u", value: u });
    }
    let hi = epsilon / u;
    // slack(β) = ε - βu - m(β) is concave in β
    let slack = |beta: f64| match pair.margin(beta) {
        Ok(m) => epsilon - beta * u - m,
        Err(_) => f64::NEG_INFINITY,
    };
    let (_, best) = grid_then_refine(slack, 0.0, hi, 2000, 1e-14 * hi)?;
    Ok(best >= 0.0)
}

/// Bennett's bound on `log E e^{θY}` for `E Y = 0`, `Y ≤ m`, `Var Y ≤ σ²`:
/// `log[ m²/(m²+σ²) e^{-θσ²/m} + σ²/(m²+σ²) e^{θm} ]`.
pub fn bennett_log_mgf_bound(theta: f64, m: f64, sigma2: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain { what: "m", value: m });
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Domain { what: "sigma2", value: sigma2 });
    }
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let total = m * m + sigma2;
    let a = (m * m / total).ln() - theta * sigma2 / m;
    let b = (sigma2 / total).ln() + theta * m;
    let peak = a.max(b);
    Ok(peak + ((a - peak).exp() + (b - peak).exp()).ln())
}

fn unit_open(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: v })
    }
}

/// Relative entropy between Bernoulli(y) and Bernoulli(z), both in `(0, 1)`.
pub fn binary_kl(y: f64, z: f64) -> Result<f64> {
    unit_open("y", y)?;
    unit_open("z", z)?;
    Ok(binary_kl_extended(y, z))
}

/// [`binary_kl`] with `y ∈ [0, 1]` allowed via `0 log 0 = 0`.
pub fn binary_kl_extended(y: f64, z: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(y, z) + term(1.0 - y, 1.0 - z)
}

/// Pinsker's lower bound `2 (y - z)²` on [`binary_kl`].
pub fn pinsker_lower(y: f64, z: f64) -> Result<f64> {
    unit_open("y", y)?;
    unit_open("z", z)?;
    Ok(2.0 * (y - z) * (y - z))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// The screened error event is empty.
    ZeroEvent,
    /// Bennett + Pinsker chain optimized over `α ∈ (0, 1)`, using `γ`.
    AlphaOptimized,
    /// The same chain at `α = 1/2` with `|γ| ≤ 1`, valid for all `u ≤ Kε`.
    FixedAlpha,
    /// The exact Chernoff rate `Λ₊*(ε, u)`.
    ChernoffRate,
}

/// A per-sample exponent `I`; the bound at horizon `n` is `e^{-nI}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub exponent: f64,
    pub alpha_star: Option<f64>,
    pub zero_event: bool,
}

impl BoundReport {
    pub fn zero_event() -> Self {
        BoundReport { method: BoundMethod::ZeroEvent, exponent: f64::INFINITY, alpha_star: None, zero_event: true }
    }

    pub fn bound_at(&self, n: u64) -> f64 {
        if self.zero_event {
            0.0
        } else {
            (-(n as f64) * self.exponent).exp()
        }
    }
}

/// Range of `α` searched by [`alpha_optimized_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaRange {
    pub const FULL: AlphaRange = AlphaRange { lo: 0.0, hi: 1.0 };
}

/// Grid spacing of the `α` search.
const ALPHA_STEP: f64 = 1e-4;

/// `2 [m (1-α) / (m² + 1 + β² - 2βγ)]² ε²` at `β = αε/u`, `m = m(β)`.
pub fn alpha_objective(pair: &NormalizedPair, epsilon: f64, u: f64, alpha: f64) -> Result<f64> {
    let beta = alpha * epsilon / u;
    let m = pair.margin(beta)?;
    let gamma = pair.gamma.for_bound();
    let sigma2 = 1.0 + beta * beta - 2.0 * beta * gamma;
    let denom = m * m + sigma2;
    if !(denom > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let r = m * (1.0 - alpha) / denom;
    Ok(2.0 * r * r * epsilon * epsilon)
}

/// Exponent of the `α`-optimized bound over the whole of `(0, 1)`.
pub fn alpha_optimized_bound(pair: &NormalizedPair, epsilon: f64, u: f64) -> Result<BoundReport> {
    alpha_optimized_bound_in(pair, epsilon, u, AlphaRange::FULL)
}

/// As [`alpha_optimized_bound`], restricted to `α ∈ range`.
pub fn alpha_optimized_bound_in(pair: &NormalizedPair, epsilon: f64, u: f64, range: AlphaRange) -> Result<BoundReport> {
    if zero_event_check(pair, epsilon, u)? {
        return Ok(BoundReport::zero_event());
    }
    let cells = (((range.hi - range.lo) / ALPHA_STEP).round() as usize).max(2);
    let objective = |alpha: f64| alpha_objective(pair, epsilon, u, alpha).unwrap_or(f64::NEG_INFINITY);
    let (alpha, exponent) = grid_then_refine(objective, range.lo, range.hi, cells, 1e-12)?;
    if exponent == f64::NEG_INFINITY {
        return Err(Error::Numeric("variance proxy is nonpositive for every alpha".into()));
    }
    // polish in case the grid maximum sat against a cell edge
    let (a2, e2) = golden_max(
        |a| alpha_objective(pair, epsilon, u, a).unwrap_or(f64::NEG_INFINITY),
        (alpha - ALPHA_STEP).max(range.lo + f64::EPSILON),
        (alpha + ALPHA_STEP).min(range.hi - f64::EPSILON),
        1e-13,
    )?;
    let (alpha, exponent) = if e2 > exponent { (a2, e2) } else { (alpha, exponent) };
    Ok(BoundReport { method: BoundMethod::AlphaOptimized, exponent, alpha_star: Some(alpha), zero_event: false })
}

/// `(1/2) [M / (M² + (1 + 1/(2K))²)]² ε²` with `M = m(1/(2K))`, valid for
/// every `0 < u ≤ Kε`.
pub fn fixed_alpha_bound(pair: &NormalizedPair, epsilon: f64, k: f64) -> Result<BoundReport> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain { what: "K", value: k });
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain { what: "epsilon", value: epsilon });
    }
    let big_m = pair.margin(1.0 / (2.0 * k))?;
    if !big_m.is_finite() {
        return Err(Error::Domain { what: "margin at 1/(2K)", value: big_m });
    }
    let shift = 1.0 + 1.0 / (2.0 * k);
    let r = big_m / (big_m * big_m + shift * shift);
    Ok(BoundReport {
        method: BoundMethod::FixedAlpha,
        exponent: 0.5 * r * r * epsilon * epsilon,
        alpha_star: Some(0.5),
        zero_event: false,
    })
}

/// Lower end of the `α` range used for the worked example; it keeps
/// `β = (20√5/3) α ≥ √5/4`, where the margin maximizer is `x = 1`.
pub const EXAMPLE_ALPHA_MIN: f64 = 3.0 / 80.0;
/// `α` choices and quoted coefficients of the worked example.
pub const VARIANCE_ONLY_ALPHA: f64 = 0.055_208_3;
pub const VARIANCE_ONLY_COEFF: f64 = 0.005;
pub const WITH_COVARIANCE_ALPHA: f64 = 0.0568;
pub const WITH_COVARIANCE_COEFF: f64 = 0.0367;

/// One half of the worked-example report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExamplePart {
    /// `Cov` information used (`AbsBound(1)` or the exact value).
    pub gamma: Covariance,
    /// Optimizer over `α ∈ [3/80, 1)`.
    pub alpha_star: f64,
    /// `sup` of the exponent divided by `ε²`.
    pub coefficient: f64,
    pub quoted_alpha: f64,
    pub coefficient_at_quoted_alpha: f64,
    pub quoted_coefficient: f64,
    /// Search over all of `(0, 1)` with the piecewise margin.
    pub unrestricted_coefficient: f64,
    pub unrestricted_alpha_star: f64,
    /// `e^{-c n ε²}` at the quoted coefficient.
    pub bound: f64,
    /// `e^{-c n ε²}` at the computed coefficient.
    pub bound_computed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExampleReport {
    pub epsilon: f64,
    pub u: f64,
    pub n: u64,
    pub variance_only: ExamplePart,
    pub with_covariance: ExamplePart,
}

fn example_part(
    with_covariance: bool,
    epsilon: f64,
    n: u64,
    quoted_alpha: f64,
    quoted_coefficient: f64,
) -> Result<ExamplePart> {
    let pair = normalize_observables(
        &DistributionModel::ParetoLike,
        &NormalizationInput::heavy_tail_example(with_covariance),
    )?;
    // the bound is computed at u = ε/20 and holds for every smaller u
    let eps_n = pair.epsilon(epsilon);
    let u_n = pair.u(epsilon / 20.0);
    let eps2 = epsilon * epsilon;
    let restricted = alpha_optimized_bound_in(&pair, eps_n, u_n, AlphaRange { lo: EXAMPLE_ALPHA_MIN, hi: 1.0 })?;
    let unrestricted = alpha_optimized_bound(&pair, eps_n, u_n)?;
    let at_quoted = alpha_objective(&pair, eps_n, u_n, quoted_alpha)?;
    let coefficient = restricted.exponent / eps2;
    let nf = n as f64;
    Ok(ExamplePart {
        gamma: pair.gamma,
        alpha_star: restricted.alpha_star.unwrap_or(f64::NAN),
        coefficient,
        quoted_alpha,
        coefficient_at_quoted_alpha: at_quoted / eps2,
        quoted_coefficient,
        unrestricted_coefficient: unrestricted.exponent / eps2,
        unrestricted_alpha_star: unrestricted.alpha_star.unwrap_or(f64::NAN),
        bound: (-quoted_coefficient * nf * eps2).exp(),
        bound_computed: (-coefficient * nf * eps2).exp(),
    })
}

/// Reproduces the worked heavy-tail example: both coefficients, the `α`
/// choices behind them, and the bounds `e^{-c n ε²}`.
pub fn worked_example_report(epsilon: f64, u: f64, n: u64) -> Result<ExampleReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain { what: "epsilon", value: epsilon });
    }
    if !(u > 0.0 && u <= epsilon / 20.0 * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("need 0 < u <= epsilon/20, got u = {u}, epsilon = {epsilon}")));
    }
    Ok(ExampleReport {
        epsilon,
        u,
        n,
        variance_only: example_part(false, epsilon, n, VARIANCE_ONLY_ALPHA, VARIANCE_ONLY_COEFF)?,
        with_covariance: example_part(true, epsilon, n, WITH_COVARIANCE_ALPHA, WITH_COVARIANCE_COEFF)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(with_cov: bool) -> NormalizedPair {
        normalize_observables(&DistributionModel::ParetoLike, &NormalizationInput::heavy_tail_example(with_cov)).unwrap()
    }

    #[test]
    fn example_normalization_constants() {
        let p = example(true);
        assert_eq!(p.f_scale, 0.5);
        assert!((p.var_f_bound - 4.0).abs() < 1e-14);
        assert!((p.u_scale - 3.0 / (2.0 * 5f64.sqrt())).abs() < 1e-15);
        // U_n(x) = 3x/(2√5) - √5/2
        let un = p.u_observable(&Observable::Identity);
        for x in [1.0, 2.5, 40.0] {
            let want = 3.0 * x / (2.0 * 5f64.sqrt()) - 5f64.sqrt() / 2.0;
            assert!((un.eval(x) - want).abs() < 1e-14);
        }
        let mu = 10.0 / 7.0;
        let fnorm = p.f_observable(&Observable::Power { exponent: 0.75 }, mu);
        assert!((fnorm.eval(16.0) - (8.0 - mu) / 2.0).abs() < 1e-14);
        match p.gamma {
            Covariance::Exact(g) => assert!((g - 5f64.sqrt() / 7.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(example(false).gamma, Covariance::AbsBound(1.0));
    }

    #[test]
    fn identity_normalization() {
        let model = DistributionModel::finite(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let input = NormalizationInput {
            pair: ObservablePair::new(Observable::Identity, Observable::Identity),
            nu: 0.0,
            var_u: 1.0,
            c1: 1.0,
            c2: 0.0,
            f_lower: None,
            covariance: Some(1.0),
        };
        let p = normalize_observables(&model, &input).unwrap();
        assert_eq!((p.f_scale, p.u_scale), (1.0, 1.0));
        assert_eq!(p.gamma, Covariance::Exact(1.0));
        let degenerate = NormalizationInput { var_u: 0.0, ..input };
        assert!(matches!(normalize_observables(&model, &degenerate), Err(Error::DegenerateScreen)));
    }

    #[test]
    fn example_margin_values() {
        let p = example(false);
        let s5 = 5f64.sqrt();
        assert!((p.margin(s5 / 4.0).unwrap() - 0.25).abs() < 1e-14);
        assert!((p.margin(10.0).unwrap() - 2.0 * s5).abs() < 1e-13);
        // interior branch: t = √5/(4β), value t³/8 - 1/2 + √5β/2
        let t = s5 / 0.4;
        let want = t.powi(3) / 8.0 - 0.5 + s5 * 0.1 / 2.0;
        assert!((p.margin(0.1).unwrap() - want).abs() < 1e-12);
        assert!((p.margin(0.1).unwrap() - 21.449).abs() < 1e-3);
        assert!(matches!(p.margin(0.0), Err(Error::Domain { .. })));
        assert!(p.margin(-1.0).is_err());
    }

    #[test]
    fn zero_event_examples() {
        let same = NormalizedPair::from_atoms(vec![-1.0, 1.0], vec![-1.0, 1.0], Covariance::Exact(1.0));
        assert!(zero_event_check(&same, 1.0, 0.5).unwrap());
        assert!(!zero_event_check(&example(false), 0.1, 0.005).unwrap());
        // u ≥ ε with positive margin everywhere
        let indep = NormalizedPair::from_atoms(vec![-1.0, 1.0, -1.0, 1.0], vec![-1.0, -1.0, 1.0, 1.0], Covariance::Exact(0.0));
        assert!(!zero_event_check(&indep, 0.1, 0.2).unwrap());
    }

    #[test]
    fn bennett_examples() {
        assert!(bennett_log_mgf_bound(0.0, 2.0, 3.0).unwrap().abs() < 1e-15);
        let v = bennett_log_mgf_bound(1.0, 1.0, 1.0).unwrap();
        assert!((v - 1f64.cosh().ln()).abs() < 1e-15);
        assert!((v - 0.433781).abs() < 1e-6);
        assert!(bennett_log_mgf_bound(1.0, 0.0, 1.0).is_err());
        assert!(bennett_log_mgf_bound(1.0, 1.0, 0.0).is_err());
        // no overflow for large θ
        assert!(bennett_log_mgf_bound(1e4, 1.0, 1.0).unwrap().is_finite());
    }

    #[test]
    fn binary_kl_examples() {
        assert_eq!(binary_kl(0.3, 0.3).unwrap(), 0.0);
        let h = binary_kl(0.75, 0.5).unwrap();
        assert!((h - 0.130812).abs() < 1e-6);
        assert!(h >= pinsker_lower(0.75, 0.5).unwrap());
        assert_eq!(pinsker_lower(0.75, 0.5).unwrap(), 0.125);
        assert!(binary_kl(0.0, 0.5).is_err());
        assert!(binary_kl(0.5, 1.0).is_err());
        assert!((binary_kl_extended(0.0, 0.5) - 2f64.ln()).abs() < 1e-15);
        assert!((binary_kl_extended(1.0, 0.25) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn quoted_alpha_values() {
        // variance only: u = ε/20, γ → -1
        let eps = 0.3;
        let p = example(false);
        let v = alpha_objective(&p, p.epsilon(eps), p.u(eps / 20.0), VARIANCE_ONLY_ALPHA).unwrap() / (eps * eps);
        assert!((v - 0.005054).abs() < 1e-5, "{v}");
        let p = example(true);
        let v = alpha_objective(&p, p.epsilon(eps), p.u(eps / 20.0), WITH_COVARIANCE_ALPHA).unwrap() / (eps * eps);
        assert!((v - 0.036642).abs() < 1e-5, "{v}");
    }

    #[test]
    fn fixed_alpha_example() {
        let p = example(false);
        let r = fixed_alpha_bound(&p, 1.0, 1.0 / 20.0).unwrap();
        let s5 = 5f64.sqrt();
        let want = 0.5 * (2.0 * s5 / (20.0 + 121.0)).powi(2);
        assert!((r.exponent - want).abs() < 1e-15);
        assert!((r.exponent - 5.03e-4).abs() < 1e-6);
        assert!(fixed_alpha_bound(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_event_report_takes_precedence() {
        let same = NormalizedPair::from_atoms(vec![-1.0, 1.0], vec![-1.0, 1.0], Covariance::Exact(1.0));
        let r = alpha_optimized_bound(&same, 1.0, 0.5).unwrap();
        assert!(r.zero_event);
        assert_eq!(r.method, BoundMethod::ZeroEvent);
        assert_eq!(r.exponent, f64::INFINITY);
        assert_eq!(r.bound_at(1), 0.0);
        assert_eq!(r.bound_at(1000), 0.0);
    }

    #[test]
    fn worked_example_preconditions() {
        assert!(matches!(worked_example_report(0.1, 0.006, 100), Err(Error::Precondition(_))));
        assert!(worked_example_report(0.1, 0.005, 100).is_ok());
    }
}
