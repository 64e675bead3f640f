//! Fenchel–Legendre rate functions of the screened events.
//!
//! All rates share one form. With `A = s_F (F - μ)` and `B = s_U (U - ν)` for
//! a sign pattern `(s_F, s_U)`, the rate is
//! `sup_{θ₁, θ₂ ≥ 0} θ₁ ε - θ₂ u - log E exp(θ₁ A + θ₂ B)`,
//! the Chernoff exponent of `{mean A ≥ ε, mean B ≥ -u}`.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::dist::{self, DistributionModel, JointLaw, ObservablePair};
use crate::error::{Error, Result};
use crate::optimize::maximize_half_line;

/// Largest tilt considered before a supremum is declared unbounded.
pub const THETA_MAX: f64 = 1_152_921_504_606_846_976.0; // 2^60
/// Differences in `Δ` below this are solver noise.
pub const DELTA_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateVariant {
    /// `{S̄ - μ ≥ ε, T̄ - ν ≤ u}`
    LambdaPlus,
    /// `{S̄ - μ ≥ ε, T̄ - ν ≥ -u}`
    GammaPlus,
    /// `{S̄ - μ ≤ -ε, T̄ - ν ≤ u}`
    LambdaMinus,
    /// `{S̄ - μ ≤ -ε, T̄ - ν ≥ -u}`
    GammaMinus,
}

impl RateVariant {
    pub const ALL: [RateVariant; 4] =
        [RateVariant::LambdaPlus, RateVariant::GammaPlus, RateVariant::LambdaMinus, RateVariant::GammaMinus];

    /// `(s_F, s_U)`.
    pub fn signs(self) -> (f64, f64) {
        match self {
            RateVariant::LambdaPlus => (1.0, -1.0),
            RateVariant::GammaPlus => (1.0, 1.0),
            RateVariant::LambdaMinus => (-1.0, -1.0),
            RateVariant::GammaMinus => (-1.0, 1.0),
        }
    }

    fn margin_name(self) -> &'static str {
        match self {
            RateVariant::LambdaPlus => "ess sup (F - bU)",
            RateVariant::GammaPlus => "ess sup (F + bU)",
            RateVariant::LambdaMinus => "ess sup (-F - bU)",
            RateVariant::GammaMinus => "ess sup (-F + bU)",
        }
    }
}

/// Supremum value and, when finite, a maximizer `(θ₁, θ₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sup {
    pub value: f64,
    pub theta: Option<(f64, f64)>,
}

impl Sup {
    fn unbounded() -> Self {
        Sup { value: f64::INFINITY, theta: None }
    }
}

/// Domain of a Legendre supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `θ₂ = 0`, search `θ₁ ≥ 0`.
    HalfLine,
    /// `θ₁, θ₂ ≥ 0`.
    Quadrant,
}

/// Supremum of a concave, extended-real objective over the nonnegative
/// half-line or quadrant.
///
/// The quadrant case maximizes `V(θ₂) = sup_{θ₁} v(θ₁, θ₂)`, itself concave,
/// with warm-started inner searches; starting points come from a log-spaced
/// grid (plus `seed`, if given). A search still climbing at [`THETA_MAX`] with
/// the last doubling gaining more than 1 is reported as `+∞`.
pub fn legendre_sup<F: Fn(f64, f64) -> f64>(objective: F, domain: Domain, seed: Option<(f64, f64)>) -> Result<Sup> {
    let bad = Cell::new(None);
    let v = |t1: f64, t2: f64| {
        let r = objective(t1, t2);
        if r.is_nan() && bad.get().is_none() {
            bad.set(Some((t1, t2)));
        }
        r
    };
    let nan_error = |e: Error| match bad.get() {
        Some((t1, t2)) => Error::Numeric(format!("objective is NaN at theta = ({t1}, {t2})")),
        None => e,
    };

    let grid: Vec<f64> = std::iter::once(0.0).chain((-8..=8).map(|k| 2f64.powi(k))).collect();
    let mut start = (0.0, 0.0, f64::NEG_INFINITY);
    let seconds: &[f64] = if domain == Domain::Quadrant { &grid } else { &[0.0] };
    for &t2 in seconds {
        for &t1 in &grid {
            let val = v(t1, t2);
            if val > start.2 {
                start = (t1, t2, val);
            }
        }
    }
    if let Some((t1, t2)) = seed {
        let val = v(t1, t2);
        if val > start.2 {
            start = (t1, if domain == Domain::Quadrant { t2 } else { 0.0 }, val);
        }
    }
    if bad.get().is_some() {
        return Err(nan_error(Error::Numeric(String::new())));
    }

    let warm = Cell::new(start.0);
    let best = Cell::new(start);
    let unbounded = Cell::new(false);
    let inner = |t2: f64| -> f64 {
        match maximize_half_line(|t1| v(t1, t2), warm.get(), THETA_MAX) {
            Ok(m) => {
                if m.at_cap && m.value - v(0.5 * THETA_MAX, t2) > 1.0 {
                    unbounded.set(true);
                    return f64::INFINITY;
                }
                if m.value > f64::NEG_INFINITY {
                    warm.set(m.x);
                }
                if m.value > best.get().2 {
                    best.set((m.x, t2, m.value));
                }
                m.value
            }
            Err(_) => f64::NAN,
        }
    };

    match domain {
        Domain::HalfLine => {
            inner(0.0);
            if bad.get().is_some() {
                return Err(nan_error(Error::Numeric(String::new())));
            }
            if unbounded.get() {
                return Ok(Sup::unbounded());
            }
            let m = maximize_half_line(|t1| v(t1, 0.0), start.0, THETA_MAX).map_err(nan_error)?;
            Ok(Sup { value: m.value, theta: Some((m.x, 0.0)) })
        }
        Domain::Quadrant => {
            let outer = maximize_half_line(&inner, start.1, THETA_MAX).map_err(nan_error)?;
            if bad.get().is_some() {
                return Err(nan_error(Error::Numeric(String::new())));
            }
            if unbounded.get() || (outer.at_cap && outer.value - inner(0.5 * THETA_MAX) > 1.0) {
                return Ok(Sup::unbounded());
            }
            let (t1, t2, value) = best.get();
            Ok(Sup { value, theta: Some((t1, t2)) })
        }
    }
}

/// `(μ, ν)` and the law of `(F - μ, U - ν)`.
fn centered_law(model: &DistributionModel, pair: &ObservablePair) -> Result<JointLaw> {
    let (mu, nu) = dist::means(model, pair)?;
    JointLaw::centered(model, pair, mu, nu)
}

/// Whether `{E_Q A ≥ ε, E_Q B ≥ -u}` is unreachable by any law on the
/// support, i.e. `min_{s ≥ 0} ess sup (A + sB) - ε + su < 0`. The rate is
/// then `+∞`. With `u = ∞` only `s = 0` is admissible.
fn event_unreachable(law: &JointLaw, sf: f64, su: f64, epsilon: f64, u: f64) -> Result<bool> {
    let tol = 1e-12 * (1.0 + epsilon.abs());
    if !u.is_finite() {
        return Ok(law.ess_sup(sf, 0.0) - epsilon < -tol);
    }
    let neg_gap = |s: f64| -(law.ess_sup(sf, s * su) - epsilon + s * u);
    let m = maximize_half_line(neg_gap, 1.0, THETA_MAX)?;
    Ok(-m.value < -tol)
}

fn check_domination(law: &JointLaw, variant: RateVariant) -> Result<()> {
    let (sf, su) = variant.signs();
    // growth of a power form is decided by its leading term, so a spread of
    // slopes is exact; atoms are always dominated
    let ok = [1e-9, 1e-3, 1.0, 1e3, 1e9].iter().all(|&b| law.ess_sup(sf, b * su).is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::Capability(format!("margin {} is infinite for some b > 0", variant.margin_name())))
    }
}

fn rate_on_law(law: &JointLaw, sf: f64, su: f64, epsilon: f64, u: f64, seed: Option<(f64, f64)>) -> Result<Sup> {
    if event_unreachable(law, sf, su, epsilon, u)? {
        return Ok(Sup::unbounded());
    }
    let objective = |t1: f64, t2: f64| {
        let lin = if t2 == 0.0 { t1 * epsilon } else { t1 * epsilon - t2 * u };
        lin - law.log_mgf(sf * t1, su * t2)
    };
    let domain = if u.is_finite() { Domain::Quadrant } else { Domain::HalfLine };
    let mut s = legendre_sup(objective, domain, seed)?;
    // the objective vanishes at the origin, so small negatives are noise
    s.value = s.value.max(0.0);
    Ok(s)
}

/// `Λ*(ε) = sup_{θ ≥ 0} θε - log E exp(θ(F - μ))`; `0` when every positive
/// exponential moment of `F` diverges.
pub fn rate_lambda_star(model: &DistributionModel, pair: &ObservablePair, epsilon: f64) -> Result<f64> {
    Ok(lambda_star_sup(&centered_law(model, pair)?, epsilon)?.value)
}

fn lambda_star_sup(law: &JointLaw, epsilon: f64) -> Result<Sup> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain { what: "epsilon", value: epsilon });
    }
    rate_on_law(law, 1.0, 0.0, epsilon, f64::INFINITY, None)
}

/// One of `Λ₊*`, `Γ₊*`, `Λ₋*`, `Γ₋*` at `(ε, u)`; `u = ∞` drops the screen.
pub fn rate_plus_star(
    model: &DistributionModel,
    pair: &ObservablePair,
    epsilon: f64,
    u: f64,
    variant: RateVariant,
) -> Result<f64> {
    Ok(rate_sup(model, pair, epsilon, u, variant)?.value)
}

/// [`rate_plus_star`] with its maximizer.
pub fn rate_sup(
    model: &DistributionModel,
    pair: &ObservablePair,
    epsilon: f64,
    u: f64,
    variant: RateVariant,
) -> Result<Sup> {
    let law = centered_law(model, pair)?;
    variant_sup(&law, epsilon, u, variant, None)
}

fn variant_sup(law: &JointLaw, epsilon: f64, u: f64, variant: RateVariant, seed: Option<(f64, f64)>) -> Result<Sup> {
    if !(epsilon >= 0.0) || epsilon.is_infinite() {
        return Err(Error::Domain { what: "epsilon", value: epsilon });
    }
    if !(u > 0.0) {
        return Err(Error::Domain { what: "u", value: u });
    }
    check_domination(law, variant)?;
    let (sf, su) = variant.signs();
    rate_on_law(law, sf, su, epsilon, u, seed)
}

/// `e^{-nΛ₊*} + e^{-nΛ₋*}`; `vacuous` marks `n = 0`, where the value is 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSidedBound {
    pub value: f64,
    pub lambda_plus_star: f64,
    pub lambda_minus_star: f64,
    pub vacuous: bool,
}

pub fn two_sided_bound(
    model: &DistributionModel,
    pair: &ObservablePair,
    epsilon: f64,
    u: f64,
    n: u64,
) -> Result<TwoSidedBound> {
    let law = centered_law(model, pair)?;
    let plus = variant_sup(&law, epsilon, u, RateVariant::LambdaPlus, None)?.value;
    let minus = variant_sup(&law, epsilon, u, RateVariant::LambdaMinus, None)?.value;
    let nf = n as f64;
    let term = |r: f64| if n == 0 { 1.0 } else { (-nf * r).exp() };
    Ok(TwoSidedBound { value: term(plus) + term(minus), lambda_plus_star: plus, lambda_minus_star: minus, vacuous: n == 0 })
}

/// Rates at one `(ε, u)` and the screening gain `Δ = max(Λ₊*, Γ₊*) - Λ*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePoint {
    pub epsilon: f64,
    pub u: f64,
    pub lambda_star: f64,
    pub lambda_plus_star: f64,
    pub gamma_plus_star: f64,
    pub delta: f64,
    /// Maximizer of the larger of `Λ₊*` and `Γ₊*`.
    pub theta_star: Option<(f64, f64)>,
}

pub fn delta_exponent(model: &DistributionModel, pair: &ObservablePair, epsilon: f64, u: f64) -> Result<RatePoint> {
    let law = centered_law(model, pair)?;
    if !law.is_light_tailed() {
        return Err(Error::Capability("the exponent gap needs finite exponential moments of F and U".into()));
    }
    let base = lambda_star_sup(&law, epsilon)?;
    let seed = base.theta.map(|(t, _)| (t, 0.0));
    let lp = variant_sup(&law, epsilon, u, RateVariant::LambdaPlus, seed)?;
    let gp = variant_sup(&law, epsilon, u, RateVariant::GammaPlus, seed)?;
    let best = if gp.value > lp.value { gp } else { lp };
    let mut delta = best.value - base.value;
    if delta.abs() <= DELTA_TOLERANCE {
        delta = 0.0;
    } else if delta < 0.0 {
        return Err(Error::Numeric(format!("screened rate below the unscreened rate by {}", -delta)));
    }
    Ok(RatePoint {
        epsilon,
        u,
        lambda_star: base.value,
        lambda_plus_star: lp.value,
        gamma_plus_star: gp.value,
        delta,
        theta_star: best.theta,
    })
}
