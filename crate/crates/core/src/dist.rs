//! Distribution models, observables, exact moments and joint log-MGFs.
//!
//! Three laws are supported:
//!
//! * `pareto_like`: density `5 / (2 x^{7/2})` on `[1, ∞)`, CDF `1 - x^{-5/2}`,
//!   sampled by inverse CDF `x = (1 - p)^{-2/5}`.
//! * `finite_support`: atoms with strictly positive probabilities.
//! * `sign_product`: `X = Y Z` with `Y` a finite-support magnitude and `Z = ±1`
//!   an independent fair sign; internally expanded to `2k` atoms.
//!
//! On `[1, ∞)` every function observable is of the form `c x^p + d`, which
//! makes moments closed-form and lets the log-MGF quadrature locate the peak
//! of its integrand exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::LogExpIntegrator;
use crate::rng::RandomStream;

/// Tail index of the pareto-like law: `P(X > x) = x^{-5/2}`.
pub const PARETO_TAIL: f64 = 2.5;

/// Tolerance on `Σ p_j = 1`.
pub const PMF_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionModel {
    ParetoLike,
    FiniteSupport { atoms: Vec<f64>, probs: Vec<f64> },
    SignProduct { atoms: Vec<f64>, probs: Vec<f64> },
}

fn validate_pmf(atoms: &[f64], probs: &[f64]) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::Config("finite support needs at least one atom".into()));
    }
    if atoms.len() != probs.len() {
        return Err(Error::Config(format!(
            "{} atoms but {} probabilities",
            atoms.len(),
            probs.len()
        )));
    }
    if let Some(x) = atoms.iter().find(|x| !x.is_finite()) {
        return Err(Error::Config(format!("non-finite atom {x}")));
    }
    if let Some(p) = probs.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::Config(format!("probability {p} is not strictly positive")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::Config(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

impl DistributionModel {
    pub fn finite(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let m = DistributionModel::FiniteSupport { atoms, probs };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionModel::ParetoLike => Ok(()),
            DistributionModel::FiniteSupport { atoms, probs }
            | DistributionModel::SignProduct { atoms, probs } => {
                validate_pmf(atoms, probs)?;
                if matches!(self, DistributionModel::SignProduct { .. })
                    && atoms.iter().any(|&y| y < 0.0)
                {
                    return Err(Error::Config("sign_product magnitudes must be nonnegative".into()));
                }
                Ok(())
            }
        }
    }

    /// Atoms and probabilities of a discrete model; sign products are
    /// expanded to `(+y_j, p_j/2), (-y_j, p_j/2)`.
    pub fn atoms(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            DistributionModel::ParetoLike => None,
            DistributionModel::FiniteSupport { atoms, probs } => Some((atoms.clone(), probs.clone())),
            DistributionModel::SignProduct { atoms, probs } => {
                let mut xs = Vec::with_capacity(2 * atoms.len());
                let mut ps = Vec::with_capacity(2 * atoms.len());
                for (&y, &p) in atoms.iter().zip(probs) {
                    xs.push(y);
                    ps.push(0.5 * p);
                    xs.push(-y);
                    ps.push(0.5 * p);
                }
                Some((xs, ps))
            }
        }
    }

    pub fn is_heavy_tailed(&self) -> bool {
        matches!(self, DistributionModel::ParetoLike)
    }
}

/// Inverse CDF of the pareto-like law.
#[inline]
pub fn pareto_quantile(p: f64) -> f64 {
    (1.0 - p).powf(-1.0 / PARETO_TAIL)
}

/// `c x^p + d`, the form every function observable takes on `[1, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerForm {
    pub coef: f64,
    pub power: f64,
    pub offset: f64,
}

impl PowerForm {
    fn constant(c: f64) -> Self {
        PowerForm { coef: 0.0, power: 0.0, offset: c }
    }

    fn monomial(power: f64) -> Self {
        if power == 0.0 {
            PowerForm::constant(1.0)
        } else {
            PowerForm { coef: 1.0, power, offset: 0.0 }
        }
    }
}

/// Real function of the sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    Identity,
    Power { exponent: f64 },
    Abs,
    Sign,
    Constant { value: f64 },
    Affine { scale: f64, offset: f64, inner: Box<Observable> },
    /// Per-atom values, indexed like the model's atom list.
    Table { values: Vec<f64> },
}

impl Observable {
    pub fn affine(scale: f64, offset: f64, inner: Observable) -> Self {
        Observable::Affine { scale, offset, inner: Box::new(inner) }
    }

    /// Evaluates at `x`. Tables have no pointwise form and yield NaN; use
    /// [`ObservablePair::tabulate`] for discrete models.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Identity => x,
            Observable::Power { exponent } => x.powf(*exponent),
            Observable::Abs => x.abs(),
            Observable::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Observable::Constant { value } => *value,
            Observable::Affine { scale, offset, inner } => scale * inner.eval(x) + offset,
            Observable::Table { .. } => f64::NAN,
        }
    }

    /// The `c x^p + d` form valid on `[1, ∞)`, if any.
    pub fn power_form(&self) -> Option<PowerForm> {
        match self {
            Observable::Identity | Observable::Abs => Some(PowerForm::monomial(1.0)),
            Observable::Power { exponent } => Some(PowerForm::monomial(*exponent)),
            Observable::Sign => Some(PowerForm::constant(1.0)),
            Observable::Constant { value } => Some(PowerForm::constant(*value)),
            Observable::Affine { scale, offset, inner } => {
                let f = inner.power_form()?;
                Some(PowerForm {
                    coef: scale * f.coef,
                    power: f.power,
                    offset: scale * f.offset + offset,
                })
            }
            Observable::Table { .. } => None,
        }
    }

    fn contains_table(&self) -> bool {
        match self {
            Observable::Table { .. } => true,
            Observable::Affine { inner, .. } => inner.contains_table(),
            _ => false,
        }
    }

    fn tabulate(&self, atoms: &[f64]) -> Result<Vec<f64>> {
        match self {
            Observable::Table { values } => {
                if values.len() != atoms.len() {
                    return Err(Error::Config(format!(
                        "table has {} values for {} atoms",
                        values.len(),
                        atoms.len()
                    )));
                }
                Ok(values.clone())
            }
            Observable::Affine { scale, offset, inner } => Ok(inner
                .tabulate(atoms)?
                .into_iter()
                .map(|v| scale * v + offset)
                .collect()),
            other => Ok(atoms.iter().map(|&x| other.eval(x)).collect()),
        }
    }
}

/// The estimated function `F` and the screening function `U`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablePair {
    pub f: Observable,
    pub u: Observable,
}

impl ObservablePair {
    pub fn new(f: Observable, u: Observable) -> Self {
        Self { f, u }
    }

    /// `F(x) = x^{3/4}`, `U(x) = x`.
    pub fn heavy_tail_example() -> Self {
        Self::new(Observable::Power { exponent: 0.75 }, Observable::Identity)
    }

    /// Values of `(F, U)` on each atom of a discrete model.
    pub fn tabulate(&self, model: &DistributionModel) -> Result<(Vec<f64>, Vec<f64>)> {
        let (atoms, _) = model
            .atoms()
            .ok_or_else(|| Error::Capability("tabulation needs a discrete model".into()))?;
        if matches!(model, DistributionModel::SignProduct { .. })
            && (self.f.contains_table() || self.u.contains_table())
        {
            return Err(Error::Config("table observables are not defined on sign_product".into()));
        }
        Ok((self.f.tabulate(&atoms)?, self.u.tabulate(&atoms)?))
    }

    fn power_forms(&self) -> Result<(PowerForm, PowerForm)> {
        match (self.f.power_form(), self.u.power_form()) {
            (Some(f), Some(u)) => Ok((f, u)),
            _ => Err(Error::Config("table observables need a discrete model".into())),
        }
    }
}

/// `Σ c_i x^{p_i} + constant` with at most two non-constant terms, on `[1, ∞)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PowerSum {
    terms: [(f64, f64); 2],
    len: usize,
    constant: f64,
}

impl PowerSum {
    /// `a F + b U` for power-form observables.
    pub(crate) fn combine(a: f64, f: &PowerForm, b: f64, u: &PowerForm) -> Self {
        let mut out = PowerSum { terms: [(0.0, 0.0); 2], len: 0, constant: a * f.offset + b * u.offset };
        for (c, p) in [(a * f.coef, f.power), (b * u.coef, u.power)] {
            if c == 0.0 {
                continue;
            }
            if p == 0.0 {
                out.constant += c;
                continue;
            }
            if let Some(t) = out.terms[..out.len].iter_mut().find(|t| t.1 == p) {
                t.0 += c;
            } else {
                out.terms[out.len] = (c, p);
                out.len += 1;
            }
        }
        // drop terms that cancelled
        let mut kept = [(0.0, 0.0); 2];
        let mut n = 0;
        for &t in &out.terms[..out.len] {
            if t.0 != 0.0 {
                kept[n] = t;
                n += 1;
            }
        }
        out.terms = kept;
        out.len = n;
        out
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let mut v = self.constant;
        for &(c, p) in &self.terms[..self.len] {
            v += c * x.powf(p);
        }
        v
    }

    /// Sum of the absolute sizes of the terms at `x`; evaluations carry
    /// rounding noise proportional to it.
    fn magnitude(&self, x: f64) -> f64 {
        self.terms[..self.len].iter().map(|&(c, p)| (c * x.powf(p)).abs()).sum::<f64>() + self.constant.abs()
    }

    /// Limit as `x → ∞`: `+∞`, `-∞`, or the finite constant.
    fn limit(&self) -> f64 {
        let lead = self.terms[..self.len]
            .iter()
            .filter(|t| t.1 > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match lead {
            Some(&(c, _)) if c > 0.0 => f64::INFINITY,
            Some(_) => f64::NEG_INFINITY,
            None => self.constant,
        }
    }

    /// Interior stationary point in `(1, ∞)`, if one exists. There is at most one.
    fn stationary_point(&self) -> Option<f64> {
        if self.len != 2 {
            return None;
        }
        let (c1, p1) = self.terms[0];
        let (c2, p2) = self.terms[1];
        let ratio = -(c2 * p2) / (c1 * p1);
        if !(ratio > 0.0) {
            return None;
        }
        let x = ratio.powf(1.0 / (p1 - p2));
        (x > 1.0 && x.is_finite()).then_some(x)
    }

    /// `sup_{x ≥ 1}` and a maximizing `x` (`∞` when approached at the tail).
    pub(crate) fn sup(&self) -> (f64, f64) {
        let mut best = (self.eval(1.0), 1.0);
        if let Some(x) = self.stationary_point() {
            let v = self.eval(x);
            if v > best.0 {
                best = (v, x);
            }
        }
        let lim = self.limit();
        if lim > best.0 {
            best = (lim, f64::INFINITY);
        }
        best
    }
}

/// Exact moments of an observable pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairMoments {
    pub mu: f64,
    pub nu: f64,
    pub var_f: f64,
    pub var_u: f64,
    pub gamma: f64,
}

fn pareto_raw_moment(power: f64, name: &str) -> Result<f64> {
    if power >= PARETO_TAIL {
        return Err(Error::Divergence { moment: name.to_string() });
    }
    Ok(PARETO_TAIL / (PARETO_TAIL - power))
}

/// `E[(c1 x^p1 + d1)(c2 x^p2 + d2)]` under the pareto-like law.
fn pareto_product_moment(a: &PowerForm, b: &PowerForm, name: &str) -> Result<f64> {
    let mut total = a.offset * b.offset;
    if a.coef != 0.0 && b.coef != 0.0 {
        total += a.coef * b.coef * pareto_raw_moment(a.power + b.power, name)?;
    }
    if a.coef != 0.0 {
        total += a.coef * b.offset * pareto_raw_moment(a.power, name)?;
    }
    if b.coef != 0.0 {
        total += a.offset * b.coef * pareto_raw_moment(b.power, name)?;
    }
    Ok(total)
}

/// `(E[F(X)], E[U(X)])` only; unlike [`exact_moments`] this does not need
/// second moments to exist.
pub fn means(model: &DistributionModel, pair: &ObservablePair) -> Result<(f64, f64)> {
    model.validate()?;
    match model.atoms() {
        Some((_, probs)) => {
            let (fv, uv) = pair.tabulate(model)?;
            let mean = |v: &[f64]| v.iter().zip(&probs).map(|(x, p)| x * p).sum::<f64>();
            Ok((mean(&fv), mean(&uv)))
        }
        None => {
            let (f, u) = pair.power_forms()?;
            let one = PowerForm::constant(1.0);
            Ok((
                pareto_product_moment(&f, &one, "E[F]")?,
                pareto_product_moment(&u, &one, "E[U]")?,
            ))
        }
    }
}

/// Means, variances and covariance of `(F(X), U(X))`.
pub fn exact_moments(model: &DistributionModel, pair: &ObservablePair) -> Result<PairMoments> {
    model.validate()?;
    match model.atoms() {
        Some((_, probs)) => {
            let (fv, uv) = pair.tabulate(model)?;
            let mean = |v: &[f64]| v.iter().zip(&probs).map(|(x, p)| x * p).sum::<f64>();
            let mu = mean(&fv);
            let nu = mean(&uv);
            let mut var_f = 0.0;
            let mut var_u = 0.0;
            let mut gamma = 0.0;
            for ((f, u), p) in fv.iter().zip(&uv).zip(&probs) {
                var_f += p * (f - mu) * (f - mu);
                var_u += p * (u - nu) * (u - nu);
                gamma += p * (f - mu) * (u - nu);
            }
            Ok(PairMoments { mu, nu, var_f, var_u, gamma })
        }
        None => {
            let (f, u) = pair.power_forms()?;
            let one = PowerForm::constant(1.0);
            let mu = pareto_product_moment(&f, &one, "E[F]")?;
            let nu = pareto_product_moment(&u, &one, "E[U]")?;
            let ff = pareto_product_moment(&f, &f, "E[F^2]")?;
            let uu = pareto_product_moment(&u, &u, "E[U^2]")?;
            let fu = pareto_product_moment(&f, &u, "E[FU]")?;
            Ok(PairMoments {
                mu,
                nu,
                var_f: ff - mu * mu,
                var_u: uu - nu * nu,
                gamma: fu - mu * nu,
            })
        }
    }
}

/// `count` i.i.d. draws from the model.
pub fn sample(model: &DistributionModel, stream: &mut RandomStream, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Input("sample count must be positive".into()));
    }
    let sampler = Sampler::new(model)?;
    Ok((0..count).map(|_| sampler.draw(stream)).collect())
}

/// A model prepared for repeated draws.
#[derive(Clone, Debug)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Pareto,
    Discrete { cdf: Vec<f64>, atoms: Vec<f64> },
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = f64::INFINITY;
    }
    cdf
}

impl Sampler {
    pub fn new(model: &DistributionModel) -> Result<Self> {
        model.validate()?;
        let kind = match model.atoms() {
            None => SamplerKind::Pareto,
            Some((atoms, probs)) => SamplerKind::Discrete { cdf: cumulative(&probs), atoms },
        };
        Ok(Self { kind })
    }

    /// Atom index for a uniform draw (discrete models only).
    #[inline]
    fn index(cdf: &[f64], p: f64) -> usize {
        cdf.partition_point(|&c| c <= p)
    }

    #[inline]
    pub fn draw(&self, stream: &mut RandomStream) -> f64 {
        let p = stream.uniform();
        match &self.kind {
            SamplerKind::Pareto => pareto_quantile(p),
            SamplerKind::Discrete { cdf, atoms } => atoms[Self::index(cdf, p)],
        }
    }
}

/// Draws `(F(X), U(X))` directly, using per-atom tables for discrete models.
#[derive(Clone, Debug)]
pub struct PairSampler {
    kind: PairSamplerKind,
}

#[derive(Clone, Debug)]
enum PairSamplerKind {
    Pareto { f: Observable, u: Observable },
    Discrete { cdf: Vec<f64>, f: Vec<f64>, u: Vec<f64> },
}

impl PairSampler {
    pub fn new(model: &DistributionModel, pair: &ObservablePair) -> Result<Self> {
        model.validate()?;
        let kind = match model.atoms() {
            None => {
                pair.power_forms()?;
                PairSamplerKind::Pareto { f: pair.f.clone(), u: pair.u.clone() }
            }
            Some((_, probs)) => {
                let (f, u) = pair.tabulate(model)?;
                PairSamplerKind::Discrete { cdf: cumulative(&probs), f, u }
            }
        };
        Ok(Self { kind })
    }

    #[inline]
    pub fn draw(&self, stream: &mut RandomStream) -> (f64, f64) {
        let p = stream.uniform();
        match &self.kind {
            PairSamplerKind::Pareto { f, u } => {
                let x = pareto_quantile(p);
                (f.eval(x), u.eval(x))
            }
            PairSamplerKind::Discrete { cdf, f, u } => {
                let i = Sampler::index(cdf, p);
                (f[i], u[i])
            }
        }
    }
}

/// Relative accuracy target of the heavy-tail quadrature.
const QUAD_REL_TOL: f64 = 1e-12;
/// Deepest dyadic panel `[2^{-k-1}, 2^{-k}]` in the uniform variable.
const MAX_PANEL: i32 = 1020;
/// A panel past the integrand's peak contributing less than this fraction of
/// the running total ends the panel sweep.
const PANEL_CUTOFF: f64 = 1e-17;

/// `log E[exp(a F(X) + b U(X))]` evaluator for a (model, pair).
///
/// Optional centering subtracts `(mu, nu)` from `(F, U)` inside the
/// exponent, which avoids cancellation when rate functions evaluate
/// `θ₁(μ+ε) - Λ(θ)` at large `θ`.
#[derive(Clone, Debug)]
pub struct JointLaw {
    kind: LawKind,
}

#[derive(Clone, Debug)]
enum LawKind {
    Atoms { log_p: Vec<f64>, f: Vec<f64>, u: Vec<f64> },
    Pareto { f: PowerForm, u: PowerForm },
}

impl JointLaw {
    pub fn new(model: &DistributionModel, pair: &ObservablePair) -> Result<Self> {
        Self::centered(model, pair, 0.0, 0.0)
    }

    pub fn centered(model: &DistributionModel, pair: &ObservablePair, mu: f64, nu: f64) -> Result<Self> {
        model.validate()?;
        let kind = match model.atoms() {
            Some((_, probs)) => {
                let (f, u) = pair.tabulate(model)?;
                LawKind::Atoms {
                    log_p: probs.iter().map(|p| p.ln()).collect(),
                    f: f.into_iter().map(|v| v - mu).collect(),
                    u: u.into_iter().map(|v| v - nu).collect(),
                }
            }
            None => {
                let (mut f, mut u) = pair.power_forms()?;
                f.offset -= mu;
                u.offset -= nu;
                LawKind::Pareto { f, u }
            }
        };
        Ok(Self { kind })
    }

    /// `ess sup [a F(X) + b U(X)]`; `+∞` when unbounded.
    pub fn ess_sup(&self, a: f64, b: f64) -> f64 {
        match &self.kind {
            LawKind::Atoms { f, u, .. } => f
                .iter()
                .zip(u)
                .map(|(x, y)| a * x + b * y)
                .fold(f64::NEG_INFINITY, f64::max),
            LawKind::Pareto { f, u } => PowerSum::combine(a, f, b, u).sup().0,
        }
    }

    /// True when every exponential moment of `F` and `U` is finite.
    pub fn is_light_tailed(&self) -> bool {
        match &self.kind {
            LawKind::Atoms { .. } => true,
            LawKind::Pareto { .. } => {
                [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                    .iter()
                    .all(|&(a, b)| self.ess_sup(a, b).is_finite())
            }
        }
    }

    /// `log E[exp(a F + b U)]`, `+∞` when the expectation diverges.
    pub fn log_mgf(&self, a: f64, b: f64) -> f64 {
        match &self.kind {
            LawKind::Atoms { log_p, f, u } => {
                let mut peak = f64::NEG_INFINITY;
                for ((lp, x), y) in log_p.iter().zip(f).zip(u) {
                    peak = peak.max(lp + a * x + b * y);
                }
                let s: f64 = log_p
                    .iter()
                    .zip(f)
                    .zip(u)
                    .map(|((lp, x), y)| (lp + a * x + b * y - peak).exp())
                    .sum();
                peak + s.ln()
            }
            LawKind::Pareto { f, u } => pareto_log_mgf(&PowerSum::combine(a, f, b, u)),
        }
    }
}

/// `log ∫_0^1 exp(h(q^{-2/5})) dq` on dyadic panels in the uniform variable.
fn pareto_log_mgf(h: &PowerSum) -> f64 {
    let (peak, x_peak) = h.sup();
    if peak == f64::INFINITY {
        return f64::INFINITY;
    }
    if h.len == 0 {
        return h.constant;
    }
    let exponent = |q: f64| h.eval(q.powf(-1.0 / PARETO_TAIL));
    let q_peak = if x_peak.is_finite() { x_peak.powf(-PARETO_TAIL) } else { 0.0 };
    let mut integ = LogExpIntegrator::new(&exponent, peak);
    let cutoff = PANEL_CUTOFF.ln();
    for k in 0..=MAX_PANEL {
        let hi = (-k as f64).exp2();
        let lo = hi * 0.5;
        let contribution = if q_peak > lo && q_peak <= hi {
            let a = push_graded(&mut integ, exponent, q_peak, hi, q_peak);
            let b = push_graded(&mut integ, exponent, lo, q_peak, q_peak);
            a.max(b)
        } else {
            integ.push(lo, hi)
        };
        let past_peak = lo <= q_peak || q_peak == 0.0 && k > 0;
        if past_peak && contribution - integ.log_total() < cutoff {
            break;
        }
    }
    // exp(h) cannot be resolved more finely than the rounding noise in h
    let noise = 16.0 * f64::EPSILON * h.magnitude(if x_peak.is_finite() { x_peak } else { 1.0 });
    integ.refine(QUAD_REL_TOL.max(noise), 20_000)
}

/// Pushes `[a, b]` cut at points approaching the endpoint `toward`
/// geometrically, so a sharp peak there is resolved at every scale.
/// Returns the log of the largest piece.
fn push_graded<H: Fn(f64) -> f64, G: Fn(f64) -> f64>(integ: &mut LogExpIntegrator<H>, h: G, a: f64, b: f64, toward: f64) -> f64 {
    if b <= a {
        return f64::NEG_INFINITY;
    }
    let top = h(toward);
    let start = if toward == a { b } else { a };
    let mut far = start;
    let mut best = f64::NEG_INFINITY;
    for j in 1..=52 {
        let near = toward + (start - toward) * 0.5f64.powi(j);
        // the rest is flat enough for a single rule
        if near == toward || (top - h(near)).abs() < 1e-3 {
            break;
        }
        best = best.max(if far < near { integ.push(far, near) } else { integ.push(near, far) });
        far = near;
    }
    best.max(if far < toward { integ.push(far, toward) } else { integ.push(toward, far) })
}

/// `Λ₊(θ₁, θ₂) = log E[exp(θ₁ F(X) - θ₂ U(X))]` for `θ₁, θ₂ ≥ 0`.
pub fn log_mgf_joint(model: &DistributionModel, pair: &ObservablePair, theta1: f64, theta2: f64) -> Result<f64> {
    if !(theta1 >= 0.0) {
        return Err(Error::Domain { what: "theta1", value: theta1 });
    }
    if !(theta2 >= 0.0) {
        return Err(Error::Domain { what: "theta2", value: theta2 });
    }
    Ok(JointLaw::new(model, pair)?.log_mgf(theta1, -theta2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DistributionModel {
        DistributionModel::finite(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn pareto_quantile_values() {
        assert_eq!(pareto_quantile(0.0), 1.0);
        // 1 - x^{-5/2} = 1/2  =>  x = 2^{2/5}
        assert!((pareto_quantile(0.5) - 2f64.powf(0.4)).abs() < 1e-15);
        assert!((pareto_quantile(0.5) - 1.31951).abs() < 1e-5);
    }

    #[test]
    fn rejects_unnormalized_pmf() {
        let bad = DistributionModel::FiniteSupport { atoms: vec![0.0, 1.0], probs: vec![0.5, 0.6] };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let mut s = RandomStream::new(1);
        assert!(sample(&bad, &mut s, 3).is_err());
        let zero = DistributionModel::FiniteSupport { atoms: vec![0.0, 1.0], probs: vec![0.0, 1.0] };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn sample_is_reproducible() {
        let a = sample(&DistributionModel::ParetoLike, &mut RandomStream::new(9), 100).unwrap();
        let b = sample(&DistributionModel::ParetoLike, &mut RandomStream::new(9), 100).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn heavy_tail_example_moments() {
        let m = exact_moments(&DistributionModel::ParetoLike, &ObservablePair::heavy_tail_example()).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(m.mu, 10.0 / 7.0) < 1e-12);
        assert!(rel(m.nu, 5.0 / 3.0) < 1e-12);
        assert!(rel(m.var_u, 20.0 / 9.0) < 1e-12);
        assert!(rel(m.gamma, 20.0 / 21.0) < 1e-12);
        assert!(rel(m.var_f, 45.0 / 98.0) < 1e-12);
    }

    #[test]
    fn divergent_moment_is_named() {
        let pair = ObservablePair::new(Observable::Power { exponent: 1.5 }, Observable::Identity);
        match exact_moments(&DistributionModel::ParetoLike, &pair) {
            Err(Error::Divergence { moment }) => assert_eq!(moment, "E[F^2]"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn two_point_moments() {
        let pair = ObservablePair::new(Observable::Identity, Observable::Identity);
        let m = exact_moments(&two_point(), &pair).unwrap();
        assert_eq!((m.mu, m.nu, m.var_f, m.var_u, m.gamma), (0.0, 0.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn log_mgf_edge_values() {
        let pair = ObservablePair::new(Observable::Identity, Observable::Constant { value: 0.0 });
        assert_eq!(log_mgf_joint(&two_point(), &pair, 0.0, 0.0).unwrap(), 0.0);
        let v = log_mgf_joint(&two_point(), &pair, 1.0, 0.0).unwrap();
        assert!((v - 1f64.cosh().ln()).abs() < 1e-15);
        assert!((v - 0.433781).abs() < 1e-6);

        let heavy = ObservablePair::heavy_tail_example();
        assert_eq!(log_mgf_joint(&DistributionModel::ParetoLike, &heavy, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(
            log_mgf_joint(&DistributionModel::ParetoLike, &heavy, 0.1, 0.0).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            log_mgf_joint(&two_point(), &pair, -0.1, 0.0),
            Err(Error::Domain { what: "theta1", .. })
        ));
    }

    #[test]
    fn pareto_log_mgf_slope_at_origin_is_the_mean() {
        // one-sided difference: only θ ≤ 0 is finite for U = X
        let law = JointLaw::new(&DistributionModel::ParetoLike, &ObservablePair::heavy_tail_example()).unwrap();
        let t = 1e-6;
        let slope = -law.log_mgf(0.0, -t) / t;
        assert!((slope - 5.0 / 3.0).abs() < 1e-5, "{slope}");
    }

    #[test]
    fn pareto_log_mgf_of_pure_power_matches_gamma_integral() {
        // E[exp(-θX)] = ∫_1^∞ e^{-θx} (5/2) x^{-7/2} dx; for θ = 1 compare with
        // an independent fine midpoint rule in log x.
        let law = JointLaw::new(&DistributionModel::ParetoLike, &ObservablePair::heavy_tail_example()).unwrap();
        let got = law.log_mgf(0.0, -1.0).exp();
        let n = 2_000_000;
        let upper = 60f64.ln();
        let h = upper / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            let x = t.exp();
            s += (-x).exp() * 2.5 * x.powf(-2.5);
        }
        s *= h;
        assert!((got - s).abs() < 1e-9, "{got} vs {s}");
    }

    #[test]
    fn ess_sup_of_heavy_pair() {
        let law = JointLaw::new(&DistributionModel::ParetoLike, &ObservablePair::heavy_tail_example()).unwrap();
        assert_eq!(law.ess_sup(1.0, 0.0), f64::INFINITY);
        // sup x^{3/4} - x attained at x = (3/4)^4
        assert_eq!(law.ess_sup(1.0, -1.0), 0.0);
        assert!(law.ess_sup(-1.0, -1.0) == -2.0);
        assert!(!law.is_light_tailed());
    }
}
