//! Experiment runner: Monte Carlo validation against the bounds and rates,
//! decay-slope fits, the entropy-duality suite, and report documents.

pub mod config;
pub mod output;

use serde_json::Value;

use crate::bounds::{self, BoundReport, ExamplePart, ExampleReport};
use crate::dist::{DistributionModel, ObservablePair};
use crate::error::{Error, Result};
use crate::par::{Counts, Pool};
use crate::rates::{self, RatePoint, RateVariant};
use crate::rng::RandomStream;
use crate::sanov::{self, SanovResult};
use crate::screen::{ScreenConfig, TrialKernel};

pub use config::ExperimentConfig;
use output::{num, object, opt_num};

/// Normal quantile of the 99.7% (3σ) intervals.
pub const Z: f64 = 3.0;
/// Standard errors of slack granted to a bound before it is declared violated.
pub const SLACK_SE: f64 = 3.0;

/// An empirical frequency with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub count: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl RateEstimate {
    pub fn wilson(count: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = count as f64 / n;
        let z2 = Z * Z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        RateEstimate { count, trials, estimate: p, lower: (center - half).max(0.0), upper: (center + half).min(1.0) }
    }

    /// Binomial standard error at the estimate.
    pub fn standard_error(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }

    fn to_json(self) -> Value {
        object([
            ("count", Value::from(self.count)),
            ("trials", Value::from(self.trials)),
            ("estimate", num(self.estimate)),
            ("lower", num(self.lower)),
            ("upper", num(self.upper)),
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

/// One bound compared against the empirical screened-error frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub report: Option<BoundReport>,
    /// The bound at the configured horizon.
    pub value: Option<f64>,
    pub status: CheckStatus,
    pub note: Option<String>,
}

impl BoundCheck {
    fn skipped(name: &'static str, why: impl Into<String>) -> Self {
        BoundCheck { name, report: None, value: None, status: CheckStatus::Skipped, note: Some(why.into()) }
    }

    fn judged(name: &'static str, report: BoundReport, n: u64, screened: &RateEstimate) -> Self {
        let value = report.bound_at(n);
        let slack = SLACK_SE * screened.standard_error();
        let status = if screened.estimate - slack <= value + 1e-12 { CheckStatus::Pass } else { CheckStatus::Fail };
        BoundCheck { name, report: Some(report), value: Some(value), status, note: None }
    }

    fn to_json(&self) -> Value {
        object([
            ("name", Value::from(self.name)),
            ("bound", self.report.as_ref().map_or(Value::Null, bound_report_json)),
            ("value", opt_num(self.value)),
            ("status", Value::from(self.status.as_str())),
            ("note", self.note.clone().map_or(Value::Null, Value::from)),
        ])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub screen: ScreenConfig,
    pub screened: RateEstimate,
    pub unscreened: RateEstimate,
    /// Screened count ≤ unscreened count.
    pub inclusion_holds: bool,
    pub checks: Vec<BoundCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.inclusion_holds && self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn to_json(&self) -> Value {
        object([
            ("seed", Value::from(self.seed)),
            ("screen", screen_json(&self.screen)),
            ("screened_error", self.screened.to_json()),
            ("unscreened_error", self.unscreened.to_json()),
            ("inclusion_holds", Value::from(self.inclusion_holds)),
            ("checks", Value::Array(self.checks.iter().map(BoundCheck::to_json).collect())),
            ("passed", Value::from(self.passed())),
            ("runtime", object([("version", Value::from(env!("CARGO_PKG_VERSION")))])),
        ])
    }
}

pub fn screen_json(s: &ScreenConfig) -> Value {
    object([
        ("epsilon", num(s.epsilon)),
        ("u", num(s.u)),
        ("n", Value::from(s.n)),
        ("sidedness", serde_json::to_value(s.sidedness).expect("enum serializes")),
    ])
}

pub fn bound_report_json(r: &BoundReport) -> Value {
    object([
        ("method", serde_json::to_value(r.method).expect("enum serializes")),
        ("exponent", num(r.exponent)),
        ("alpha_star", opt_num(r.alpha_star)),
        ("zero_event", Value::from(r.zero_event)),
    ])
}

pub fn rate_point_json(r: &RatePoint) -> Value {
    object([
        ("epsilon", num(r.epsilon)),
        ("u", num(r.u)),
        ("lambda_star", num(r.lambda_star)),
        ("lambda_plus_star", num(r.lambda_plus_star)),
        ("gamma_plus_star", num(r.gamma_plus_star)),
        ("delta", num(r.delta)),
        ("theta_star", r.theta_star.map_or(Value::Null, |(a, b)| Value::Array(vec![num(a), num(b)]))),
    ])
}

pub fn sanov_json(r: &SanovResult) -> Value {
    object([
        ("q_star", Value::Array(r.q_star.iter().map(|&q| num(q)).collect())),
        ("entropy", num(r.entropy)),
        ("fenchel_value", num(r.fenchel_value)),
        ("gap", num(r.gap)),
        ("feasible", Value::from(r.feasible)),
        ("degenerate", Value::from(r.degenerate)),
        ("primal_entropy", num(r.primal_entropy)),
        ("dual_entropy", num(r.dual_entropy)),
    ])
}

fn example_part_json(p: &ExamplePart) -> Value {
    object([
        ("gamma", serde_json::to_value(p.gamma).expect("enum serializes")),
        ("alpha_star", num(p.alpha_star)),
        ("coefficient", num(p.coefficient)),
        ("quoted_alpha", num(p.quoted_alpha)),
        ("coefficient_at_quoted_alpha", num(p.coefficient_at_quoted_alpha)),
        ("quoted_coefficient", num(p.quoted_coefficient)),
        ("unrestricted_coefficient", num(p.unrestricted_coefficient)),
        ("unrestricted_alpha_star", num(p.unrestricted_alpha_star)),
        ("bound", num(p.bound)),
        ("bound_computed", num(p.bound_computed)),
    ])
}

pub fn example_report_json(r: &ExampleReport) -> Value {
    object([
        ("epsilon", num(r.epsilon)),
        ("u", num(r.u)),
        ("n", Value::from(r.n)),
        ("variance_only", example_part_json(&r.variance_only)),
        ("with_covariance", example_part_json(&r.with_covariance)),
    ])
}

fn is_worked_example(model: &DistributionModel, pair: &ObservablePair) -> bool {
    *model == DistributionModel::ParetoLike && *pair == ObservablePair::heavy_tail_example()
}

/// Every bound applicable to the configuration, unjudged.
pub fn applicable_bounds(cfg: &ExperimentConfig) -> Vec<(&'static str, std::result::Result<BoundReport, String>)> {
    let s = &cfg.screen;
    let pair = cfg.pair();
    let mut out = Vec::new();
    match cfg.normalized_pair() {
        Ok(np) => {
            let (eps, u) = (np.epsilon(s.epsilon), np.u(s.u));
            out.push(("alpha_optimized", bounds::alpha_optimized_bound(&np, eps, u).map_err(|e| e.to_string())));
            out.push((
                "fixed_alpha",
                match s.k {
                    Some(k) if u <= k * eps => bounds::fixed_alpha_bound(&np, eps, k).map_err(|e| e.to_string()),
                    Some(k) => Err(format!("normalized u = {u} exceeds K epsilon = {}", k * eps)),
                    None => Err("no K configured".into()),
                },
            ));
        }
        Err(why) => {
            out.push(("alpha_optimized", Err(why.clone())));
            out.push(("fixed_alpha", Err(why)));
        }
    }
    out.push((
        "chernoff_rate",
        rates::rate_plus_star(&cfg.model, &pair, s.epsilon, s.u, RateVariant::LambdaPlus)
            .map(|r| BoundReport { method: bounds::BoundMethod::ChernoffRate, exponent: r, alpha_star: None, zero_event: r == f64::INFINITY })
            .map_err(|e| e.to_string()),
    ));
    let example = if !is_worked_example(&cfg.model, &pair) {
        Err("only for the heavy-tail example pair".to_string())
    } else if s.u > s.epsilon / 20.0 * (1.0 + 1e-12) {
        Err("needs u <= epsilon/20".to_string())
    } else {
        Ok(())
    };
    for (name, coeff) in [
        ("worked_example_variance_only", bounds::VARIANCE_ONLY_COEFF),
        ("worked_example_covariance", bounds::WITH_COVARIANCE_COEFF),
    ] {
        out.push((
            name,
            example.clone().map(|_| BoundReport {
                method: bounds::BoundMethod::AlphaOptimized,
                exponent: coeff * s.epsilon * s.epsilon,
                alpha_star: None,
                zero_event: false,
            }),
        ));
    }
    out
}

/// Runs `trials` independent trials on sub-streams `(seed, i)` and compares
/// the final-step screened error frequency with every applicable bound.
pub fn run_validation(cfg: &ExperimentConfig, pool: &Pool) -> Result<ValidationReport> {
    cfg.validate()?;
    let screen = cfg.screen_config();
    let kernel = TrialKernel::new(&cfg.model, &cfg.pair(), &screen)?;
    let counts: Counts = pool.run_trials(&kernel, cfg.seed, 0, cfg.trials);
    let screened = RateEstimate::wilson(counts.screened, counts.trials);
    let unscreened = RateEstimate::wilson(counts.unscreened, counts.trials);
    let n = screen.n as u64;
    let checks = applicable_bounds(cfg)
        .into_iter()
        .map(|(name, r)| match r {
            Ok(report) => BoundCheck::judged(name, report, n, &screened),
            Err(why) => BoundCheck::skipped(name, why),
        })
        .collect();
    Ok(ValidationReport {
        seed: cfg.seed,
        screen,
        screened,
        unscreened,
        inclusion_holds: counts.screened <= counts.unscreened,
        checks,
    })
}

/// Least-squares slope and intercept of `log p` against `log n`.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Input("a slope needs at least two points".into()));
    }
    if let Some(&(n, _)) = points.iter().find(|(_, p)| !(*p > 0.0)) {
        return Err(Error::InsufficientTrials(format!(
            "no error events at n = {n}; raise the trial count or lower n"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, p)| p.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input("horizons must differ".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopePoint {
    pub n: usize,
    pub hits: u64,
    pub trials: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<SlopePoint>,
}

/// Empirical `P(Ŝ_n - μ > ε)` at each horizon and the fitted decay slope.
/// Horizon `j` uses trial sub-streams offset by `j · 2^40`.
pub fn run_heavy_tail_slope(
    model: &DistributionModel,
    pair: &ObservablePair,
    epsilon: f64,
    horizons: &[usize],
    trials: u64,
    seed: u64,
    pool: &Pool,
) -> Result<SlopeFit> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(horizons.len());
    for (j, &n) in horizons.iter().enumerate() {
        // the screen plays no role here
        let cfg = ScreenConfig { epsilon, u: f64::INFINITY, n, sidedness: crate::screen::Sidedness::TwoSided };
        let kernel = TrialKernel::new(model, pair, &cfg)?;
        let c = pool.run_trials(&kernel, seed, (j as u64) << 40, trials);
        points.push(SlopePoint { n, hits: c.unscreened, trials, probability: c.unscreened as f64 / trials as f64 });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.probability)).collect();
    let (slope, intercept) = fit_log_slope(&xy)?;
    Ok(SlopeFit { slope, intercept, points })
}

/// One instance of the duality suite.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityRow {
    pub support: usize,
    pub epsilon: f64,
    pub u: f64,
    pub result: SanovResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualitySuite {
    pub rows: Vec<DualityRow>,
    pub max_gap: f64,
    pub max_primal_dual: f64,
}

/// Largest accepted `|entropy - Legendre rate|`.
pub const DUALITY_TOL: f64 = 1e-4;
/// Largest accepted disagreement of the primal and dual entropy paths.
pub const PATH_TOL: f64 = 1e-6;

impl DualitySuite {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.result.feasible) && self.max_gap <= DUALITY_TOL && self.max_primal_dual <= PATH_TOL
    }

    pub fn to_json(&self) -> Value {
        object([
            ("instances", Value::from(self.rows.len())),
            ("max_gap", num(self.max_gap)),
            ("max_primal_dual", num(self.max_primal_dual)),
            ("passed", Value::from(self.passed())),
            (
                "rows",
                Value::Array(
                    self.rows
                        .iter()
                        .map(|r| {
                            object([
                                ("support", Value::from(r.support)),
                                ("epsilon", num(r.epsilon)),
                                ("u", num(r.u)),
                                ("result", sanov_json(&r.result)),
                            ])
                        })
                        .collect(),
                ),
            ),
        ])
    }
}

/// `count` random discrete instances on sub-streams `(seed, i)`, each solved
/// by the entropy oracle and the Legendre rate.
pub fn run_duality_suite(seed: u64, count: usize, pool: &Pool) -> Result<DualitySuite> {
    let rows = pool.map(count, |i| -> Result<DualityRow> {
        let inst = sanov::random_instance(&mut RandomStream::substream(seed, i as u64))?;
        let result = sanov::sanov_rate(&inst.model, &inst.pair, inst.epsilon, inst.u, RateVariant::LambdaPlus)?;
        let support = inst.model.atoms().map_or(0, |(a, _)| a.len());
        Ok(DualityRow { support, epsilon: inst.epsilon, u: inst.u, result })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let max_gap = rows.iter().map(|r| r.result.gap).fold(0.0, f64::max);
    let max_primal_dual = rows
        .iter()
        .map(|r| (r.result.primal_entropy - r.result.dual_entropy).abs())
        .fold(0.0, f64::max);
    Ok(DualitySuite { rows, max_gap, max_primal_dual })
}

/// Multiples of the configured `u` tabulated by `rates`.
pub const U_MULTIPLES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// One row of the rates table; `None` where the rate is unavailable.
#[derive(Clone, Debug, PartialEq)]
pub struct RatesRow {
    pub epsilon: f64,
    pub u: f64,
    pub lambda_star: Option<f64>,
    pub variants: [Option<f64>; 4],
    pub delta: Option<f64>,
}

pub fn rates_table(model: &DistributionModel, pair: &ObservablePair, epsilon: f64, u: f64) -> Result<Vec<RatesRow>> {
    let lambda_star = rates::rate_lambda_star(model, pair, epsilon).ok();
    let mut rows = Vec::new();
    for m in U_MULTIPLES {
        let uu = u * m;
        let mut variants = [None; 4];
        for (slot, v) in variants.iter_mut().zip(RateVariant::ALL) {
            *slot = match rates::rate_plus_star(model, pair, epsilon, uu, v) {
                Ok(r) => Some(r),
                Err(Error::Capability(_)) => None,
                Err(e) => return Err(e),
            };
        }
        let delta = match rates::delta_exponent(model, pair, epsilon, uu) {
            Ok(p) => Some(p.delta),
            Err(Error::Capability(_)) => None,
            Err(e) => return Err(e),
        };
        rows.push(RatesRow { epsilon, u: uu, lambda_star, variants, delta });
    }
    Ok(rows)
}

pub fn rates_csv(rows: &[RatesRow]) -> String {
    let cell = |x: Option<f64>| x.map_or(String::new(), output::fmt_g17);
    let mut out = String::from("epsilon,u,lambda_star,lambda_plus_star,gamma_plus_star,lambda_minus_star,gamma_minus_star,delta\n");
    for r in rows {
        let fields = [
            output::fmt_g17(r.epsilon),
            output::fmt_g17(r.u),
            cell(r.lambda_star),
            cell(r.variants[0]),
            cell(r.variants[1]),
            cell(r.variants[2]),
            cell(r.variants[3]),
            cell(r.delta),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
