//! Streaming screened estimator.
//!
//! `Ŝ_k` and `T̂_k` are the running means of `F(X_i)` and `U(X_i)`. An
//! estimate `Ŝ_k` is *screened in* when `T̂_k` lies strictly within `u` of the
//! known mean `ν` of `U`.

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionModel, ObservablePair, PairSampler};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// `|T̂ - ν| < u`
    TwoSided,
    /// `T̂ - ν < u`
    OneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenConfig {
    pub epsilon: f64,
    pub u: f64,
    pub n: usize,
    pub sidedness: Sidedness,
}

impl ScreenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain { what: "epsilon", value: self.epsilon });
        }
        if !(self.u > 0.0) {
            return Err(Error::Domain { what: "u", value: self.u });
        }
        if self.n == 0 {
            return Err(Error::Config("horizon n must be at least 1".into()));
        }
        Ok(())
    }
}

/// Running means after `k` samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StreamState {
    pub k: u64,
    pub s_hat: f64,
    pub t_hat: f64,
}

impl StreamState {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, f_value: f64, u_value: f64) {
        self.k += 1;
        let k = self.k as f64;
        self.s_hat += (f_value - self.s_hat) / k;
        self.t_hat += (u_value - self.t_hat) / k;
    }

    /// Screening predicate with strict inequality; an empty stream is an error.
    pub fn screened(&self, nu: f64, u: f64, sidedness: Sidedness) -> Result<bool> {
        if self.k == 0 {
            return Err(Error::EmptyStream);
        }
        Ok(screen_predicate(self.t_hat, nu, u, sidedness))
    }
}

#[inline]
fn screen_predicate(t_hat: f64, nu: f64, u: f64, sidedness: Sidedness) -> bool {
    let d = t_hat - nu;
    match sidedness {
        Sidedness::TwoSided => d.abs() < u,
        Sidedness::OneSided => d < u,
    }
}

pub fn update_stream(mut state: StreamState, f_value: f64, u_value: f64) -> StreamState {
    state.push(f_value, u_value);
    state
}

pub fn screen_decision(state: &StreamState, nu: f64, u: f64, sidedness: Sidedness) -> Result<bool> {
    state.screened(nu, u, sidedness)
}

/// `S̃_k = (1/k) Σ (F(X_i) - β [U(X_i) - ν])`.
pub fn control_variate_estimate(f_values: &[f64], u_values: &[f64], beta: f64, nu: f64) -> Result<f64> {
    if f_values.is_empty() {
        return Err(Error::Input("control variate needs at least one sample".into()));
    }
    if f_values.len() != u_values.len() {
        return Err(Error::Input(format!(
            "{} F values but {} U values",
            f_values.len(),
            u_values.len()
        )));
    }
    let mut mean = 0.0;
    for (i, (f, u)) in f_values.iter().zip(u_values).enumerate() {
        let y = f - beta * (u - nu);
        mean += (y - mean) / (i + 1) as f64;
    }
    Ok(mean)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub k: u64,
    pub s_hat: f64,
    pub t_hat: f64,
    pub screened: bool,
}

/// One record per step `k = 1..=n`.
pub fn run_trajectory(
    model: &DistributionModel,
    pair: &ObservablePair,
    config: &ScreenConfig,
    stream: &mut RandomStream,
) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    let (_, nu) = crate::dist::means(model, pair)?;
    let sampler = PairSampler::new(model, pair)?;
    let mut state = StreamState::new();
    let mut out = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let (f, u) = sampler.draw(stream);
        state.push(f, u);
        out.push(TrajectoryRecord {
            k: state.k,
            s_hat: state.s_hat,
            t_hat: state.t_hat,
            screened: screen_predicate(state.t_hat, nu, config.u, config.sidedness),
        });
    }
    Ok(out)
}

/// Final-step error events of one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    /// `Ŝ_n - μ > ε`
    pub unscreened_error: bool,
    /// `Ŝ_n - μ > ε` and the screening predicate holds at `n`
    pub screened_error: bool,
}

/// Everything a trial needs, prepared once and shared across workers.
#[derive(Clone, Debug)]
pub struct TrialKernel {
    sampler: PairSampler,
    mu: f64,
    nu: f64,
    config: ScreenConfig,
}

impl TrialKernel {
    pub fn new(model: &DistributionModel, pair: &ObservablePair, config: &ScreenConfig) -> Result<Self> {
        config.validate()?;
        let (mu, nu) = crate::dist::means(model, pair)?;
        Ok(Self {
            sampler: PairSampler::new(model, pair)?,
            mu,
            nu,
            config: *config,
        })
    }

    pub fn with_horizon(&self, n: usize) -> Self {
        let mut k = self.clone();
        k.config.n = n;
        k
    }

    pub fn final_state(&self, stream: &mut RandomStream) -> StreamState {
        let mut state = StreamState::new();
        for _ in 0..self.config.n {
            let (f, u) = self.sampler.draw(stream);
            state.push(f, u);
        }
        state
    }

    pub fn outcome(&self, stream: &mut RandomStream) -> TrialOutcome {
        let s = self.final_state(stream);
        let err = s.s_hat - self.mu > self.config.epsilon;
        TrialOutcome {
            unscreened_error: err,
            screened_error: err && screen_predicate(s.t_hat, self.nu, self.config.u, self.config.sidedness),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Observable, PARETO_TAIL};

    const NU: f64 = 5.0 / 3.0;

    #[test]
    fn update_examples() {
        let s = update_stream(StreamState::new(), 3.0, 5.0);
        assert_eq!((s.k, s.s_hat, s.t_hat), (1, 3.0, 5.0));
        let s = update_stream(s, 1.0, 1.0);
        assert_eq!((s.k, s.s_hat, s.t_hat), (2, 2.0, 3.0));
    }

    #[test]
    fn decision_examples() {
        let at = |t| StreamState { k: 10, s_hat: 0.0, t_hat: t };
        assert!(screen_decision(&at(1.668), NU, 0.005, Sidedness::TwoSided).unwrap());
        assert!(!screen_decision(&at(1.675), NU, 0.005, Sidedness::TwoSided).unwrap());
        // exact boundary: strict inequality under both modes
        let (nu, u) = (1.5, 0.25);
        assert!(!screen_decision(&at(nu + u), nu, u, Sidedness::TwoSided).unwrap());
        assert!(!screen_decision(&at(nu + u), nu, u, Sidedness::OneSided).unwrap());
        // one-sided accepts any low value
        assert!(screen_decision(&at(-100.0), nu, u, Sidedness::OneSided).unwrap());
        assert!(matches!(
            screen_decision(&StreamState::new(), NU, 0.005, Sidedness::TwoSided),
            Err(Error::EmptyStream)
        ));
    }

    #[test]
    fn control_variate_examples() {
        let f = [1.0, 1.0, 1.0];
        let u = [2.0, 4.0, 6.0];
        assert_eq!(control_variate_estimate(&f, &u, 1.0, 4.0).unwrap(), 1.0);
        let f = [0.5, 2.0, 7.25];
        assert_eq!(control_variate_estimate(&f, &u, 0.0, 4.0).unwrap(), (0.5 + 2.0 + 7.25) / 3.0);
        assert!(control_variate_estimate(&[], &[], 1.0, 0.0).is_err());
        assert!(control_variate_estimate(&[1.0], &[1.0, 2.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = ScreenConfig { epsilon: 0.1, u: 0.005, n: 10, sidedness: Sidedness::TwoSided };
        assert!(ok.validate().is_ok());
        assert!(ScreenConfig { epsilon: 0.0, ..ok }.validate().is_err());
        assert!(ScreenConfig { u: -1.0, ..ok }.validate().is_err());
        assert!(ScreenConfig { n: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn single_step_trajectory() {
        let model = DistributionModel::ParetoLike;
        let pair = ObservablePair::heavy_tail_example();
        let cfg = ScreenConfig { epsilon: 0.1, u: 0.005, n: 1, sidedness: Sidedness::TwoSided };
        let recs = run_trajectory(&model, &pair, &cfg, &mut RandomStream::new(3)).unwrap();
        assert_eq!(recs.len(), 1);
        let mut s = RandomStream::new(3);
        let x = (1.0 - s.uniform()).powf(-1.0 / PARETO_TAIL);
        assert_eq!(recs[0].s_hat, Observable::Power { exponent: 0.75 }.eval(x));
        assert_eq!(recs[0].t_hat, x);
    }

    #[test]
    fn trajectory_final_step_matches_kernel() {
        let model = DistributionModel::ParetoLike;
        let pair = ObservablePair::heavy_tail_example();
        let cfg = ScreenConfig { epsilon: 0.1, u: 0.05, n: 500, sidedness: Sidedness::TwoSided };
        let recs = run_trajectory(&model, &pair, &cfg, &mut RandomStream::substream(5, 11)).unwrap();
        let kernel = TrialKernel::new(&model, &pair, &cfg).unwrap();
        let fin = kernel.final_state(&mut RandomStream::substream(5, 11));
        let last = recs.last().unwrap();
        assert_eq!((last.s_hat, last.t_hat), (fin.s_hat, fin.t_hat));
        for r in &recs {
            let st = StreamState { k: r.k, s_hat: r.s_hat, t_hat: r.t_hat };
            assert_eq!(r.screened, screen_decision(&st, NU, cfg.u, cfg.sidedness).unwrap());
        }
    }
}
