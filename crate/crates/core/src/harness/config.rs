use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bounds::{Covariance, NormalizationInput, NormalizedPair};
use crate::dist::{self, DistributionModel, Observable, ObservablePair};
use crate::error::{Error, Result};
use crate::screen::{ScreenConfig, Sidedness};

/// One experiment, read from a JSON document with top-level keys `model`,
/// `observables`, `screen`, `trials`, `seed` and `outputs`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: DistributionModel,
    pub observables: ObservableSpec,
    pub screen: ScreenSpec,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub f: Observable,
    pub u: Observable,
    /// Constants for the explicit bounds; without them only the exact rate
    /// is compared.
    #[serde(default)]
    pub normalization: Option<NormalizationSpec>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationSpec {
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub f_lower: Option<f64>,
    #[serde(default)]
    pub gamma: GammaSpec,
}

/// Covariance information handed to the bounds: the exact value computed
/// from the model, or only `|γ| ≤ b` on the normalized scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    #[default]
    Exact,
    AbsBound(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenSpec {
    pub epsilon: f64,
    pub u: f64,
    pub n: usize,
    #[serde(default = "two_sided")]
    pub sidedness: Sidedness,
    /// `K` of the fixed-`α` bound, valid for `u ≤ Kε`.
    #[serde(default)]
    pub k: Option<f64>,
}

fn two_sided() -> Sidedness {
    Sidedness::TwoSided
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    TrajectoryCsv,
    Report,
    RatesTable,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub path: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.screen_config().validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if let Some(k) = self.screen.k {
            if !(k > 0.0) {
                return Err(Error::Config(format!("k must be positive, got {k}")));
            }
        }
        let mut seen = HashSet::new();
        for o in &self.outputs {
            if !seen.insert(&o.path) {
                return Err(Error::Config(format!("output path {} is listed twice", o.path.display())));
            }
        }
        Ok(())
    }

    pub fn pair(&self) -> ObservablePair {
        ObservablePair::new(self.observables.f.clone(), self.observables.u.clone())
    }

    pub fn screen_config(&self) -> ScreenConfig {
        ScreenConfig {
            epsilon: self.screen.epsilon,
            u: self.screen.u,
            n: self.screen.n,
            sidedness: self.screen.sidedness,
        }
    }

    pub fn output(&self, kind: OutputKind) -> impl Iterator<Item = &Path> {
        self.outputs.iter().filter(move |o| o.kind == kind).map(|o| o.path.as_path())
    }

    /// The normalized pair for the explicit bounds, or why there is none.
    pub fn normalized_pair(&self) -> std::result::Result<NormalizedPair, String> {
        let Some(spec) = &self.observables.normalization else {
            return Err("no normalization constants configured".into());
        };
        let pair = self.pair();
        let moments = dist::exact_moments(&self.model, &pair).map_err(|e| e.to_string())?;
        let input = NormalizationInput {
            pair,
            nu: moments.nu,
            var_u: moments.var_u,
            c1: spec.c1,
            c2: spec.c2,
            f_lower: spec.f_lower,
            covariance: match spec.gamma {
                GammaSpec::Exact => Some(moments.gamma),
                GammaSpec::AbsBound(_) => None,
            },
        };
        let mut np = crate::bounds::normalize_observables(&self.model, &input).map_err(|e| e.to_string())?;
        if let GammaSpec::AbsBound(b) = spec.gamma {
            np.gamma = Covariance::AbsBound(b.abs().min(1.0));
        }
        Ok(np)
    }
}
