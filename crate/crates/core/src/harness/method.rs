use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clone::{PolicyModel, Trajectory};
use crate::explorer::{ActionSampler, ActionWeights};

/// Short method names used on the command line, in manifests and in the API.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    /// Uniform action sampling.
    Rrt,
    /// Hand-weighted action sampling.
    Wrrt,
    /// Demonstration-seeded, weighted sampling.
    Hsrrt,
    /// Clone-rollout-seeded, clone-prior sampling.
    Carrt,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [MethodKind::Rrt, MethodKind::Wrrt, MethodKind::Hsrrt, MethodKind::Carrt];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Rrt => "rrt",
            MethodKind::Wrrt => "wrrt",
            MethodKind::Hsrrt => "hsrrt",
            MethodKind::Carrt => "carrt",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected rrt, wrrt, hsrrt or carrt)"))
    }
}

pub const DEFAULT_ALPHA0: f64 = 0.1;
pub const DEFAULT_ALPHA_GROWTH: f64 = 1e-5;

/// A fully resolved exploration method.
#[derive(Clone, Debug)]
pub enum MethodSpec {
    Uniform,
    Weighted {
        weights: ActionWeights,
    },
    HumanSeeded {
        trajectory: Arc<Trajectory>,
        weights: ActionWeights,
    },
    CloneAssisted {
        model: Arc<PolicyModel>,
        alpha0: f64,
        growth: f64,
        fallback: ActionWeights,
        rollout_cap: usize,
    },
}

impl MethodSpec {
    pub fn kind(&self) -> MethodKind {
        match self {
            MethodSpec::Uniform => MethodKind::Rrt,
            MethodSpec::Weighted { .. } => MethodKind::Wrrt,
            MethodSpec::HumanSeeded { .. } => MethodKind::Hsrrt,
            MethodSpec::CloneAssisted { .. } => MethodKind::Carrt,
        }
    }

    pub fn sampler(&self) -> ActionSampler {
        match self {
            MethodSpec::Uniform => ActionSampler::Uniform,
            MethodSpec::Weighted { weights } | MethodSpec::HumanSeeded { weights, .. } => {
                ActionSampler::Weighted(*weights)
            }
            MethodSpec::CloneAssisted {
                model,
                alpha0,
                growth,
                fallback,
                ..
            } => ActionSampler::ClonePrior {
                policy: model.clone(),
                alpha0: *alpha0,
                growth: *growth,
                fallback: *fallback,
            },
        }
    }
}

/// Method parameters as written in manifests and API requests; file
/// references are resolved by [`super::resolve_method`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub kind: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ActionWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Demonstrations to train a clone from when no model file is given.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demos: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<crate::clone::TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rollout_cap: Option<usize>,
}

impl MethodConfig {
    pub fn of(kind: MethodKind) -> Self {
        MethodConfig {
            kind,
            label: None,
            weights: None,
            trajectory: None,
            model: None,
            demos: Vec::new(),
            train: None,
            alpha0: None,
            alpha_growth: None,
            rollout_cap: None,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.name().to_string())
    }
}
