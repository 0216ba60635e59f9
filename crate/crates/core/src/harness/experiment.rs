use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::method::{MethodConfig, MethodKind, MethodSpec, DEFAULT_ALPHA0, DEFAULT_ALPHA_GROWTH};
use crate::clone::{self, ModelIoError, TrainError, Trajectory, TrajectoryError};
use crate::explorer::{ca_rollout, run, ExplorerConfig, ExplorerError, RolloutMode};
use crate::gridworld::{EnvTemplate, TemplateError};
use crate::state_space::{ground_truth_cells, CoverageCurve};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("trajectory was recorded on `{found}` but the experiment uses `{expected}`")]
    TemplateMismatch { expected: String, found: String },
    #[error("clone-assisted method needs a model file or demonstrations{}", .0.as_ref().map(|p| format!(" (missing {})", p.display())).unwrap_or_default())]
    MissingModel(Option<PathBuf>),
    #[error("human-seeded method needs a trajectory")]
    MissingTrajectory,
    #[error("results were produced with different budgets ({a} vs {b})")]
    BudgetMismatch { a: u64, b: u64 },
    #[error("an experiment needs at least one trial")]
    NoTrials,
    #[error("nothing to export")]
    EmptyResult,
    #[error("{path}: {source}")]
    Trajectory { path: PathBuf, source: TrajectoryError },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelIoError },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Explorer(#[from] ExplorerError),
    #[error("{0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub instance_seed: u64,
    pub rrt_seed: u64,
    pub ground_truth: u32,
    /// Cells covered before the first RRT iteration.
    pub seed_coverage: u32,
    pub saturation: Option<u64>,
    #[serde(skip)]
    pub curve: CoverageCurve,
    /// Not part of any exported file, which must be reproducible.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub template: String,
    pub label: String,
    pub method: MethodKind,
    pub max_iter: u64,
    pub master_seed: u64,
    pub trials: Vec<TrialResult>,
}

impl ExperimentResult {
    pub fn curves(&self) -> impl Iterator<Item = &CoverageCurve> {
        self.trials.iter().map(|t| &t.curve)
    }
}

/// Per-trial (instance seed, RRT seed) pairs drawn from the master seed.
/// They do not depend on the method, so methods sharing a master seed are
/// evaluated on the same instances. Instance seeds are pairwise distinct.
pub fn trial_seeds(master_seed: u64, trials: usize) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let mut used = HashSet::new();
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let inst = rng.next_u64();
        let rrt = rng.next_u64();
        if used.insert(inst) {
            out.push((inst, rrt));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub template: EnvTemplate,
    pub method: MethodSpec,
    pub label: String,
    pub trials: usize,
    pub max_iter: u64,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, HarnessError> {
    if spec.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    if let MethodSpec::HumanSeeded { trajectory, .. } = &spec.method {
        if trajectory.template != spec.template.name {
            return Err(HarnessError::TemplateMismatch {
                expected: spec.template.name.clone(),
                found: trajectory.template.clone(),
            });
        }
    }
    let seeds = trial_seeds(spec.master_seed, spec.trials);
    let work = || -> Result<Vec<TrialResult>, HarnessError> {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &(inst, rrt))| run_trial(spec, i, inst, rrt))
            .collect()
    };
    let trials = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Invalid(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(ExperimentResult {
        template: spec.template.name.clone(),
        label: spec.label.clone(),
        method: spec.method.kind(),
        max_iter: spec.max_iter,
        master_seed: spec.master_seed,
        trials,
    })
}

fn run_trial(spec: &ExperimentSpec, index: usize, instance_seed: u64, rrt_seed: u64) -> Result<TrialResult, HarnessError> {
    let start = Instant::now();
    let instance_seed = match &spec.method {
        MethodSpec::HumanSeeded { trajectory, .. } => trajectory.seed,
        _ => instance_seed,
    };
    let instance = spec.template.instantiate(instance_seed)?;
    let seeds = match &spec.method {
        MethodSpec::HumanSeeded { trajectory, .. } => Some(trajectory.as_ref().clone()),
        MethodSpec::CloneAssisted { model, rollout_cap, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(rrt_seed);
            Some(ca_rollout(model, &instance, *rollout_cap, RolloutMode::Argmax, &mut rng))
        }
        _ => None,
    };
    let config = ExplorerConfig {
        max_iterations: spec.max_iter,
        seed: rrt_seed,
        ..Default::default()
    };
    let (_, curve) = run(&instance, spec.method.sampler(), seeds.as_ref(), config)?;
    let ground_truth = ground_truth_cells(&instance).count;
    Ok(TrialResult {
        index,
        instance_seed,
        rrt_seed,
        ground_truth,
        seed_coverage: curve.at(0),
        saturation: curve.saturation_iteration(ground_truth),
        curve,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_trajectory(path: &Path, template: &EnvTemplate) -> Result<Trajectory, HarnessError> {
    Trajectory::load_with(path, template).map_err(|source| match source {
        TrajectoryError::TemplateMismatch { expected, found } => HarnessError::TemplateMismatch { expected, found },
        source => HarnessError::Trajectory {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Turns a method description into a runnable method, loading (and
/// replay-verifying) every referenced file. Relative paths are taken from `base`.
/// Demonstrations for a clone are checked against `demo_template`, the
/// template they were recorded on.
pub fn resolve_method(
    config: &MethodConfig,
    template: &EnvTemplate,
    base: &Path,
) -> Result<MethodSpec, HarnessError> {
    let weights = config.weights.unwrap_or_default();
    Ok(match config.kind {
        MethodKind::Rrt => MethodSpec::Uniform,
        MethodKind::Wrrt => MethodSpec::Weighted { weights },
        MethodKind::Hsrrt => {
            let path = config.trajectory.as_ref().ok_or(HarnessError::MissingTrajectory)?;
            let trajectory = load_trajectory(&resolve(base, path), template)?;
            MethodSpec::HumanSeeded {
                trajectory: Arc::new(trajectory),
                weights,
            }
        }
        MethodKind::Carrt => {
            let model = if let Some(path) = &config.model {
                let path = resolve(base, path);
                if !path.exists() {
                    return Err(HarnessError::MissingModel(Some(path)));
                }
                clone::load(&path).map_err(|source| HarnessError::Model { path, source })?
            } else if !config.demos.is_empty() {
                let mut demos = Vec::new();
                for p in &config.demos {
                    let path = resolve(base, p);
                    let traj = Trajectory::load(&path).map_err(|source| HarnessError::Trajectory { path, source })?;
                    demos.push(traj);
                }
                clone::train(&demos, &config.train.clone().unwrap_or_default())?
            } else {
                return Err(HarnessError::MissingModel(None));
            };
            MethodSpec::CloneAssisted {
                model: Arc::new(model),
                alpha0: config.alpha0.unwrap_or(DEFAULT_ALPHA0),
                growth: config.alpha_growth.unwrap_or(DEFAULT_ALPHA_GROWTH),
                fallback: weights,
                rollout_cap: config.rollout_cap.unwrap_or(ExplorerConfig::default().rollout_cap),
            }
        }
    })
}
