use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::experiment::{resolve_method, run_experiment, ExperimentResult, ExperimentSpec, HarnessError};
use super::export::{write_results_dir, Summary};
use super::method::{MethodConfig, MethodKind, MethodSpec};
use crate::clone::Trajectory;
use crate::explorer::{ca_rollout, ActionSampler, ActionWeights, ExplorerConfig, RolloutMode};
use crate::gridworld::{catalog, EnvInstance, EnvTemplate};

pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_BUDGET: u64 = 20_000;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

/// Experiment description file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Built-in template name, or a path to a template JSON file.
    pub template: String,
    pub methods: Vec<MethodConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_budget")]
    pub max_iter: u64,
    #[serde(default)]
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Label of the method the others are compared against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Invalid(format!("manifest: {e}")))
    }
}

/// Looks up a built-in template, falling back to a template file.
pub fn resolve_template(name: &str, base: &Path) -> Result<EnvTemplate, HarnessError> {
    if let Some(t) = catalog::by_name(name) {
        return Ok(t);
    }
    let path = base.join(name);
    if path.extension().is_some_and(|e| e == "json") && path.exists() {
        return Ok(EnvTemplate::load(&path)?);
    }
    Err(HarnessError::Invalid(format!("unknown template `{name}`")))
}

/// A manifest whose every referenced file has been loaded and checked.
#[derive(Debug)]
pub struct PreparedExperiment {
    pub specs: Vec<ExperimentSpec>,
    pub output_dir: PathBuf,
    pub baseline: Option<String>,
}

pub fn prepare(manifest: &Manifest, base: &Path) -> Result<PreparedExperiment, HarnessError> {
    if manifest.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    if manifest.methods.is_empty() {
        return Err(HarnessError::Invalid("manifest lists no methods".into()));
    }
    let template = resolve_template(&manifest.template, base)?;
    template.validate()?;
    let mut specs = Vec::new();
    for m in &manifest.methods {
        specs.push(ExperimentSpec {
            template: template.clone(),
            method: resolve_method(m, &template, base)?,
            label: m.label(),
            trials: manifest.trials,
            max_iter: manifest.max_iter,
            master_seed: manifest.master_seed,
            threads: manifest.threads,
        });
    }
    if let Some(b) = &manifest.baseline {
        if !specs.iter().any(|s| &s.label == b) {
            return Err(HarnessError::Invalid(format!("baseline `{b}` is not one of the methods")));
        }
    }
    let labels: std::collections::HashSet<_> = specs.iter().map(|s| super::export::label_dir(&s.label)).collect();
    if labels.len() != specs.len() {
        return Err(HarnessError::Invalid("method labels must be distinct".into()));
    }
    Ok(PreparedExperiment {
        specs,
        output_dir: base.join(&manifest.output_dir),
        baseline: manifest.baseline.clone(),
    })
}

impl PreparedExperiment {
    pub fn run(&self) -> Result<Vec<ExperimentResult>, HarnessError> {
        self.specs.iter().map(run_experiment).collect()
    }

    pub fn run_and_write(&self) -> Result<(Vec<ExperimentResult>, Summary), HarnessError> {
        let results = self.run()?;
        let summary = write_results_dir(&self.output_dir, &results, self.baseline.as_deref())?;
        Ok((results, summary))
    }
}

/// Loads a manifest file; relative paths inside it are taken from its directory.
pub fn load_manifest(path: &Path) -> Result<PreparedExperiment, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let manifest = Manifest::from_json(&text)?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    prepare(&manifest, base)
}

/// Parameters of a single exploration run (command line or API).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreParams {
    pub template: String,
    #[serde(default)]
    pub instance_seed: Option<u64>,
    pub method: MethodKind,
    #[serde(default)]
    pub weights: Option<ActionWeights>,
    #[serde(default)]
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub alpha_growth: Option<f64>,
    #[serde(default)]
    pub rollout_cap: Option<usize>,
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// RRT seed; also drives a sampled clone rollout.
    #[serde(default)]
    pub seed: u64,
}

pub struct ExploreSetup {
    pub instance: EnvInstance,
    pub method: MethodSpec,
    pub sampler: ActionSampler,
    pub seeds: Option<Trajectory>,
    pub config: ExplorerConfig,
}

/// Resolves explore parameters into everything [`crate::explorer::Explorer`] needs.
pub fn prepare_explore(params: &ExploreParams, base: &Path) -> Result<ExploreSetup, HarnessError> {
    let template = resolve_template(&params.template, base)?;
    let method_config = MethodConfig {
        weights: params.weights,
        trajectory: params.trajectory.clone(),
        model: params.model.clone(),
        alpha0: params.alpha0,
        alpha_growth: params.alpha_growth,
        rollout_cap: params.rollout_cap,
        ..MethodConfig::of(params.method)
    };
    let method = resolve_method(&method_config, &template, base)?;
    let instance_seed = match &method {
        MethodSpec::HumanSeeded { trajectory, .. } => {
            if params.instance_seed.is_some_and(|s| s != trajectory.seed) {
                return Err(HarnessError::Invalid(format!(
                    "trajectory was recorded on instance seed {}, not {}",
                    trajectory.seed,
                    params.instance_seed.unwrap()
                )));
            }
            trajectory.seed
        }
        _ => params.instance_seed.unwrap_or(0),
    };
    let instance = template.instantiate(instance_seed)?;
    let seeds = match &method {
        MethodSpec::HumanSeeded { trajectory, .. } => Some(trajectory.as_ref().clone()),
        MethodSpec::CloneAssisted { model, rollout_cap, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            Some(ca_rollout(model, &instance, *rollout_cap, RolloutMode::Argmax, &mut rng))
        }
        _ => None,
    };
    Ok(ExploreSetup {
        sampler: method.sampler(),
        instance,
        method,
        seeds,
        config: ExplorerConfig {
            max_iterations: params.budget,
            seed: params.seed,
            ..Default::default()
        },
    })
}
