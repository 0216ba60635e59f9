//! Experiment protocol: many permuted trials per method, percentile bands,
//! saturation statistics and result exports.

mod experiment;
mod export;
mod manifest;
mod method;
mod stats;

pub use experiment::{resolve_method, run_experiment, trial_seeds, ExperimentResult, ExperimentSpec, HarnessError, TrialResult};
pub use export::{
    label_dir, read_bands_csv, summarize, svg_plot, trials_csv, write_bands_csv, write_results_dir, NamedComparison, Summary,
    SUMMARY_SCHEMA_VERSION,
};
pub use manifest::{
    load_manifest, prepare, prepare_explore, resolve_template, ExploreParams, ExploreSetup, Manifest, PreparedExperiment,
    DEFAULT_BUDGET, DEFAULT_TRIALS,
};
pub use method::{MethodConfig, MethodKind, MethodSpec, DEFAULT_ALPHA0, DEFAULT_ALPHA_GROWTH};
pub use stats::{
    compare, method_stats, nearest_rank, percentile_bands, percentile_bands_of, saturation_iteration, Bands, CensoredMedian,
    Comparison, MethodStats, DEFAULT_PERCENTILES,
};
