//! Goalless RRT over game states.
//!
//! Each iteration samples a target pose uniformly, picks the nearest
//! expandable node, and steps it once with an action from the sampler.
//! Trees may be seeded with a demonstration or a clone rollout.

mod rollout;
mod rrt;
mod sampler;
mod tree;

pub use rollout::{ca_rollout, RolloutMode, STUCK_WINDOW};
pub use rrt::{non_wall_cells, run, sample_target, seed_from_trajectory, Explorer, ExplorerConfig, ExplorerError};
pub use sampler::{alpha_at, smooth, smoothed_prior, ActionSampler, ActionWeights, WeightsError, DEFAULT_RAW_WEIGHTS, FALLBACK_ALPHA};
pub use tree::{distance, NodeRecord, RrtNode, RrtTree, TargetConfig, TieBreak};
