//! State identity, coverage accounting and reachable-cell ground truth.

mod coverage;
mod hash;
mod reach;

pub use coverage::{map_cell, CoverageCurve, CoverageTracker, CurveCsvError};
pub use hash::{canonical_bytes, config_hash, ConfigHash};
pub use reach::{brute_force_reachable, ground_truth_cells, GroundTruth, ReachError};
