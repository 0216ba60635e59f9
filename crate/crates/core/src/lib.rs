//! Automated state-space coverage testing for gridworld games.
//!
//! The crate bundles a deterministic minigrid-style engine
//! ([`gridworld`]), coverage accounting with exact reachable-cell ground
//! truth ([`state_space`]), a goalless RRT explorer that can be seeded with
//! demonstrations or steered by a behavior-cloned action prior
//! ([`explorer`], [`clone`]), and an experiment harness that turns many
//! permuted trials into percentile bands and saturation statistics
//! ([`harness`]).

pub mod clone;
pub mod demo;
pub mod explorer;
pub mod gridworld;
pub mod harness;
pub mod state_space;
mod util;
pub use util::write_atomic;
