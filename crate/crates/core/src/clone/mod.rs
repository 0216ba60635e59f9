//! Behavior cloning: trajectories, observation encoding, and a small
//! feed-forward action classifier trained from scratch.

mod encode;
mod io;
mod model;
mod train;
mod trajectory;

pub const DEFAULT_HIDDEN: usize = 64;

pub use encode::{encode, CELL_FEATURES, FEATURE_DIM};
pub use io::{from_bytes, load, save, to_bytes, ModelIoError, FORMAT_VERSION, MAGIC};
pub use model::{softmax, PolicyModel, TrainingMeta, OUTPUTS};
pub use train::{accuracy, argmax, dataset, train, train_examples, Example, TrainConfig, TrainError, TrainReport};
pub use trajectory::{replay_verify, replay_verify_with, Author, Trajectory, TrajectoryError, TrajectoryFile, TrajectoryStep};
