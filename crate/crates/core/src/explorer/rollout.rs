use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::clone::{argmax, Author, PolicyModel, Trajectory};
use crate::gridworld::{observe, Action, EnvInstance};

/// Consecutive states at one cell that end a rollout as stuck.
pub const STUCK_WINDOW: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RolloutMode {
    /// Most probable action, lowest id on ties.
    #[default]
    Argmax,
    /// Draw from the policy distribution.
    Sample,
}

/// Plays the policy from the initial state until it chooses done, runs
/// `max_steps` steps, or stays on one cell for [`STUCK_WINDOW`] states.
pub fn ca_rollout<R: Rng>(
    policy: &PolicyModel,
    instance: &EnvInstance,
    max_steps: usize,
    mode: RolloutMode,
    rng: &mut R,
) -> Trajectory {
    let mut traj = Trajectory::empty(instance, Author::Clone);
    let mut state = instance.initial.clone();
    let mut cells = vec![state.agent.pos];
    while traj.len() < max_steps && !state.done {
        let p = policy.predict(&observe(&state));
        let idx = match mode {
            RolloutMode::Argmax => argmax(&p),
            RolloutMode::Sample => WeightedIndex::new(p).expect("softmax output").sample(rng),
        };
        state = traj.push(&state, Action::ALL[idx]).expect("state is not done");
        cells.push(state.agent.pos);
        if cells.len() >= STUCK_WINDOW && cells[cells.len() - STUCK_WINDOW..].iter().all(|c| *c == state.agent.pos) {
            break;
        }
    }
    traj
}
