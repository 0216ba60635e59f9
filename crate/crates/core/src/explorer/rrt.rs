use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sampler::ActionSampler;
use super::tree::{RrtTree, TargetConfig, TieBreak};
use crate::clone::Trajectory;
use crate::gridworld::{step, CellCoord, Direction, EnvInstance, StepError, Tile};
use crate::state_space::{ground_truth_cells, CoverageCurve, CoverageTracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplorerConfig {
    pub max_iterations: u64,
    pub seed: u64,
    /// Distance charged per quarter turn in nearest-neighbor search.
    pub rotation_cost: f64,
    pub tie_break: TieBreak,
    /// Step cap for the clone rollout that seeds CA runs.
    pub rollout_cap: usize,
}

impl Default for ExplorerConfig {
    fn default() -> Self {
        ExplorerConfig {
            max_iterations: 20_000,
            seed: 0,
            rotation_cost: 0.5,
            tie_break: TieBreak::Random,
            rollout_cap: 200,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ExplorerError {
    #[error("trajectory belongs to {found}, explorer runs on {expected}")]
    InstanceMismatch { expected: String, found: String },
    #[error("node {0} is done and cannot be expanded")]
    ExpandFromDone(usize),
    #[error("no node {0} in tree")]
    NoSuchNode(usize),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Uniform over non-wall cells, uniform over directions.
pub fn sample_target<R: Rng>(rng: &mut R, cells: &[CellCoord]) -> TargetConfig {
    let cell = cells[rng.gen_range(0..cells.len())];
    let dir = Direction::ALL[rng.gen_range(0..4)];
    TargetConfig { cell, dir }
}

pub fn non_wall_cells(instance: &EnvInstance) -> Vec<CellCoord> {
    instance
        .initial
        .cells()
        .filter(|(_, t)| *t != Tile::Wall)
        .map(|(c, _)| c)
        .collect()
}

/// Adds every trajectory state to the tree, chained from the root.
/// Returns the ids of the new nodes.
pub fn seed_from_trajectory(
    tree: &mut RrtTree,
    instance: &EnvInstance,
    traj: &Trajectory,
) -> Result<Vec<usize>, ExplorerError> {
    if traj.template != instance.template || traj.seed != instance.seed {
        return Err(ExplorerError::InstanceMismatch {
            expected: format!("{}#{}", instance.template, instance.seed),
            found: format!("{}#{}", traj.template, traj.seed),
        });
    }
    let states = traj.states(instance)?;
    let mut parent = 0;
    let mut ids = Vec::with_capacity(states.len());
    for (st, s) in traj.steps.iter().zip(states) {
        parent = tree.add_child(parent, st.action, s, 0);
        ids.push(parent);
    }
    Ok(ids)
}

/// Incremental RRT run. Iteration 0 is the seeded tree; each call to
/// [`Explorer::step`] performs one sample/nearest/expand round.
pub struct Explorer {
    sampler: ActionSampler,
    config: ExplorerConfig,
    tree: RrtTree,
    tracker: CoverageTracker,
    rng: ChaCha8Rng,
    targets: Vec<CellCoord>,
    iteration: u64,
}

impl Explorer {
    pub fn new(
        instance: &EnvInstance,
        sampler: ActionSampler,
        seeds: Option<&Trajectory>,
        config: ExplorerConfig,
    ) -> Result<Self, ExplorerError> {
        let total = ground_truth_cells(instance).count;
        let mut tracker = CoverageTracker::new(instance.width(), instance.height(), total);
        let mut tree = RrtTree::new(instance.initial.clone());
        tracker.record(&instance.initial, 0);
        if let Some(t) = seeds {
            for id in seed_from_trajectory(&mut tree, instance, t)? {
                tracker.record(&tree.nodes()[id].state, 0);
            }
        }
        Ok(Explorer {
            sampler,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            tree,
            tracker,
            targets: non_wall_cells(instance),
            iteration: 0,
        })
    }

    /// Steps a copy of node `from` with an action drawn from the sampler.
    pub fn expand(&mut self, from: usize) -> Result<usize, ExplorerError> {
        let node = self.tree.node(from).ok_or(ExplorerError::NoSuchNode(from))?;
        if node.state.done {
            return Err(ExplorerError::ExpandFromDone(from));
        }
        let action = self.sampler.sample(&node.state, self.iteration, &mut self.rng);
        let (next, _) = step(&node.state, action)?;
        self.tracker.record(&next, self.iteration);
        Ok(self.tree.add_child(from, action, next, self.iteration))
    }

    /// One RRT iteration; returns the new node id (`None` once the budget
    /// is spent or no node can be expanded).
    pub fn step(&mut self) -> Result<Option<usize>, ExplorerError> {
        if self.iteration >= self.config.max_iterations {
            return Ok(None);
        }
        self.iteration += 1;
        let target = sample_target(&mut self.rng, &self.targets);
        let Some(near) = self
            .tree
            .nearest(&target, self.config.rotation_cost, self.config.tie_break, &mut self.rng)
        else {
            self.tracker.tick(self.iteration);
            return Ok(None);
        };
        self.expand(near).map(Some)
    }

    pub fn run_to_end(&mut self) -> Result<(), ExplorerError> {
        while self.iteration < self.config.max_iterations {
            self.step()?;
        }
        self.tracker.tick(self.config.max_iterations);
        Ok(())
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn tree(&self) -> &RrtTree {
        &self.tree
    }

    pub fn tracker(&self) -> &CoverageTracker {
        &self.tracker
    }

    pub fn curve(&self) -> CoverageCurve {
        self.tracker.curve()
    }

    pub fn config(&self) -> &ExplorerConfig {
        &self.config
    }

    pub fn into_parts(self) -> (RrtTree, CoverageCurve) {
        let curve = self.tracker.curve();
        (self.tree, curve)
    }
}

/// Full RRT run: seed, then `max_iterations` expansions.
pub fn run(
    instance: &EnvInstance,
    sampler: ActionSampler,
    seeds: Option<&Trajectory>,
    config: ExplorerConfig,
) -> Result<(RrtTree, CoverageCurve), ExplorerError> {
    let mut ex = Explorer::new(instance, sampler, seeds, config)?;
    ex.run_to_end()?;
    Ok(ex.into_parts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::Author;
    use crate::gridworld::{catalog, replay, Action};
    use crate::state_space::map_cell;

    fn cfg(n: u64, seed: u64) -> ExplorerConfig {
        ExplorerConfig {
            max_iterations: n,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn zero_budget_keeps_seed_coverage() {
        let inst = catalog::dual_hallway().instantiate(4).unwrap();
        use Action::*;
        let t = Trajectory::record(&inst, &[Forward, Forward, Right, Forward, Forward], Author::Human).unwrap();
        let (tree, curve) = run(&inst, ActionSampler::Uniform, Some(&t), cfg(0, 1)).unwrap();
        assert_eq!(tree.len(), 6);
        let mut cells: Vec<_> = t.states(&inst).unwrap().iter().map(map_cell).collect();
        cells.push(inst.start());
        cells.sort();
        cells.dedup();
        assert_eq!(curve.counts(), &[cells.len() as u32]);
    }

    #[test]
    fn mismatched_trajectory_is_rejected() {
        let inst = catalog::dual_hallway().instantiate(4).unwrap();
        let other = catalog::dual_hallway().instantiate(5).unwrap();
        let t = Trajectory::record(&other, &[Action::Left], Author::Human).unwrap();
        assert!(matches!(
            Explorer::new(&inst, ActionSampler::Uniform, Some(&t), cfg(1, 0)),
            Err(ExplorerError::InstanceMismatch { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic_and_replayable() {
        let inst = catalog::cascading_lock_door().instantiate(2).unwrap();
        let a = run(&inst, ActionSampler::Weighted(Default::default()), None, cfg(800, 9)).unwrap();
        let b = run(&inst, ActionSampler::Weighted(Default::default()), None, cfg(800, 9)).unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.0.nodes(), b.0.nodes());
        assert_eq!(a.0.len(), 801);
        assert_eq!(a.1.len(), 801);
        for id in (0..a.0.len()).step_by(37) {
            let states = replay(&inst.initial, &a.0.path_to(id)).unwrap();
            assert_eq!(states.last().unwrap_or(&inst.initial), &a.0.nodes()[id].state);
        }
    }

    #[test]
    fn expanding_done_node_is_an_error() {
        let inst = catalog::dual_hallway().instantiate(0).unwrap();
        let t = Trajectory::record(&inst, &[Action::Done], Author::Human).unwrap();
        let mut ex = Explorer::new(&inst, ActionSampler::Uniform, Some(&t), cfg(5, 0)).unwrap();
        assert_eq!(ex.expand(1), Err(ExplorerError::ExpandFromDone(1)));
    }
}
