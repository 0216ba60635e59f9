use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridworld::{catalog, observe, step, Action, EnvInstance, EnvTemplate, GameState, Observation, StepError, TemplateError};
use crate::state_space::{config_hash, ConfigHash};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Author {
    #[default]
    Human,
    Clone,
    Scripted,
}

/// One recorded step: what the agent saw, what it did, and the hash of the
/// state that resulted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub observation: Observation,
    pub action: Action,
    pub digest: ConfigHash,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub template: String,
    pub seed: u64,
    pub steps: Vec<TrajectoryStep>,
    pub author: Author,
    /// Unix seconds.
    pub recorded_at: Option<u64>,
}

/// On-disk form; observations are recomputed by replay on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub template: String,
    pub seed: u64,
    pub actions: Vec<u8>,
    pub digests: Vec<ConfigHash>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<Author>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_at: Option<u64>,
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("trajectory was recorded on `{found}`, expected `{expected}`")]
    TemplateMismatch { expected: String, found: String },
    #[error("action id {id} at step {step} is not a valid action")]
    InvalidAction { step: usize, id: u8 },
    #[error("{actions} actions but {digests} digests")]
    LengthMismatch { actions: usize, digests: usize },
    #[error("replay diverged from the recorded digest at step {step}")]
    ReplayMismatch { step: usize },
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("trajectory file: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory file: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Trajectory {
    pub fn empty(instance: &EnvInstance, author: Author) -> Self {
        Trajectory {
            template: instance.template.clone(),
            seed: instance.seed,
            steps: Vec::new(),
            author,
            recorded_at: None,
        }
    }

    /// Records `actions` played from the instance's initial state.
    pub fn record(instance: &EnvInstance, actions: &[Action], author: Author) -> Result<Self, StepError> {
        let mut t = Trajectory::empty(instance, author);
        let mut state = instance.initial.clone();
        for &a in actions {
            state = t.push(&state, a)?;
        }
        Ok(t)
    }

    /// Appends one step taken from `state` and returns the successor.
    pub fn push(&mut self, state: &GameState, action: Action) -> Result<GameState, StepError> {
        let (next, _) = step(state, action)?;
        self.steps.push(TrajectoryStep {
            observation: observe(state),
            action,
            digest: config_hash(&next),
        });
        Ok(next)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }

    /// States after each step (excluding the initial state).
    pub fn states(&self, instance: &EnvInstance) -> Result<Vec<GameState>, StepError> {
        let mut out = Vec::with_capacity(self.steps.len());
        let mut s = instance.initial.clone();
        for st in &self.steps {
            s = step(&s, st.action)?.0;
            out.push(s.clone());
        }
        Ok(out)
    }

    pub fn to_file(&self) -> TrajectoryFile {
        TrajectoryFile {
            template: self.template.clone(),
            seed: self.seed,
            actions: self.steps.iter().map(|s| s.action.id()).collect(),
            digests: self.steps.iter().map(|s| s.digest).collect(),
            author: Some(self.author),
            recorded_at: self.recorded_at,
        }
    }

    /// Rebuilds a trajectory from its file form against `template`, failing
    /// on the first digest that replay does not reproduce.
    pub fn from_file(file: &TrajectoryFile, template: &EnvTemplate) -> Result<Self, TrajectoryError> {
        if file.template != template.name {
            return Err(TrajectoryError::TemplateMismatch {
                expected: template.name.clone(),
                found: file.template.clone(),
            });
        }
        if file.actions.len() != file.digests.len() {
            return Err(TrajectoryError::LengthMismatch {
                actions: file.actions.len(),
                digests: file.digests.len(),
            });
        }
        let instance = template.instantiate(file.seed)?;
        let mut t = Trajectory::empty(&instance, file.author.unwrap_or_default());
        t.recorded_at = file.recorded_at;
        let mut state = instance.initial;
        for (i, (&id, &digest)) in file.actions.iter().zip(&file.digests).enumerate() {
            let action = Action::from_id(id).ok_or(TrajectoryError::InvalidAction { step: i, id })?;
            state = t.push(&state, action)?;
            if t.steps[i].digest != digest {
                return Err(TrajectoryError::ReplayMismatch { step: i });
            }
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("trajectory serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TrajectoryError> {
        crate::util::write_atomic(path.as_ref(), self.to_json().as_bytes())?;
        Ok(())
    }

    /// Loads and replay-verifies a trajectory recorded on a built-in template.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrajectoryError> {
        let file: TrajectoryFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let template = catalog::by_name(&file.template)
            .ok_or_else(|| TrajectoryError::UnknownTemplate(file.template.clone()))?;
        Trajectory::from_file(&file, &template)
    }

    pub fn load_with(path: impl AsRef<Path>, template: &EnvTemplate) -> Result<Self, TrajectoryError> {
        let file: TrajectoryFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Trajectory::from_file(&file, template)
    }
}

/// Replays against the built-in template named by the trajectory.
pub fn replay_verify(traj: &Trajectory) -> Result<bool, TrajectoryError> {
    let template =
        catalog::by_name(&traj.template).ok_or_else(|| TrajectoryError::UnknownTemplate(traj.template.clone()))?;
    Ok(replay_verify_with(traj, &template))
}

/// True iff replaying the actions on `template` reproduces every digest.
pub fn replay_verify_with(traj: &Trajectory, template: &EnvTemplate) -> bool {
    let Ok(instance) = template.instantiate(traj.seed) else {
        return false;
    };
    let mut s = instance.initial;
    for st in &traj.steps {
        let Ok((next, _)) = step(&s, st.action) else {
            return false;
        };
        if config_hash(&next) != st.digest || observe(&s) != st.observation {
            return false;
        }
        s = next;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::catalog::dual_hallway;

    fn sample() -> Trajectory {
        let inst = dual_hallway().instantiate(5).unwrap();
        use Action::*;
        Trajectory::record(&inst, &[Forward, Left, Forward, Forward, Toggle, Right, Forward], Author::Human).unwrap()
    }

    #[test]
    fn fresh_recording_verifies() {
        assert!(replay_verify(&sample()).unwrap());
    }

    #[test]
    fn altered_action_fails() {
        let mut t = sample();
        t.steps[2].action = Action::Right;
        assert!(!replay_verify(&t).unwrap());
    }

    #[test]
    fn layout_edit_fails() {
        let t = sample();
        let mut edited = dual_hallway();
        edited.layout[1].replace_range(3..4, "#");
        edited.agent_starts.retain(|c| !(c.x == 3 && c.y == 1));
        assert!(!replay_verify_with(&t, &edited));
    }

    #[test]
    fn unknown_template() {
        let mut t = sample();
        t.template = "Nowhere".into();
        assert!(matches!(replay_verify(&t), Err(TrajectoryError::UnknownTemplate(_))));
    }

    #[test]
    fn file_round_trip() {
        let t = sample();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        t.save(&p).unwrap();
        assert_eq!(Trajectory::load(&p).unwrap(), t);

        let mut f = t.to_file();
        f.digests[3] = ConfigHash(1);
        assert!(matches!(
            Trajectory::from_file(&f, &dual_hallway()),
            Err(TrajectoryError::ReplayMismatch { step: 3 })
        ));
    }
}
