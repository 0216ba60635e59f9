use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::encode::encode;
use super::model::{PolicyModel, TrainingMeta};
use super::trajectory::Trajectory;
use crate::gridworld::Action;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: usize,
    pub dropout: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 300,
            batch_size: 16,
            dropout: 0.10,
            hidden: super::DEFAULT_HIDDEN,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("dataset contains no (observation, action) pairs")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(TrainError::InvalidConfig("dropout must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.hidden == 0 {
            return Err(TrainError::InvalidConfig("batch size and hidden width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// Full-dataset loss (dropout off) after each epoch.
    pub epoch_losses: Vec<f64>,
    pub accuracy: f64,
}

pub type Example = (Vec<f64>, Action);

pub fn dataset(trajectories: &[Trajectory]) -> Vec<Example> {
    trajectories
        .iter()
        .flat_map(|t| t.steps.iter().map(|s| (encode(&s.observation), s.action)))
        .collect()
}

pub fn train(trajectories: &[Trajectory], config: &TrainConfig) -> Result<PolicyModel, TrainError> {
    train_examples(&dataset(trajectories), config).map(|(m, _)| m)
}

/// Minibatch SGD on mean cross-entropy with inverted dropout on the hidden layer.
pub fn train_examples(
    examples: &[Example],
    config: &TrainConfig,
) -> Result<(PolicyModel, TrainReport), TrainError> {
    config.validate()?;
    if examples.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let input_dim = examples[0].0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = PolicyModel::initialized(input_dim, config.hidden, &mut rng);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs as usize);
    let keep = 1.0 - config.dropout;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| examples[i].clone()).collect();
            let masks: Vec<Vec<f64>> = (0..batch.len())
                .map(|_| {
                    (0..config.hidden)
                        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect()
                })
                .collect();
            let (_, grad) = model.loss_and_gradient(&batch, Some(&masks));
            for (p, g) in model.params_mut().iter_mut().zip(&grad) {
                *p -= config.learning_rate * g;
            }
        }
        epoch_losses.push(model.loss(examples));
    }

    let accuracy = accuracy(&model, examples);
    model.meta = TrainingMeta {
        examples: examples.len() as u64,
        epochs: config.epochs,
        seed: config.seed,
        final_loss: epoch_losses.last().copied().unwrap_or_else(|| model.loss(examples)),
        train_accuracy: accuracy,
    };
    Ok((model, TrainReport { epoch_losses, accuracy }))
}

/// Fraction of examples whose argmax prediction equals the recorded action.
pub fn accuracy(model: &PolicyModel, examples: &[Example]) -> f64 {
    let hits = examples
        .iter()
        .filter(|(x, a)| argmax(&model.predict_features(x)) == a.index())
        .count();
    hits as f64 / examples.len() as f64
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dataset_is_rejected() {
        assert_eq!(train(&[], &TrainConfig::default()), Err(TrainError::EmptyDataset));
    }

    #[test]
    fn single_pair_is_memorized() {
        let mut x = vec![0.0; 40];
        x[3] = 1.0;
        x[17] = 1.0;
        let cfg = TrainConfig {
            epochs: 200,
            hidden: 8,
            ..TrainConfig::default()
        };
        let (m, _) = train_examples(&[(x.clone(), Action::Toggle)], &cfg).unwrap();
        assert!(m.predict_features(&x)[Action::Toggle.index()] > 0.9);
    }

    #[test]
    fn bad_configs() {
        let ex = [(vec![1.0], Action::Left)];
        for cfg in [
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { dropout: 1.0, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
        ] {
            assert!(matches!(train_examples(&ex, &cfg), Err(TrainError::InvalidConfig(_))));
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }
}
