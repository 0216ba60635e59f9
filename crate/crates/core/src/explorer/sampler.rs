use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clone::PolicyModel;
use crate::gridworld::{observe, Action, GameState, Observation};

/// α at which the clone prior is abandoned for the hand-tuned weights.
pub const FALLBACK_ALPHA: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum WeightsError {
    #[error("action weights must be finite and non-negative")]
    Negative,
    #[error("action weights must have a positive sum")]
    ZeroSum,
    #[error("expected 7 action weights, got {0}")]
    WrongLength(usize),
}

/// A fixed distribution over the seven actions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionWeights([f64; Action::COUNT]);

impl ActionWeights {
    /// Normalizes `raw` to sum to one.
    pub fn new(raw: [f64; Action::COUNT]) -> Result<Self, WeightsError> {
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(WeightsError::Negative);
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(WeightsError::ZeroSum);
        }
        Ok(ActionWeights(raw.map(|w| w / sum)))
    }

    pub fn uniform() -> Self {
        ActionWeights([1.0 / Action::COUNT as f64; Action::COUNT])
    }

    pub fn probs(&self) -> [f64; Action::COUNT] {
        self.0
    }
}

/// Raw hand-tuned baseline weights, biased toward forward and toggle.
/// They total 0.96 and are normalized on use.
pub const DEFAULT_RAW_WEIGHTS: [f64; Action::COUNT] = [0.14, 0.14, 0.34, 0.14, 0.04, 0.15, 0.01];

impl Default for ActionWeights {
    fn default() -> Self {
        ActionWeights::new(DEFAULT_RAW_WEIGHTS).expect("valid constant")
    }
}

impl TryFrom<Vec<f64>> for ActionWeights {
    type Error = WeightsError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        let arr: [f64; Action::COUNT] = v.as_slice().try_into().map_err(|_| WeightsError::WrongLength(v.len()))?;
        ActionWeights::new(arr)
    }
}

impl From<ActionWeights> for Vec<f64> {
    fn from(w: ActionWeights) -> Self {
        w.0.to_vec()
    }
}

impl std::str::FromStr for ActionWeights {
    type Err = WeightsError;
    /// Parses a comma-separated list of seven numbers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| WeightsError::Negative))
            .collect::<Result<_, _>>()?;
        ActionWeights::try_from(v)
    }
}

#[derive(Clone, Debug)]
pub enum ActionSampler {
    Uniform,
    Weighted(ActionWeights),
    ClonePrior {
        policy: Arc<PolicyModel>,
        alpha0: f64,
        growth: f64,
        fallback: ActionWeights,
    },
}

impl ActionSampler {
    /// Action distribution at `state` during RRT iteration `iteration`.
    pub fn distribution(&self, state: &GameState, iteration: u64) -> [f64; Action::COUNT] {
        match self {
            ActionSampler::Uniform => ActionWeights::uniform().probs(),
            ActionSampler::Weighted(w) => w.probs(),
            ActionSampler::ClonePrior {
                policy,
                alpha0,
                growth,
                fallback,
            } => {
                let alpha = alpha_at(iteration, *alpha0, *growth);
                if alpha >= FALLBACK_ALPHA {
                    fallback.probs()
                } else {
                    smoothed_prior(policy, &observe(state), alpha)
                }
            }
        }
    }

    pub fn sample<R: Rng>(&self, state: &GameState, iteration: u64, rng: &mut R) -> Action {
        let dist = self.distribution(state, iteration);
        let idx = WeightedIndex::new(dist).expect("sampler yields a valid distribution").sample(rng);
        Action::ALL[idx]
    }
}

/// Additive smoothing of a distribution: `(p_i + α) / (1 + 7α)`.
pub fn smooth(p: &[f64; Action::COUNT], alpha: f64) -> [f64; Action::COUNT] {
    let denom = 1.0 + Action::COUNT as f64 * alpha;
    p.map(|pi| (pi + alpha) / denom)
}

pub fn smoothed_prior(policy: &PolicyModel, obs: &Observation, alpha: f64) -> [f64; Action::COUNT] {
    smooth(&policy.predict(obs), alpha)
}

pub fn alpha_at(iteration: u64, alpha0: f64, growth: f64) -> f64 {
    alpha0 + iteration as f64 * growth
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_normalize_and_parse() {
        let w = ActionWeights::new([2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(w.probs()[0], 0.5);
        assert_eq!(ActionWeights::new([-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), Err(WeightsError::Negative));
        assert_eq!(ActionWeights::new([0.0; 7]), Err(WeightsError::ZeroSum));
        let parsed: ActionWeights = "1,1,1,1,1,1,1".parse().unwrap();
        assert!(parsed.probs().iter().all(|p| (p - 1.0 / 7.0).abs() < 1e-15));
        assert!("1,2".parse::<ActionWeights>().is_err());
        let json = serde_json::to_string(&ActionWeights::default()).unwrap();
        let back = serde_json::from_str::<ActionWeights>(&json).unwrap();
        for (a, b) in back.probs().iter().zip(ActionWeights::default().probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn default_weights_sum_to_one() {
        assert!((ActionWeights::default().probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_schedule() {
        assert_eq!(alpha_at(0, 0.1, 1e-5), 0.1);
        assert!((alpha_at(1000, 0.1, 1e-3) - 1.1).abs() < 1e-12);
        assert!(alpha_at(399, 0.1, 1e-3) < FALLBACK_ALPHA);
        assert!(alpha_at(400, 0.1, 1e-3) >= FALLBACK_ALPHA);
    }
}
