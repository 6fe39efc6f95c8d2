//! Relative entropy policy search over time-varying linear-Gaussian policies.
//!
//! One iteration samples `N` episodes from the current policy, turns their
//! returns into sample weights with [`reweight`], and refits each step's
//! feed-forward term and covariance by weighted maximum likelihood over the
//! feed-forward terms that were actually sampled. The episodic update reuses a
//! single weight vector for every step, which is what a terminal-only reward
//! allows; [`update_policy_stepwise`] re-weights each step by cost-to-go.

mod dual;
mod policy;

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual::{
    compute_weights, dual_value, is_degenerate, kl_to_uniform, reweight, solve_dual, ETA_MAX,
    ETA_TOLERANCE,
};
pub use policy::{floor_covariance, LinearGaussianPolicy};

#[derive(Debug, Error)]
pub enum RepsError {
    #[error("at least two samples are needed, got {0}")]
    NotEnoughSamples(usize),
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("the step-wise update needs per-step rewards")]
    MissingStepRewards,
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("environment fault: {0}")]
    Environment(#[from] EnvironmentFault),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint encoding: {0}")]
    Json(#[from] serde_json::Error),
}

/// Error raised by an [`Environment`] implementation.
#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct EnvironmentFault(pub String);

/// Hyper-parameters of the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepsConfig {
    /// KL bound of each update.
    pub epsilon: f64,
    /// Lower end of the temperature search.
    pub eta_min: f64,
    /// Standard deviation floor of every policy covariance.
    pub sigma_floor: f64,
    /// Initial exploration standard deviation, in action units.
    pub sigma0: f64,
    /// Episodes per iteration.
    pub samples: usize,
    pub iterations: usize,
}

impl Default for RepsConfig {
    fn default() -> Self {
        RepsConfig {
            epsilon: 1.0,
            eta_min: 1e-6,
            sigma_floor: 1e-3,
            sigma0: 0.5,
            samples: 20,
            iterations: 200,
        }
    }
}

impl RepsConfig {
    pub fn validate(&self) -> Result<(), RepsError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(RepsError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("eta_min", self.eta_min)?;
        positive("sigma_floor", self.sigma_floor)?;
        positive("sigma0", self.sigma0)?;
        if self.samples < 2 {
            return Err(RepsError::InvalidConfig(format!(
                "samples per iteration must be at least 2, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Rewards reported by an environment at the end of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReward {
    /// Return of the whole trajectory.
    pub terminal: f64,
    /// Per-step rewards, when the reward decomposes over time.
    pub per_step: Option<Vec<f64>>,
}

/// An episodic control problem with a fixed horizon.
pub trait Environment {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Starts a new episode and returns the initial state.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Result<DVector<f64>, EnvironmentFault>;
    /// Applies one action and returns the next state.
    fn step(&mut self, action: &DVector<f64>, rng: &mut dyn RngCore) -> Result<DVector<f64>, EnvironmentFault>;
    /// Reward of the episode that just finished.
    fn episode_reward(&mut self) -> Result<EpisodeReward, EnvironmentFault>;
}

/// One sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// `s_0 .. s_T`
    pub states: Vec<DVector<f64>>,
    /// `a_0 .. a_{T-1}`
    pub actions: Vec<DVector<f64>>,
    /// Sampled feed-forward terms `k_{i,0} .. k_{i,T-1}`.
    pub feedforwards: Vec<DVector<f64>>,
    pub reward: EpisodeReward,
}

/// Episodes collected under one policy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeBatch {
    pub episodes: Vec<Episode>,
}

impl EpisodeBatch {
    pub fn new(episodes: Vec<Episode>) -> Self {
        EpisodeBatch { episodes }
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.reward.terminal).collect()
    }

    /// Checks that every episode matches the policy's horizon and action size.
    pub fn check_against(&self, policy: &LinearGaussianPolicy) -> Result<(), RepsError> {
        if self.episodes.len() < 2 {
            return Err(RepsError::NotEnoughSamples(self.episodes.len()));
        }
        for (i, e) in self.episodes.iter().enumerate() {
            if e.feedforwards.len() != policy.horizon()
                || e.feedforwards.iter().any(|k| k.len() != policy.action_dim())
            {
                return Err(RepsError::Dimension(format!(
                    "episode {i} does not match the policy's horizon and action size"
                )));
            }
            if !e.reward.terminal.is_finite() {
                return Err(RepsError::NonFinite(format!("return of episode {i}")));
            }
        }
        Ok(())
    }

    /// Cost-to-go `Σ_{t' ≥ t} r_{i,t'}` for every episode `i` and step `t`.
    pub fn cost_to_go(&self) -> Result<Vec<Vec<f64>>, RepsError> {
        self.episodes
            .iter()
            .map(|e| {
                let rewards = e.reward.per_step.as_ref().ok_or(RepsError::MissingStepRewards)?;
                let mut togo = rewards.clone();
                for t in (0..togo.len().saturating_sub(1)).rev() {
                    togo[t] += togo[t + 1];
                }
                Ok(togo)
            })
            .collect()
    }
}

/// Rolls out one episode with exploration drawn from a generator seeded with
/// `seed`. The same generator drives the environment's noise, so a seed fixes
/// the whole episode.
pub fn sample_episode<E: Environment + ?Sized>(
    policy: &LinearGaussianPolicy,
    env: &mut E,
    seed: u64,
) -> Result<Episode, RepsError> {
    let horizon = policy.horizon();
    if env.horizon() != horizon {
        return Err(RepsError::Dimension(format!(
            "environment horizon {} differs from policy horizon {horizon}",
            env.horizon()
        )));
    }
    if env.state_dim() != policy.state_dim() || env.action_dim() != policy.action_dim() {
        return Err(RepsError::Dimension("environment and policy dimensions differ".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = env.reset(&mut rng)?;
    let mut states = Vec::with_capacity(horizon + 1);
    let mut actions = Vec::with_capacity(horizon);
    let mut feedforwards = Vec::with_capacity(horizon);
    for t in 0..horizon {
        if state.iter().any(|v| !v.is_finite()) {
            return Err(RepsError::NonFiniteState { step: t });
        }
        let z = DVector::from_fn(policy.action_dim(), |_, _| StandardNormal.sample(&mut rng));
        let k = policy.feedforward(t) + policy.cholesky(t) * z;
        let action = policy.gain(t) * &state + &k;
        let next = env.step(&action, &mut rng)?;
        states.push(std::mem::replace(&mut state, next));
        actions.push(action);
        feedforwards.push(k);
    }
    if state.iter().any(|v| !v.is_finite()) {
        return Err(RepsError::NonFiniteState { step: horizon });
    }
    states.push(state);
    let reward = env.episode_reward()?;
    if !reward.terminal.is_finite() {
        return Err(RepsError::NonFinite("episode return".into()));
    }
    Ok(Episode {
        states,
        actions,
        feedforwards,
        reward,
    })
}

fn check_weights(weights: &[f64], n: usize) -> Result<(), RepsError> {
    if weights.len() != n {
        return Err(RepsError::Dimension(format!("{} weights for {n} episodes", weights.len())));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(RepsError::InvalidConfig("weights must lie on the simplex".into()));
    }
    Ok(())
}

// Weighted mean and scatter of the sampled feed-forward terms at step `t`.
fn weighted_fit(batch: &EpisodeBatch, weights: &[f64], t: usize) -> (DVector<f64>, DMatrix<f64>) {
    let dim = batch.episodes[0].feedforwards[t].len();
    let mut mean = DVector::zeros(dim);
    for (e, &p) in batch.episodes.iter().zip(weights) {
        mean.axpy(p, &e.feedforwards[t], 1.0);
    }
    let mut scatter = DMatrix::zeros(dim, dim);
    for (e, &p) in batch.episodes.iter().zip(weights) {
        let d = &e.feedforwards[t] - &mean;
        scatter.ger(p, &d, &d, 1.0);
    }
    (mean, scatter)
}

/// Weighted maximum-likelihood refit of every step with one weight vector.
/// Gains are kept; covariances are floored at `sigma_floor²`.
pub fn update_policy(
    policy: &LinearGaussianPolicy,
    batch: &EpisodeBatch,
    weights: &[f64],
) -> Result<LinearGaussianPolicy, RepsError> {
    batch.check_against(policy)?;
    check_weights(weights, batch.len())?;
    let (feedforward, covariance) = (0..policy.horizon())
        .map(|t| weighted_fit(batch, weights, t))
        .unzip();
    policy.replace_parameters(feedforward, covariance)
}

/// Step-based variant: step `t` is refit with weights from the cost-to-go
/// of each episode, with a separate temperature per step.
pub fn update_policy_stepwise(
    policy: &LinearGaussianPolicy,
    batch: &EpisodeBatch,
    epsilon: f64,
    eta_min: f64,
) -> Result<LinearGaussianPolicy, RepsError> {
    batch.check_against(policy)?;
    let togo = batch.cost_to_go()?;
    if togo.iter().any(|r| r.len() != policy.horizon()) {
        return Err(RepsError::Dimension("per-step rewards must cover the horizon".into()));
    }
    let mut feedforward = Vec::with_capacity(policy.horizon());
    let mut covariance = Vec::with_capacity(policy.horizon());
    let mut returns = vec![0.0; batch.len()];
    for t in 0..policy.horizon() {
        for (r, episode_togo) in returns.iter_mut().zip(&togo) {
            *r = episode_togo[t];
        }
        let (_, weights) = reweight(&returns, epsilon, eta_min)?;
        let (mean, scatter) = weighted_fit(batch, &weights, t);
        feedforward.push(mean);
        covariance.push(scatter);
    }
    policy.replace_parameters(feedforward, covariance)
}
