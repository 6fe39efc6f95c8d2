use nalgebra::DVector;
use rand::RngCore;

use super::{
    features, reward_discrete, reward_task1_continuous, reward_task2_continuous, step, tltl_reward,
    ArmError, ArmState, ContinuousCoefficients, SceneConfig, StepRewards, TaskId, VisitTracker,
};
use crate::formula::Formula;
use crate::reps::{Environment, EnvironmentFault, EpisodeReward};
use crate::semantics::{RobustnessConfig, Trajectory, TrajectoryBuilder};

/// The reward an [`ArmEnv`] hands to the learner.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardAdapter {
    /// Robustness of the whole episode, terminal only.
    Tltl { formula: Formula, cfg: RobustnessConfig },
    Discrete,
    Continuous(ContinuousCoefficients),
}

impl RewardAdapter {
    pub fn is_terminal_only(&self) -> bool {
        matches!(self, RewardAdapter::Tltl { .. })
    }
}

/// Feature trajectory of a sequence of `[q, dq, x, y]` state vectors.
pub fn episode_features(scene: &SceneConfig, states: &[DVector<f64>]) -> Result<Trajectory, ArmError> {
    let mut builder = TrajectoryBuilder::new(scene.feature_schema()?, scene.dt)?.with_capacity(states.len());
    for s in states {
        if s.len() != 8 {
            return Err(ArmError::SchemaMismatch);
        }
        builder.push(&features(scene, &ArmState::from_vector(s)))?;
    }
    Ok(builder.finish()?)
}

/// A scene plus a reward adapter, usable as a REPS environment.
///
/// Per-step rewards are reported for the states reached by each action, so
/// an episode of horizon `T` yields `T` of them; the initial state earns
/// nothing. `reward_offset` is added to every reported reward and exists to
/// check that reporting never looks at the optimization signal.
#[derive(Debug, Clone)]
pub struct ArmEnv {
    scene: SceneConfig,
    reward: RewardAdapter,
    reward_offset: f64,
    state: ArmState,
    visited: Vec<DVector<f64>>,
}

impl ArmEnv {
    pub fn new(scene: SceneConfig, reward: RewardAdapter) -> Result<Self, ArmError> {
        scene.validate()?;
        let state = ArmState::at_rest(scene.start_q());
        Ok(ArmEnv {
            scene,
            reward,
            reward_offset: 0.0,
            state,
            visited: Vec::new(),
        })
    }

    pub fn with_reward_offset(mut self, offset: f64) -> Self {
        self.reward_offset = offset;
        self
    }

    pub fn scene(&self) -> &SceneConfig {
        &self.scene
    }

    pub fn reward(&self) -> &RewardAdapter {
        &self.reward
    }

    /// States visited so far in the current episode.
    pub fn visited(&self) -> &[DVector<f64>] {
        &self.visited
    }

    fn rewards(&self) -> Result<EpisodeReward, ArmError> {
        let traj = episode_features(&self.scene, &self.visited)?;
        let per_step = match &self.reward {
            RewardAdapter::Tltl { formula, cfg } => {
                return Ok(EpisodeReward {
                    terminal: tltl_reward(formula, &traj, cfg)? + self.reward_offset,
                    per_step: None,
                });
            }
            RewardAdapter::Discrete => reward_discrete(&self.scene, &traj)?,
            RewardAdapter::Continuous(c) => match self.scene.task {
                TaskId::Task1 => reward_task1_continuous(&self.scene, &traj, c.c1, c.c2)?,
                TaskId::Task2 => reward_task2_continuous(
                    &self.scene,
                    &traj,
                    &mut VisitTracker::new(self.scene.goals.len()),
                    c,
                )?,
            },
        };
        let StepRewards(all) = per_step;
        let per_step: Vec<f64> = all.iter().skip(1).map(|r| r + self.reward_offset).collect();
        Ok(EpisodeReward {
            terminal: per_step.iter().sum(),
            per_step: Some(per_step),
        })
    }
}

impl Environment for ArmEnv {
    fn state_dim(&self) -> usize {
        8
    }

    fn action_dim(&self) -> usize {
        3
    }

    fn horizon(&self) -> usize {
        self.scene.horizon
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Result<DVector<f64>, EnvironmentFault> {
        self.state = ArmState::at_rest(self.scene.start_q());
        let v = self.state.to_vector(&self.scene.links);
        self.visited.clear();
        self.visited.push(v.clone());
        Ok(v)
    }

    fn step(&mut self, action: &DVector<f64>, rng: &mut dyn RngCore) -> Result<DVector<f64>, EnvironmentFault> {
        if action.len() != 3 {
            return Err(EnvironmentFault(format!("expected 3 joint velocities, got {}", action.len())));
        }
        self.state = step(&self.scene, &self.state, &[action[0], action[1], action[2]], rng);
        let v = self.state.to_vector(&self.scene.links);
        self.visited.push(v.clone());
        Ok(v)
    }

    fn episode_reward(&mut self) -> Result<EpisodeReward, EnvironmentFault> {
        self.rewards().map_err(|e| EnvironmentFault(e.to_string()))
    }
}
