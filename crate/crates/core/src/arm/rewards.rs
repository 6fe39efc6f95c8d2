//! Hand-designed comparison rewards and the robustness reward.
//!
//! The hand-designed rewards produce one value per state of the trajectory
//! they are given; their sum is the episode return. Channels are looked up by
//! name, so a trajectory only needs the distance channels a reward uses.

use serde::{Deserialize, Serialize};

use super::{ArmError, SceneConfig};
use crate::formula::Formula;
use crate::semantics::{robustness, RobustnessConfig, Trajectory};

/// Reward for every state of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRewards(pub Vec<f64>);

impl StepRewards {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Weights of the distance-based rewards. Task 1 uses `c1` and `c2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousCoefficients {
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
}

const GOAL_BONUS: f64 = 5.0;
const WRONG_ORDER_PENALTY: f64 = -5.0;
const OBSTACLE_PENALTY: f64 = -2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitEvent {
    /// Entered the next goal of the sequence.
    Correct(usize),
    /// Entered any other goal.
    Wrong(usize),
}

/// Order in which goal discs were entered during an episode.
///
/// Entries are edge-triggered: a goal counts once each time the end-effector
/// moves from outside to inside its disc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitTracker {
    inside: Vec<bool>,
    progress: usize,
    visits: Vec<usize>,
}

impl VisitTracker {
    pub fn new(goals: usize) -> Self {
        VisitTracker {
            inside: vec![false; goals],
            progress: 0,
            visits: Vec::new(),
        }
    }

    /// Tracker whose first `done` goals were already visited in order.
    pub fn with_completed(goals: usize, done: usize) -> Self {
        let done = done.min(goals);
        VisitTracker {
            inside: vec![false; goals],
            progress: done,
            visits: (0..done).collect(),
        }
    }

    pub fn reset(&mut self) {
        *self = VisitTracker::new(self.inside.len());
    }

    /// Number of goals visited in the correct order so far.
    pub fn progress(&self) -> usize {
        self.progress
    }

    /// Next goal of the sequence, if any is left.
    pub fn next_goal(&self) -> Option<usize> {
        (self.progress < self.inside.len()).then_some(self.progress)
    }

    /// Every recorded entry, in order.
    pub fn visits(&self) -> &[usize] {
        &self.visits
    }

    /// Records which discs contain the end-effector now and reports entries.
    pub fn observe(&mut self, inside: &[bool]) -> Vec<VisitEvent> {
        let mut events = Vec::new();
        for (g, (&now, before)) in inside.iter().zip(self.inside.iter_mut()).enumerate() {
            if now && !*before {
                self.visits.push(g);
                if Some(g) == (self.progress < inside.len()).then_some(self.progress) {
                    self.progress += 1;
                    events.push(VisitEvent::Correct(g));
                } else {
                    events.push(VisitEvent::Wrong(g));
                }
            }
            *before = now;
        }
        events
    }
}

fn column(traj: &Trajectory, name: &str) -> Result<usize, ArmError> {
    traj.schema().index_of(name).ok_or(ArmError::SchemaMismatch)
}

struct Columns {
    goals: Vec<(usize, f64)>,
    obstacles: Vec<(usize, f64)>,
}

impl Columns {
    fn resolve(scene: &SceneConfig, traj: &Trajectory, goals: usize) -> Result<Self, ArmError> {
        Ok(Columns {
            goals: (0..goals)
                .map(|g| Ok((column(traj, &scene.goal_feature(g))?, scene.goals[g].radius)))
                .collect::<Result<_, ArmError>>()?,
            obstacles: (0..scene.obstacles.len())
                .map(|j| Ok((column(traj, &scene.obstacle_feature(j))?, scene.obstacles[j].radius)))
                .collect::<Result<_, ArmError>>()?,
        })
    }

    fn in_obstacle(&self, state: &[f64]) -> bool {
        self.obstacles.iter().any(|&(c, r)| state[c] <= r)
    }

    fn obstacle_distance_sum(&self, state: &[f64]) -> f64 {
        self.obstacles.iter().map(|&(c, _)| state[c]).sum()
    }

    fn inside_goals(&self, state: &[f64]) -> Vec<bool> {
        self.goals.iter().map(|&(c, r)| state[c] <= r).collect()
    }
}

/// `+5` while within the goal radius, otherwise `-2` while inside an obstacle.
pub fn reward_task1_discrete(scene: &SceneConfig, traj: &Trajectory) -> Result<StepRewards, ArmError> {
    let cols = Columns::resolve(scene, traj, 1)?;
    let (goal, radius) = cols.goals[0];
    Ok(StepRewards(
        traj.states()
            .map(|s| {
                if s[goal] <= radius {
                    GOAL_BONUS
                } else if cols.in_obstacle(s) {
                    OBSTACLE_PENALTY
                } else {
                    0.0
                }
            })
            .collect(),
    ))
}

/// `-c1 d_g + c2 Σ d_o` at every state.
pub fn reward_task1_continuous(
    scene: &SceneConfig,
    traj: &Trajectory,
    c1: f64,
    c2: f64,
) -> Result<StepRewards, ArmError> {
    let cols = Columns::resolve(scene, traj, 1)?;
    let goal = cols.goals[0].0;
    Ok(StepRewards(
        traj.states()
            .map(|s| -c1 * s[goal] + c2 * cols.obstacle_distance_sum(s))
            .collect(),
    ))
}

/// `+5` on entering the next goal, `-5` on entering any other goal, otherwise
/// `-2` while inside an obstacle. `tracker` is advanced through the trajectory.
pub fn reward_task2_discrete(
    scene: &SceneConfig,
    traj: &Trajectory,
    tracker: &mut VisitTracker,
) -> Result<StepRewards, ArmError> {
    let cols = Columns::resolve(scene, traj, scene.goals.len())?;
    Ok(StepRewards(
        traj.states()
            .map(|s| {
                let events = tracker.observe(&cols.inside_goals(s));
                if !events.is_empty() {
                    events
                        .iter()
                        .map(|e| match e {
                            VisitEvent::Correct(_) => GOAL_BONUS,
                            VisitEvent::Wrong(_) => WRONG_ORDER_PENALTY,
                        })
                        .sum()
                } else if cols.in_obstacle(s) {
                    OBSTACLE_PENALTY
                } else {
                    0.0
                }
            })
            .collect(),
    ))
}

/// `-c1 d_next + c2 (sum of the other goal distances) + c3 Σ d_o`, where the
/// next goal comes from `tracker` after observing the state. Once every goal
/// has been visited the last goal stays the target.
pub fn reward_task2_continuous(
    scene: &SceneConfig,
    traj: &Trajectory,
    tracker: &mut VisitTracker,
    coeffs: &ContinuousCoefficients,
) -> Result<StepRewards, ArmError> {
    let cols = Columns::resolve(scene, traj, scene.goals.len())?;
    let last = cols.goals.len() - 1;
    Ok(StepRewards(
        traj.states()
            .map(|s| {
                tracker.observe(&cols.inside_goals(s));
                let target = tracker.next_goal().unwrap_or(last);
                let others: f64 = cols
                    .goals
                    .iter()
                    .enumerate()
                    .filter(|&(g, _)| g != target)
                    .map(|(_, &(c, _))| s[c])
                    .sum();
                -coeffs.c1 * s[cols.goals[target].0]
                    + coeffs.c2 * others
                    + coeffs.c3 * cols.obstacle_distance_sum(s)
            })
            .collect(),
    ))
}

/// Discrete reward of the scene's task, starting from a fresh tracker.
pub fn reward_discrete(scene: &SceneConfig, traj: &Trajectory) -> Result<StepRewards, ArmError> {
    match scene.task {
        super::TaskId::Task1 => reward_task1_discrete(scene, traj),
        super::TaskId::Task2 => {
            reward_task2_discrete(scene, traj, &mut VisitTracker::new(scene.goals.len()))
        }
    }
}

/// Robustness of the whole trajectory; only meaningful as a terminal reward.
pub fn tltl_reward(formula: &Formula, traj: &Trajectory, cfg: &RobustnessConfig) -> Result<f64, ArmError> {
    Ok(robustness(formula, traj, 0, cfg)?)
}
