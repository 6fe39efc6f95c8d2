//! Planar three-link manipulator with velocity control.
//!
//! The arm state is joint angles and joint velocities; the end-effector
//! position is always recomputed from the angles. Velocity commands are
//! corrupted by Gaussian noise, clipped to the joint limits and integrated
//! with one explicit Euler step. Obstacles are penetrable: entering one only
//! costs reward, it never ends the episode.

mod env;
mod formulas;
mod rewards;
mod scene;
pub mod toast;

use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

pub use env::{episode_features, ArmEnv, RewardAdapter};
pub use formulas::{builtin_formulas, phi1, phi2, task_spec, BuiltinFormulas, TaskSpec};
pub use rewards::{
    reward_discrete, reward_task1_continuous, reward_task1_discrete, reward_task2_continuous,
    reward_task2_discrete, tltl_reward, ContinuousCoefficients, StepRewards, VisitEvent,
    VisitTracker,
};
pub use scene::{Goal, Obstacle, SceneConfig, TaskId, STATE_CHANNELS};

#[derive(Debug, Error)]
pub enum ArmError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("scene json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Formula(#[from] crate::formula::FormulaError),
    #[error(transparent)]
    Parse(#[from] crate::formula::ParseError),
    #[error(transparent)]
    Trace(#[from] crate::semantics::TraceError),
    #[error(transparent)]
    Eval(#[from] crate::semantics::EvalError),
    #[error("trajectory uses a different feature schema than the scene")]
    SchemaMismatch,
}

/// End-effector position of a planar chain with the base at the origin.
pub fn forward_kinematics(links: &[f64; 3], q: &[f64; 3]) -> (f64, f64) {
    let mut angle = 0.0;
    let (mut x, mut y) = (0.0, 0.0);
    for (length, joint) in links.iter().zip(q) {
        angle += joint;
        x += length * angle.cos();
        y += length * angle.sin();
    }
    (x, y)
}

/// Joint angles (rad) and joint velocities (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmState {
    pub q: [f64; 3],
    pub qdot: [f64; 3],
}

impl ArmState {
    pub fn at_rest(q: [f64; 3]) -> Self {
        ArmState { q, qdot: [0.0; 3] }
    }

    pub fn end_effector(&self, links: &[f64; 3]) -> (f64, f64) {
        forward_kinematics(links, &self.q)
    }

    /// `[q1, q2, q3, dq1, dq2, dq3, x, y]`
    pub fn to_vector(&self, links: &[f64; 3]) -> DVector<f64> {
        let (x, y) = self.end_effector(links);
        DVector::from_iterator(8, self.q.iter().chain(&self.qdot).copied().chain([x, y]))
    }

    /// Inverse of [`ArmState::to_vector`]; the stored end-effector entries are ignored.
    pub fn from_vector(v: &DVector<f64>) -> Self {
        ArmState {
            q: [v[0], v[1], v[2]],
            qdot: [v[3], v[4], v[5]],
        }
    }
}

/// One noisy Euler step of the velocity-controlled arm.
pub fn step(scene: &SceneConfig, state: &ArmState, action: &[f64; 3], rng: &mut dyn RngCore) -> ArmState {
    let limit = scene.velocity_limit;
    let noise = Normal::new(0.0, scene.noise_std).expect("noise_std is validated");
    let mut next = *state;
    for (j, commanded) in action.iter().enumerate() {
        let disturbance = if scene.noise_std > 0.0 { noise.sample(rng) } else { 0.0 };
        next.qdot[j] = (commanded + disturbance).clamp(-limit, limit);
        next.q[j] = state.q[j] + next.qdot[j] * scene.dt;
    }
    next
}

/// Raw state channels followed by goal and obstacle distances, in the order
/// of [`SceneConfig::feature_schema`].
pub fn features(scene: &SceneConfig, state: &ArmState) -> Vec<f64> {
    let (x, y) = state.end_effector(&scene.links);
    let mut out = Vec::with_capacity(8 + scene.goals.len() + scene.obstacles.len());
    out.extend_from_slice(&state.q);
    out.extend_from_slice(&state.qdot);
    out.extend([x, y]);
    out.extend(scene.goals.iter().map(|g| (x - g.x).hypot(y - g.y)));
    out.extend(scene.obstacles.iter().map(|o| (x - o.x).hypot(y - o.y)));
    out
}
