use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{forward_kinematics, ArmError};
use crate::formula::FeatureSchema;

/// Which benchmark task a scene poses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskId {
    /// Reach one goal and stay there while avoiding two obstacles.
    Task1,
    /// Visit three goals in order while avoiding three obstacles.
    Task2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub name: String,
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_goal_radius")]
    pub radius: f64,
}

fn default_goal_radius() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Geometry, dynamics and task of a planar three-link arm scene.
///
/// The arm base sits at the origin. Goals are listed in the order they must
/// be visited (task 2 uses all of them; task 1 uses the first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    /// Link lengths in meters.
    pub links: [f64; 3],
    /// Integration step in seconds.
    pub dt: f64,
    /// Standard deviation of the Gaussian noise added to velocity commands.
    pub noise_std: f64,
    pub goals: Vec<Goal>,
    pub obstacles: Vec<Obstacle>,
    pub task: TaskId,
    pub horizon: usize,
    /// Symmetric joint velocity limit in rad/s.
    #[serde(default = "default_velocity_limit")]
    pub velocity_limit: f64,
    /// Joint angles at the start of every episode.
    #[serde(default)]
    pub initial_q: Option<[f64; 3]>,
}

fn default_velocity_limit() -> f64 {
    2.0
}

const TASK1_START: [f64; 3] = [-1.83, 1.12, 0.83];
const TASK2_START: [f64; 3] = [-3.17, 1.03, 1.13];

impl SceneConfig {
    pub fn task1() -> Self {
        SceneConfig {
            links: [0.3, 0.3, 0.3],
            dt: 0.05,
            noise_std: 0.05,
            goals: vec![Goal { name: "g".into(), x: 0.6, y: 0.4, radius: 0.2 }],
            obstacles: vec![
                Obstacle { x: 0.3, y: 0.2, radius: 0.1 },
                Obstacle { x: 0.5, y: -0.1, radius: 0.1 },
            ],
            task: TaskId::Task1,
            horizon: 200,
            velocity_limit: 2.0,
            initial_q: Some(TASK1_START),
        }
    }

    pub fn task2() -> Self {
        SceneConfig {
            links: [0.3, 0.3, 0.3],
            dt: 0.05,
            noise_std: 0.05,
            goals: vec![
                Goal { name: "gr".into(), x: 0.6, y: 0.3, radius: 0.2 },
                Goal { name: "gg".into(), x: -0.2, y: 0.6, radius: 0.2 },
                Goal { name: "gb".into(), x: 0.4, y: -0.5, radius: 0.2 },
            ],
            obstacles: vec![
                Obstacle { x: 0.3, y: 0.2, radius: 0.1 },
                Obstacle { x: 0.5, y: -0.1, radius: 0.1 },
                Obstacle { x: 0.0, y: 0.45, radius: 0.1 },
            ],
            task: TaskId::Task2,
            horizon: 500,
            velocity_limit: 2.0,
            initial_q: Some(TASK2_START),
        }
    }

    pub fn for_task(task: TaskId) -> Self {
        match task {
            TaskId::Task1 => Self::task1(),
            TaskId::Task2 => Self::task2(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ArmError> {
        let scene: SceneConfig = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self, ArmError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn reach(&self) -> f64 {
        self.links.iter().sum()
    }

    pub fn start_q(&self) -> [f64; 3] {
        self.initial_q.unwrap_or(match self.task {
            TaskId::Task1 => TASK1_START,
            TaskId::Task2 => TASK2_START,
        })
    }

    pub fn validate(&self) -> Result<(), ArmError> {
        let bad = |msg: String| Err(ArmError::InvalidScene(msg));
        if self.links.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad(format!("link lengths must be positive, got {:?}", self.links));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad(format!("noise_std must be non-negative, got {}", self.noise_std));
        }
        if !(self.velocity_limit.is_finite() && self.velocity_limit > 0.0) {
            return bad(format!("velocity_limit must be positive, got {}", self.velocity_limit));
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        let needed = match self.task {
            TaskId::Task1 => (1, 2),
            TaskId::Task2 => (3, 3),
        };
        if self.goals.len() != needed.0 || self.obstacles.len() != needed.1 {
            return bad(format!(
                "{:?} needs {} goals and {} obstacles, got {} and {}",
                self.task,
                needed.0,
                needed.1,
                self.goals.len(),
                self.obstacles.len()
            ));
        }
        let reach = self.reach();
        for g in &self.goals {
            if !(g.radius.is_finite() && g.radius > 0.0) {
                return bad(format!("goal `{}` radius must be positive", g.name));
            }
            if g.x.hypot(g.y) > reach {
                return bad(format!("goal `{}` lies outside the reachable workspace", g.name));
            }
        }
        let mut names: Vec<&str> = self.goals.iter().map(|g| g.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.goals.len() {
            return bad("goal names must be distinct".into());
        }
        for (j, o) in self.obstacles.iter().enumerate() {
            if !(o.radius.is_finite() && o.radius > 0.0) {
                return bad(format!("obstacle {} radius must be positive", j + 1));
            }
            if o.x.hypot(o.y) > reach {
                return bad(format!("obstacle {} lies outside the reachable workspace", j + 1));
            }
        }
        let q = self.start_q();
        if q.iter().any(|v| !v.is_finite()) {
            return bad("initial_q must be finite".into());
        }
        let (x, y) = forward_kinematics(&self.links, &q);
        if self.goals.iter().any(|g| (x - g.x).hypot(y - g.y) <= g.radius) {
            return bad("the arm must not start inside a goal".into());
        }
        self.feature_schema()?;
        Ok(())
    }

    /// Name of the distance channel of goal `g`.
    pub fn goal_feature(&self, g: usize) -> String {
        format!("d_{}", self.goals[g].name)
    }

    /// Name of the distance channel of obstacle `j` (0-based).
    pub fn obstacle_feature(&self, j: usize) -> String {
        format!("d_o{}", j + 1)
    }

    /// Raw state channels followed by goal and obstacle distances.
    pub fn feature_schema(&self) -> Result<FeatureSchema, ArmError> {
        let mut names: Vec<String> = STATE_CHANNELS.iter().map(|s| s.to_string()).collect();
        names.extend((0..self.goals.len()).map(|g| self.goal_feature(g)));
        names.extend((0..self.obstacles.len()).map(|j| self.obstacle_feature(j)));
        Ok(FeatureSchema::new(names)?)
    }
}

/// Names of the eight raw state channels.
pub const STATE_CHANNELS: [&str; 8] = ["q1", "q2", "q3", "dq1", "dq2", "dq3", "x", "y"];
