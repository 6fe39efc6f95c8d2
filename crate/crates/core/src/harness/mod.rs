//! Experiment configuration, multi-seed learning runs and their output files.
//!
//! Every run reports learning progress as the mean robustness of the task
//! specification over each sampled batch, whichever reward drives the
//! policy update.

mod output;
mod run;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arm::{ArmError, ContinuousCoefficients, SceneConfig, TaskId};
use crate::reps::{RepsConfig, RepsError};
use crate::semantics::{EvalError, RobustnessConfig, TraceError};

pub use output::{emit_outputs, read_curve_csv, render_svg, write_curve_csv};
pub use run::{
    eval_formula_on_trace, grid_search_continuous, run_experiment, run_seed, GridCell, GridResult,
    LearningCurve,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TLTL_LAB_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Arm(#[from] ArmError),
    #[error(transparent)]
    Reps(#[from] RepsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 2 for bad configuration or input, 3 for faults
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Arm(ArmError::InvalidScene(_) | ArmError::Parse(_) | ArmError::Formula(_)) => 2,
            HarnessError::Reps(RepsError::InvalidConfig(_)) => 2,
            _ => 3,
        }
    }
}

fn config_error(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Tltl,
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepsVariant {
    #[default]
    Episodic,
    Stepwise,
}

/// Where the scene comes from: a built-in task name, an inline object, or a
/// path to a scene file (relative paths are resolved against the config
/// file's directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneRef {
    Builtin(TaskId),
    Inline(Box<SceneConfig>),
    Path(PathBuf),
}

/// Lists of coefficient values; the grid is their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientGrid {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    #[serde(default = "zero_list")]
    pub c3: Vec<f64>,
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

impl CoefficientGrid {
    pub fn cells(&self) -> Vec<ContinuousCoefficients> {
        let mut out = Vec::new();
        for &c1 in &self.c1 {
            for &c2 in &self.c2 {
                for &c3 in &self.c3 {
                    out.push(ContinuousCoefficients { c1, c2, c3 });
                }
            }
        }
        out
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3]
}

fn default_coefficients() -> ContinuousCoefficients {
    ContinuousCoefficients { c1: 1.0, c2: 0.1, c3: 0.1 }
}

/// An experiment as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scene: SceneRef,
    pub reward: RewardKind,
    #[serde(default)]
    pub reps_variant: RepsVariant,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Overrides the profile's iteration count.
    #[serde(default)]
    pub iterations: Option<usize>,
    /// Overrides `reps.samples`.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub reps: RepsConfig,
    /// Coefficients of the continuous reward outside a grid search.
    #[serde(default = "default_coefficients")]
    pub coefficients: ContinuousCoefficients,
    #[serde(default)]
    pub grid: Option<CoefficientGrid>,
    #[serde(default)]
    pub robustness: RobustnessConfig,
    /// Shorter horizons and fewer iterations.
    #[serde(default)]
    pub fast: bool,
    /// Constant added to every optimization reward; it must never show up in
    /// the reported curves.
    #[serde(default)]
    pub reward_offset: f64,
}

impl ExperimentConfig {
    /// Defaults for a built-in task.
    pub fn for_task(task: TaskId, reward: RewardKind) -> Self {
        ExperimentConfig {
            scene: SceneRef::Builtin(task),
            reward,
            reps_variant: RepsVariant::Episodic,
            seeds: default_seeds(),
            iterations: None,
            samples: None,
            reps: RepsConfig::default(),
            coefficients: default_coefficients(),
            grid: None,
            robustness: RobustnessConfig::default(),
            fast: false,
            reward_offset: 0.0,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    /// Reads a config file; a scene path inside it is taken relative to the
    /// file.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        if let SceneRef::Path(p) = &cfg.scene {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.scene = SceneRef::Path(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    /// Checks the config and fills in every default.
    pub fn resolve(&self) -> Result<Experiment, HarnessError> {
        if self.reward == RewardKind::Tltl && self.reps_variant == RepsVariant::Stepwise {
            return Err(config_error(
                "the robustness reward is terminal-only and cannot drive the step-wise update",
            ));
        }
        if self.seeds.is_empty() {
            return Err(config_error("at least one seed is required"));
        }
        let mut scene = match &self.scene {
            SceneRef::Builtin(task) => SceneConfig::for_task(*task),
            SceneRef::Inline(scene) => (**scene).clone(),
            SceneRef::Path(p) => SceneConfig::load(p).map_err(|e| match e {
                ArmError::Io(io) => config_error(format!("cannot read scene {}: {io}", p.display())),
                other => config_error(other.to_string()),
            })?,
        };
        let (fast_horizon, fast_iterations, full_iterations) = match scene.task {
            TaskId::Task1 => (100, 60, 200),
            TaskId::Task2 => (200, 150, 500),
        };
        if self.fast {
            scene.horizon = fast_horizon;
        }
        scene.validate().map_err(|e| config_error(e.to_string()))?;
        let mut reps = self.reps.clone();
        reps.iterations = self
            .iterations
            .unwrap_or(if self.fast { fast_iterations } else { full_iterations });
        if let Some(n) = self.samples {
            reps.samples = n;
        }
        reps.validate().map_err(|e| config_error(e.to_string()))?;
        let check = |c: &ContinuousCoefficients| {
            if [c.c1, c.c2, c.c3].iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(config_error("continuous reward coefficients must be finite"))
            }
        };
        check(&self.coefficients)?;
        if let Some(grid) = &self.grid {
            grid.cells().iter().try_for_each(check)?;
        }
        if !self.reward_offset.is_finite() {
            return Err(config_error("reward_offset must be finite"));
        }
        Ok(Experiment {
            scene,
            reward: self.reward,
            reps_variant: self.reps_variant,
            seeds: self.seeds.clone(),
            reps,
            coefficients: self.coefficients,
            grid: self.grid.clone(),
            robustness: self.robustness,
            reward_offset: self.reward_offset,
        })
    }
}

/// A fully resolved experiment: concrete scene, iteration count and
/// hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub scene: SceneConfig,
    pub reward: RewardKind,
    pub reps_variant: RepsVariant,
    pub seeds: Vec<u64>,
    pub reps: RepsConfig,
    pub coefficients: ContinuousCoefficients,
    pub grid: Option<CoefficientGrid>,
    pub robustness: RobustnessConfig,
    pub reward_offset: f64,
}

impl Experiment {
    pub fn iterations(&self) -> usize {
        self.reps.iterations
    }

    /// 64-bit FNV-1a of the JSON encoding, as 16 hex digits.
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("experiment serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
