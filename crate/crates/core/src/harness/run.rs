use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{config_error, emit_outputs, Experiment, HarnessError, RepsVariant, RewardKind, THREADS_ENV};
use crate::arm::{episode_features, task_spec, ArmEnv, ContinuousCoefficients, RewardAdapter};
use crate::formula::{parse, Formula};
use crate::reps::{
    reweight, sample_episode, update_policy, update_policy_stepwise, Episode, EpisodeBatch,
    LinearGaussianPolicy,
};
use crate::semantics::{evaluate, robustness, RobustnessConfig, Trajectory, Verdict};

/// Batch-mean robustness per iteration, aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearningCurve {
    /// Mean over seeds at each iteration.
    pub mean: Vec<f64>,
    /// Population variance over seeds at each iteration.
    pub var: Vec<f64>,
    /// `per_seed[s][i]`: batch-mean robustness of seed `s` at iteration `i`.
    pub per_seed: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub config_hash: String,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    fn aggregate(per_seed: Vec<Vec<f64>>, seeds: Vec<u64>, config_hash: String) -> Self {
        let iterations = per_seed.first().map_or(0, Vec::len);
        let n = per_seed.len() as f64;
        let mut mean = Vec::with_capacity(iterations);
        let mut var = Vec::with_capacity(iterations);
        for i in 0..iterations {
            let m = per_seed.iter().map(|c| c[i]).sum::<f64>() / n;
            let v = per_seed.iter().map(|c| (c[i] - m).powi(2)).sum::<f64>() / n;
            mean.push(m);
            var.push(v);
        }
        LearningCurve {
            mean,
            var,
            per_seed,
            seeds,
            config_hash,
        }
    }

    /// Mean of the last `k` entries of `mean` (all of them if shorter).
    pub fn tail_mean(&self, k: usize) -> f64 {
        tail_mean(&self.mean, k)
    }
}

pub(crate) fn tail_mean(values: &[f64], k: usize) -> f64 {
    let tail = &values[values.len().saturating_sub(k)..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| config_error(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| config_error(format!("cannot start worker threads: {e}")))
}

fn reward_adapter(exp: &Experiment, spec: &Formula) -> RewardAdapter {
    match exp.reward {
        RewardKind::Tltl => RewardAdapter::Tltl {
            formula: spec.clone(),
            cfg: exp.robustness,
        },
        RewardKind::Discrete => RewardAdapter::Discrete,
        RewardKind::Continuous => RewardAdapter::Continuous(exp.coefficients),
    }
}

fn batch_robustness(exp: &Experiment, spec: &Formula, episodes: &[Episode]) -> Result<f64, HarnessError> {
    let mut total = 0.0;
    for e in episodes {
        let traj = episode_features(&exp.scene, &e.states)?;
        total += robustness(spec, &traj, 0, &exp.robustness)?;
    }
    Ok(total / episodes.len() as f64)
}

/// Learning run of one seed: the batch-mean robustness of the task
/// specification at every iteration, measured before that iteration's update.
pub fn run_seed(exp: &Experiment, seed: u64) -> Result<Vec<f64>, HarnessError> {
    let iterations = exp.iterations();
    if iterations == 0 {
        return Ok(Vec::new());
    }
    let spec = task_spec(&exp.scene)?.formula;
    let env = ArmEnv::new(exp.scene.clone(), reward_adapter(exp, &spec))?.with_reward_offset(exp.reward_offset);
    let reps = &exp.reps;
    let mut policy = LinearGaussianPolicy::initial(exp.scene.horizon, 8, 3, reps.sigma0, reps.sigma_floor)?;
    let mut stream = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let episode_seeds: Vec<u64> = (0..reps.samples).map(|_| stream.next_u64()).collect();
        let episodes = episode_seeds
            .par_iter()
            .map(|&s| sample_episode(&policy, &mut env.clone(), s))
            .collect::<Result<Vec<_>, _>>()?;
        curve.push(batch_robustness(exp, &spec, &episodes)?);
        let batch = EpisodeBatch::new(episodes);
        policy = match exp.reps_variant {
            RepsVariant::Episodic => {
                let (_, weights) = reweight(&batch.returns(), reps.epsilon, reps.eta_min)?;
                update_policy(&policy, &batch, &weights)?
            }
            RepsVariant::Stepwise => update_policy_stepwise(&policy, &batch, reps.epsilon, reps.eta_min)?,
        };
    }
    Ok(curve)
}

/// Runs every seed of `exp` (concurrently, at most `TLTL_LAB_THREADS`
/// workers) and aggregates the curves.
pub fn run_experiment(exp: &Experiment) -> Result<LearningCurve, HarnessError> {
    let per_seed = if exp.iterations() == 0 {
        vec![Vec::new(); exp.seeds.len()]
    } else {
        thread_pool()?.install(|| {
            exp.seeds
                .par_iter()
                .map(|&seed| run_seed(exp, seed))
                .collect::<Result<Vec<_>, _>>()
        })?
    };
    Ok(LearningCurve::aggregate(per_seed, exp.seeds.clone(), exp.config_hash()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub coefficients: ContinuousCoefficients,
    /// Mean robustness over the last ten iterations.
    pub score: f64,
    pub curve: LearningCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    /// Index of the highest-scoring cell; the first one wins ties.
    pub best: usize,
}

impl GridResult {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }
}

/// Runs the continuous reward once per coefficient cell. With `out`, each
/// cell's files go to `out/cell-NN` and a `grid.json` summary is written.
pub fn grid_search_continuous(exp: &Experiment, out: Option<&Path>) -> Result<GridResult, HarnessError> {
    if exp.reward != RewardKind::Continuous {
        return Err(config_error("a grid search needs the continuous reward"));
    }
    let cells = exp.grid.as_ref().map(|g| g.cells()).unwrap_or_default();
    if cells.is_empty() {
        return Err(config_error("the coefficient grid is empty"));
    }
    let mut results: Vec<GridCell> = Vec::with_capacity(cells.len());
    for (k, coefficients) in cells.into_iter().enumerate() {
        let mut cell = exp.clone();
        cell.coefficients = coefficients;
        cell.grid = None;
        let curve = run_experiment(&cell)?;
        if let Some(dir) = out {
            emit_outputs(&curve, &cell, &dir.join(format!("cell-{k:02}")))?;
        }
        let score = if curve.is_empty() { f64::NEG_INFINITY } else { curve.tail_mean(10) };
        results.push(GridCell { coefficients, score, curve });
    }
    let mut best = 0;
    for (k, cell) in results.iter().enumerate() {
        if cell.score > results[best].score {
            best = k;
        }
    }
    let result = GridResult { cells: results, best };
    if let Some(dir) = out {
        let summary = serde_json::json!({
            "best": best,
            "best_coefficients": result.best_cell().coefficients,
            "cells": result.cells.iter().enumerate().map(|(k, c)| serde_json::json!({
                "dir": format!("cell-{k:02}"),
                "coefficients": c.coefficients,
                "score": c.score,
            })).collect::<Vec<_>>(),
        });
        std::fs::write(dir.join("grid.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(result)
}

/// Evaluates a formula, given inline or as a path to a file holding it, on a
/// CSV trace whose header supplies the feature names.
pub fn eval_formula_on_trace(
    formula: &str,
    trace: &Path,
    cfg: &RobustnessConfig,
) -> Result<Verdict, HarnessError> {
    let as_path = Path::new(formula);
    let text = if as_path.is_file() {
        std::fs::read_to_string(as_path)?
    } else {
        formula.to_string()
    };
    let file = std::fs::File::open(trace)
        .map_err(|e| config_error(format!("cannot open trace {}: {e}", trace.display())))?;
    let traj = Trajectory::read_csv(file, 1.0).map_err(|e| config_error(format!("trace: {e}")))?;
    let f = parse(text.trim(), traj.schema()).map_err(|e| config_error(format!("formula: {e}")))?;
    Ok(evaluate(&f, &traj, cfg)?)
}
