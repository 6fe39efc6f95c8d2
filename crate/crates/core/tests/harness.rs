use std::fs;

use tltl_lab::arm::{ContinuousCoefficients, TaskId};
use tltl_lab::harness::{
    emit_outputs, grid_search_continuous, read_curve_csv, run_experiment, CoefficientGrid, Experiment,
    ExperimentConfig, RewardKind,
};

fn small(reward: RewardKind) -> Experiment {
    let mut cfg = ExperimentConfig::for_task(TaskId::Task1, reward);
    cfg.iterations = Some(4);
    cfg.samples = Some(6);
    cfg.seeds = vec![3, 11];
    let mut exp = cfg.resolve().unwrap();
    exp.scene.horizon = 30;
    exp
}

#[test]
fn same_config_same_curve() {
    let exp = small(RewardKind::Tltl);
    let a = run_experiment(&exp).unwrap();
    let b = run_experiment(&exp).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    assert_eq!(a.per_seed.len(), 2);
    let mut other = exp.clone();
    other.seeds = vec![4, 11];
    assert_ne!(run_experiment(&other).unwrap().per_seed[0], a.per_seed[0]);
    assert_eq!(run_experiment(&other).unwrap().per_seed[1], a.per_seed[1]);
}

#[test]
fn reward_offset_never_reaches_the_curve() {
    let exp = small(RewardKind::Discrete);
    let mut shifted = exp.clone();
    // Discrete rewards are small integers, so an integer offset keeps every
    // return exact and the sample weights bit-identical.
    shifted.reward_offset = 1000.0;
    let a = run_experiment(&exp).unwrap();
    let b = run_experiment(&shifted).unwrap();
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.var, b.var);
    assert_ne!(exp.config_hash(), shifted.config_hash());
}

#[test]
fn one_cell_grid_equals_a_plain_run() {
    let mut exp = small(RewardKind::Continuous);
    let coefficients = ContinuousCoefficients { c1: 2.0, c2: 0.5, c3: 0.0 };
    exp.grid = Some(CoefficientGrid { c1: vec![2.0], c2: vec![0.5], c3: vec![0.0] });
    let grid = grid_search_continuous(&exp, None).unwrap();
    let mut plain = exp.clone();
    plain.grid = None;
    plain.coefficients = coefficients;
    let curve = run_experiment(&plain).unwrap();
    assert_eq!(grid.cells.len(), 1);
    assert_eq!(grid.best_cell().curve, curve);
}

#[test]
fn grid_prefers_a_cell_with_signal() {
    let mut exp = small(RewardKind::Continuous);
    exp.reps.iterations = 15;
    exp.scene.horizon = 40;
    // With every coefficient zero all returns tie and the policy never moves.
    exp.grid = Some(CoefficientGrid { c1: vec![0.0, 5.0], c2: vec![0.0], c3: vec![0.0] });
    let dir = tempfile::tempdir().unwrap();
    let result = grid_search_continuous(&exp, Some(dir.path())).unwrap();
    assert_eq!(result.best_cell().coefficients.c1, 5.0);
    assert!(result.cells[1].score > result.cells[0].score);
    for k in 0..2 {
        assert!(dir.path().join(format!("cell-{k:02}/curve.csv")).is_file());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("grid.json")).unwrap()).unwrap();
    assert_eq!(summary["best"], 1);
}

#[test]
fn outputs_round_trip() {
    let exp = small(RewardKind::Tltl);
    let curve = run_experiment(&exp).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&curve, &exp, dir.path()).unwrap();
    let (mean, var) = read_curve_csv(fs::File::open(dir.path().join("curve.csv")).unwrap()).unwrap();
    assert_eq!(mean, curve.mean);
    assert_eq!(var, curve.var);
    let svg = fs::read_to_string(dir.path().join("curve.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(config["config_hash"], curve.config_hash);
    assert_eq!(config["experiment"]["scene"]["horizon"], 30);
}

#[test]
fn single_iteration_csv() {
    let mut exp = small(RewardKind::Discrete);
    exp.reps.iterations = 1;
    let curve = run_experiment(&exp).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&curve, &exp, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "iteration,mean_rho,var_rho");
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn empty_curve_still_writes_files() {
    let mut exp = small(RewardKind::Tltl);
    exp.reps.iterations = 0;
    let curve = run_experiment(&exp).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&curve, &exp, dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join("curve.svg")).unwrap();
    roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("curve.csv")).unwrap(), "iteration,mean_rho,var_rho\n");
}
