//! Reference implementations used as oracles, and random generators.
//!
//! The oracles evaluate straight from the quantifier definitions, with no
//! recurrences, so they share no structure with the library's evaluator.

#![allow(dead_code)]

use rand::Rng;
use tltl_lab::formula::{Comparator, FeatureSchema, Formula, Predicate};
use tltl_lab::semantics::Trajectory;

pub const FEATURES: [&str; 3] = ["a", "b", "c"];

pub fn schema() -> FeatureSchema {
    FeatureSchema::new(FEATURES).unwrap()
}

fn pred_margin(p: &Predicate, v: f64) -> f64 {
    match p.comparator() {
        Comparator::Lt => (p.threshold() - v) * p.scale(),
        Comparator::Gt => (v - p.threshold()) * p.scale(),
    }
}

fn pred_holds(p: &Predicate, v: f64) -> bool {
    match p.comparator() {
        Comparator::Lt => v < p.threshold(),
        Comparator::Gt => v > p.threshold(),
    }
}

fn column(traj: &Trajectory, p: &Predicate) -> usize {
    traj.schema().index_of(p.feature()).unwrap()
}

/// Robustness at every start index, by definition:
/// `F` / `G` are max / min over `[i, n-1]`, `U` and `T` quantify over the
/// witness `t'` and the guard range explicitly.
pub fn oracle_rho(f: &Formula, traj: &Trajectory, rho_max: f64) -> Vec<f64> {
    let n = traj.len();
    let max_over = |v: &[f64], lo: usize, hi: usize| (lo..hi).map(|t| v[t]).fold(-rho_max, f64::max);
    let min_over = |v: &[f64], lo: usize, hi: usize| (lo..hi).map(|t| v[t]).fold(rho_max, f64::min);
    match f {
        Formula::True => vec![rho_max; n],
        Formula::Pred(p) => {
            let c = column(traj, p);
            (0..n)
                .map(|i| pred_margin(p, traj.value(i, c)).clamp(-rho_max, rho_max))
                .collect()
        }
        Formula::Not(a) => oracle_rho(a, traj, rho_max).iter().map(|v| -v).collect(),
        Formula::And(a, b) => zip(oracle_rho(a, traj, rho_max), oracle_rho(b, traj, rho_max), f64::min),
        Formula::Or(a, b) => zip(oracle_rho(a, traj, rho_max), oracle_rho(b, traj, rho_max), f64::max),
        Formula::Implies(a, b) => zip(oracle_rho(a, traj, rho_max), oracle_rho(b, traj, rho_max), |x, y| {
            (-x).max(y)
        }),
        Formula::Eventually(a) => {
            let r = oracle_rho(a, traj, rho_max);
            (0..n).map(|i| max_over(&r, i, n)).collect()
        }
        Formula::Always(a) => {
            let r = oracle_rho(a, traj, rho_max);
            (0..n).map(|i| min_over(&r, i, n)).collect()
        }
        Formula::Next(a) => {
            let r = oracle_rho(a, traj, rho_max);
            (0..n).map(|i| if i + 1 < n { r[i + 1] } else { -rho_max }).collect()
        }
        Formula::Until(a, b) => {
            let (ra, rb) = (oracle_rho(a, traj, rho_max), oracle_rho(b, traj, rho_max));
            (0..n)
                .map(|i| {
                    (i..n)
                        .map(|w| rb[w].min(min_over(&ra, i, w)))
                        .fold(-rho_max, f64::max)
                })
                .collect()
        }
        Formula::Then(a, b) => {
            let (ra, rb) = (oracle_rho(a, traj, rho_max), oracle_rho(b, traj, rho_max));
            (0..n)
                .map(|i| {
                    (i..n)
                        .map(|w| ra[w].min(max_over(&rb, w + 1, n)))
                        .fold(-rho_max, f64::max)
                })
                .collect()
        }
    }
}

/// Boolean satisfaction at every start index, by definition.
pub fn oracle_bool(f: &Formula, traj: &Trajectory) -> Vec<bool> {
    let n = traj.len();
    match f {
        Formula::True => vec![true; n],
        Formula::Pred(p) => {
            let c = column(traj, p);
            (0..n).map(|i| pred_holds(p, traj.value(i, c))).collect()
        }
        Formula::Not(a) => oracle_bool(a, traj).iter().map(|v| !v).collect(),
        Formula::And(a, b) => zip(oracle_bool(a, traj), oracle_bool(b, traj), |x, y| x && y),
        Formula::Or(a, b) => zip(oracle_bool(a, traj), oracle_bool(b, traj), |x, y| x || y),
        Formula::Implies(a, b) => zip(oracle_bool(a, traj), oracle_bool(b, traj), |x, y| !x || y),
        Formula::Eventually(a) => {
            let r = oracle_bool(a, traj);
            (0..n).map(|i| r[i..].iter().any(|&v| v)).collect()
        }
        Formula::Always(a) => {
            let r = oracle_bool(a, traj);
            (0..n).map(|i| r[i..].iter().all(|&v| v)).collect()
        }
        Formula::Next(a) => {
            let r = oracle_bool(a, traj);
            (0..n).map(|i| i + 1 < n && r[i + 1]).collect()
        }
        Formula::Until(a, b) => {
            let (ra, rb) = (oracle_bool(a, traj), oracle_bool(b, traj));
            (0..n)
                .map(|i| (i..n).any(|w| rb[w] && ra[i..w].iter().all(|&v| v)))
                .collect()
        }
        Formula::Then(a, b) => {
            let (ra, rb) = (oracle_bool(a, traj), oracle_bool(b, traj));
            (0..n)
                .map(|i| (i..n).any(|w| ra[w] && rb[w + 1..].iter().any(|&v| v)))
                .collect()
        }
    }
}

fn zip<T: Copy>(a: Vec<T>, b: Vec<T>, op: impl Fn(T, T) -> T) -> Vec<T> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Values on a half-integer grid, so predicate margins hit zero now and then.
fn grid_value<R: Rng>(rng: &mut R) -> f64 {
    f64::from(rng.random_range(-8i32..=8)) * 0.5
}

pub fn random_predicate<R: Rng>(rng: &mut R) -> Predicate {
    let feature = FEATURES[rng.random_range(0..FEATURES.len())];
    let cmp = if rng.random_bool(0.5) { Comparator::Lt } else { Comparator::Gt };
    Predicate::new(&schema(), feature, cmp, grid_value(rng), 1.0).unwrap()
}

/// Random formula of depth at most `depth` (a leaf has depth 1).
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth <= 1 || rng.random_bool(0.25) {
        return if rng.random_bool(0.1) {
            Formula::True
        } else {
            Formula::pred(random_predicate(rng))
        };
    }
    let sub = |rng: &mut R| random_formula(rng, depth - 1);
    match rng.random_range(0..10) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::eventually(sub(rng)),
        5 => Formula::always(sub(rng)),
        6 => Formula::until(sub(rng), sub(rng)),
        7 => Formula::then(sub(rng), sub(rng)),
        _ => Formula::next(sub(rng)),
    }
}

pub fn random_trajectory<R: Rng>(rng: &mut R, max_len: usize) -> Trajectory {
    let len = rng.random_range(1..=max_len);
    let rows: Vec<Vec<f64>> = (0..len)
        .map(|_| (0..FEATURES.len()).map(|_| grid_value(rng)).collect())
        .collect();
    Trajectory::new(schema(), rows, 1.0).unwrap()
}

/// The REPS dual written out directly, stabilized by the largest return.
pub fn oracle_dual(returns: &[f64], epsilon: f64, eta: f64) -> f64 {
    let top = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean: f64 = returns.iter().map(|r| ((r - top) / eta).exp()).sum::<f64>() / returns.len() as f64;
    eta * epsilon + top + eta * mean.ln()
}

/// Minimum of the dual over `points` log-spaced temperatures in `[lo, hi]`.
pub fn grid_dual_minimum(returns: &[f64], epsilon: f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| {
            let eta = (a + (b - a) * k as f64 / (points - 1) as f64).exp();
            (eta, oracle_dual(returns, epsilon, eta))
        })
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// `KL(p || uniform)` computed from scratch.
pub fn oracle_kl(weights: &[f64]) -> f64 {
    let n = weights.len() as f64;
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * (w * n).ln())
        .sum()
}
