//! Boolean and quantitative (robustness) semantics over finite trajectories.
//!
//! Formulas are evaluated against every suffix of a trajectory at once. The
//! formula is flattened into post-order and each node's row of values is
//! computed from its children's rows, so every (subformula, start index) cell
//! is written exactly once. The temporal operators use backward recurrences:
//!
//! ```text
//! G a  at i = min(a[i], G a at i+1)
//! F a  at i = max(a[i], F a at i+1)
//! a U b at i = max(b[i], min(a[i], a U b at i+1))             last: b[n-1]
//! a T b at i = max(min(a[i], F b at i+1), a T b at i+1)       last: -rho_max
//! X a  at i = a[i+1]                                           last: -rho_max
//! ```
//!
//! which are the min/max definitions quantified over suffix starts
//! `[i, n-1]` (the final state included) with the empty minimum equal to
//! `+rho_max` and the empty maximum equal to `-rho_max`. Boolean semantics
//! follow the same shape with `and`/`or`. Every robustness value is clamped to
//! `[-rho_max, rho_max]`; a robustness of exactly zero makes no Boolean claim.

mod trace;

use thiserror::Error;

use crate::formula::{Formula, Predicate};

pub use trace::{TraceError, Trajectory, TrajectoryBuilder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("start index {index} is outside a trajectory of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("feature `{0}` is not a channel of the trajectory")]
    UnknownFeature(String),
    #[error("rho_max must be positive and finite, got {0}")]
    InvalidRhoMax(f64),
}

/// Saturation bound of the robustness degree.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobustnessConfig {
    pub rho_max: f64,
}

impl RobustnessConfig {
    pub fn new(rho_max: f64) -> Result<Self, EvalError> {
        if rho_max.is_finite() && rho_max > 0.0 {
            Ok(RobustnessConfig { rho_max })
        } else {
            Err(EvalError::InvalidRhoMax(rho_max))
        }
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(-self.rho_max, self.rho_max)
    }
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig { rho_max: 100.0 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Node<'f> {
    True,
    Pred(&'f Predicate, usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Eventually(usize),
    Always(usize),
    Until(usize, usize),
    Then(usize, usize),
    Next(usize),
}

/// Post-order node list with child links and feature columns resolved
/// against a particular trajectory schema.
fn flatten<'f>(f: &'f Formula, traj: &Trajectory) -> Result<Vec<Node<'f>>, EvalError> {
    fn go<'f>(f: &'f Formula, traj: &Trajectory, out: &mut Vec<Node<'f>>) -> Result<usize, EvalError> {
        let node = match f {
            Formula::True => Node::True,
            Formula::Pred(p) => {
                let column = traj
                    .schema()
                    .index_of(p.feature())
                    .ok_or_else(|| EvalError::UnknownFeature(p.feature().to_string()))?;
                Node::Pred(p, column)
            }
            Formula::Not(a) => Node::Not(go(a, traj, out)?),
            Formula::Eventually(a) => Node::Eventually(go(a, traj, out)?),
            Formula::Always(a) => Node::Always(go(a, traj, out)?),
            Formula::Next(a) => Node::Next(go(a, traj, out)?),
            Formula::And(a, b) => Node::And(go(a, traj, out)?, go(b, traj, out)?),
            Formula::Or(a, b) => Node::Or(go(a, traj, out)?, go(b, traj, out)?),
            Formula::Implies(a, b) => Node::Implies(go(a, traj, out)?, go(b, traj, out)?),
            Formula::Until(a, b) => Node::Until(go(a, traj, out)?, go(b, traj, out)?),
            Formula::Then(a, b) => Node::Then(go(a, traj, out)?, go(b, traj, out)?),
        };
        out.push(node);
        Ok(out.len() - 1)
    }
    let mut out = Vec::with_capacity(f.size());
    go(f, traj, &mut out)?;
    Ok(out)
}

/// Work counters collected while filling an [`EvalTable`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Table cells written, one per (subformula, start index).
    pub cells: usize,
    /// Elementary min/max/compare operations performed.
    pub ops: usize,
}

/// Boolean and robustness values of every subformula at every start index.
///
/// Rows are indexed by the subformula's position in
/// [`Formula::subformulas`]; the last row belongs to the root.
#[derive(Debug, Clone)]
pub struct EvalTable {
    boolean: Vec<Vec<bool>>,
    robustness: Vec<Vec<f64>>,
    stats: EvalStats,
}

impl EvalTable {
    pub fn build(f: &Formula, traj: &Trajectory, cfg: &RobustnessConfig) -> Result<Self, EvalError> {
        RobustnessConfig::new(cfg.rho_max)?;
        let nodes = flatten(f, traj)?;
        let n = traj.len();
        let r = cfg.rho_max;
        let mut boolean: Vec<Vec<bool>> = Vec::with_capacity(nodes.len());
        let mut robustness: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
        let mut ops = 0usize;

        for node in &nodes {
            let (b, q): (Vec<bool>, Vec<f64>) = match *node {
                Node::True => (vec![true; n], vec![r; n]),
                Node::Pred(p, column) => traj
                    .column(column)
                    .map(|v| (p.holds(v), cfg.clamp(p.margin(v))))
                    .unzip(),
                Node::Not(a) => (
                    boolean[a].iter().map(|x| !x).collect(),
                    robustness[a].iter().map(|x| -x).collect(),
                ),
                Node::And(a, c) => pointwise(&boolean, &robustness, a, c, |x, y| x && y, f64::min),
                Node::Or(a, c) => pointwise(&boolean, &robustness, a, c, |x, y| x || y, f64::max),
                Node::Implies(a, c) => {
                    pointwise(&boolean, &robustness, a, c, |x, y| !x || y, |x, y| (-x).max(y))
                }
                Node::Next(a) => {
                    let mut b = vec![false; n];
                    let mut q = vec![-r; n];
                    b[..n - 1].copy_from_slice(&boolean[a][1..]);
                    q[..n - 1].copy_from_slice(&robustness[a][1..]);
                    (b, q)
                }
                Node::Always(a) => {
                    ops += n;
                    suffix_fold(&boolean[a], &robustness[a], |x, y| x && y, f64::min)
                }
                Node::Eventually(a) => {
                    ops += n;
                    suffix_fold(&boolean[a], &robustness[a], |x, y| x || y, f64::max)
                }
                Node::Until(a, c) => {
                    let (ba, qa) = (&boolean[a], &robustness[a]);
                    let (bc, qc) = (&boolean[c], &robustness[c]);
                    let mut b = vec![false; n];
                    let mut q = vec![0.0; n];
                    b[n - 1] = bc[n - 1];
                    q[n - 1] = qc[n - 1];
                    for i in (0..n - 1).rev() {
                        b[i] = bc[i] || (ba[i] && b[i + 1]);
                        q[i] = qc[i].max(qa[i].min(q[i + 1]));
                        ops += 2;
                    }
                    (b, q)
                }
                Node::Then(a, c) => {
                    let (ba, qa) = (&boolean[a], &robustness[a]);
                    let (bc, qc) = (&boolean[c], &robustness[c]);
                    let mut b = vec![false; n];
                    let mut q = vec![-r; n];
                    // Eventually of the right operand, strictly after i.
                    let mut later_b = bc[n - 1];
                    let mut later_q = qc[n - 1];
                    for i in (0..n - 1).rev() {
                        b[i] = (ba[i] && later_b) || b[i + 1];
                        q[i] = qa[i].min(later_q).max(q[i + 1]);
                        later_b |= bc[i];
                        later_q = later_q.max(qc[i]);
                        ops += 3;
                    }
                    (b, q)
                }
            };
            ops += n;
            boolean.push(b);
            robustness.push(q);
        }

        Ok(EvalTable {
            stats: EvalStats {
                cells: nodes.len() * n,
                ops,
            },
            boolean,
            robustness,
        })
    }

    /// Number of start indices (the trajectory length).
    pub fn len(&self) -> usize {
        self.robustness.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> EvalStats {
        self.stats
    }

    pub fn root_robustness(&self) -> &[f64] {
        self.robustness.last().expect("formula has at least one node")
    }

    pub fn root_boolean(&self) -> &[bool] {
        self.boolean.last().expect("formula has at least one node")
    }

    /// Robustness row of the subformula at `node` in post-order.
    pub fn robustness_row(&self, node: usize) -> &[f64] {
        &self.robustness[node]
    }

    pub fn boolean_row(&self, node: usize) -> &[bool] {
        &self.boolean[node]
    }
}

fn pointwise(
    boolean: &[Vec<bool>],
    robustness: &[Vec<f64>],
    a: usize,
    c: usize,
    fb: impl Fn(bool, bool) -> bool,
    fq: impl Fn(f64, f64) -> f64,
) -> (Vec<bool>, Vec<f64>) {
    let b = boolean[a].iter().zip(&boolean[c]).map(|(&x, &y)| fb(x, y)).collect();
    let q = robustness[a]
        .iter()
        .zip(&robustness[c])
        .map(|(&x, &y)| fq(x, y))
        .collect();
    (b, q)
}

fn suffix_fold(
    b: &[bool],
    q: &[f64],
    fb: impl Fn(bool, bool) -> bool,
    fq: impl Fn(f64, f64) -> f64,
) -> (Vec<bool>, Vec<f64>) {
    let n = q.len();
    let mut ob = b.to_vec();
    let mut oq = q.to_vec();
    for i in (0..n - 1).rev() {
        ob[i] = fb(ob[i], ob[i + 1]);
        oq[i] = fq(oq[i], oq[i + 1]);
    }
    (ob, oq)
}

fn check_index(traj: &Trajectory, i: usize) -> Result<(), EvalError> {
    if i < traj.len() {
        Ok(())
    } else {
        Err(EvalError::IndexOutOfRange {
            index: i,
            len: traj.len(),
        })
    }
}

/// Whether the suffix of `traj` starting at `i` satisfies `f`.
pub fn eval_bool(f: &Formula, traj: &Trajectory, i: usize) -> Result<bool, EvalError> {
    check_index(traj, i)?;
    let table = EvalTable::build(f, traj, &RobustnessConfig::default())?;
    Ok(table.root_boolean()[i])
}

/// Robustness degree of `f` on the suffix of `traj` starting at `i`.
pub fn robustness(
    f: &Formula,
    traj: &Trajectory,
    i: usize,
    cfg: &RobustnessConfig,
) -> Result<f64, EvalError> {
    check_index(traj, i)?;
    let table = EvalTable::build(f, traj, cfg)?;
    Ok(table.root_robustness()[i])
}

/// Robustness at every suffix start, computed in one pass.
pub fn robustness_trace(
    f: &Formula,
    traj: &Trajectory,
    cfg: &RobustnessConfig,
) -> Result<Vec<f64>, EvalError> {
    let table = EvalTable::build(f, traj, cfg)?;
    Ok(table.root_robustness().to_vec())
}

/// Boolean verdict and robustness of the whole trajectory.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Verdict {
    pub sat: bool,
    pub rho: f64,
}

pub fn evaluate(f: &Formula, traj: &Trajectory, cfg: &RobustnessConfig) -> Result<Verdict, EvalError> {
    let table = EvalTable::build(f, traj, cfg)?;
    Ok(Verdict {
        sat: table.root_boolean()[0],
        rho: table.root_robustness()[0],
    })
}
