//! Truncated linear temporal logic (TLTL) specifications, their robustness
//! semantics, episodic relative entropy policy search, and a planar
//! three-link arm benchmark that ties them together.
//!
//! - [`formula`]: syntax tree, parser and printer.
//! - [`semantics`]: Boolean and quantitative evaluation over finite traces.
//! - [`reps`]: linear-Gaussian policies and the REPS update.
//! - [`arm`]: the simulated arm, its tasks and reward adapters.
//! - [`harness`]: experiment configuration, runs and output files.

pub mod arm;
pub mod formula;
pub mod harness;
pub mod reps;
pub mod semantics;

pub use formula::{parse, unparse, FeatureSchema, Formula, Predicate};
pub use semantics::{eval_bool, evaluate, robustness, RobustnessConfig, Trajectory, Verdict};
