//! Toast-placing specification over end-effector pose and gripper traces.
//!
//! Nothing is simulated here. The layout describes three axis-aligned boxes
//! (table, toaster, toaster slot) and the gripper thresholds; traces are
//! supplied directly as `[x, y, z, roll, pitch, yaw, p_g]` rows. The gripper
//! position runs from 0 (fully closed) to 100 (fully open).

use std::collections::HashMap;

use super::{ArmError, ContinuousCoefficients, StepRewards, TaskSpec};
use crate::formula::{parse_with_scales, FeatureSchema};
use crate::semantics::Trajectory;

/// Channels of a pose/gripper trace.
pub const TOAST_CHANNELS: [&str; 7] = ["x", "y", "z", "roll", "pitch", "yaw", "p_g"];

/// Distance to the slot center under which the comparison reward expects
/// the gripper to open.
pub const SLOT_REACHED: f64 = 0.03;

/// Axis-aligned box `min < p < max`, componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRegion {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoxRegion {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| self.min[k] < p[k] && p[k] < self.max[k])
    }

    pub fn center(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| 0.5 * (self.min[k] + self.max[k]))
    }

    /// Signed margin of the tightest face; positive exactly inside.
    pub fn margin(&self, p: [f64; 3]) -> f64 {
        (0..3)
            .map(|k| (p[k] - self.min[k]).min(self.max[k] - p[k]))
            .fold(f64::INFINITY, f64::min)
    }

    /// The box as a conjunction of six face predicates.
    pub fn formula_text(&self) -> String {
        let faces: Vec<String> = ["x", "y", "z"]
            .iter()
            .enumerate()
            .map(|(k, axis)| format!("{axis} > {} & {axis} < {}", self.min[k], self.max[k]))
            .collect();
        format!("({})", faces.join(" & "))
    }
}

/// Regions and gripper thresholds of the toast-placing task.
#[derive(Debug, Clone, PartialEq)]
pub struct ToastLayout {
    pub table: BoxRegion,
    pub toaster: BoxRegion,
    pub slot: BoxRegion,
    /// Gripper counts as closed below this.
    pub close_below: f64,
    /// Gripper counts as open above this.
    pub open_above: f64,
    /// Robustness multiplier of the gripper predicates, bringing the 0-100
    /// scale in line with positions in meters.
    pub gripper_scale: f64,
}

impl Default for ToastLayout {
    fn default() -> Self {
        ToastLayout {
            table: BoxRegion { min: [-1.0, -1.0, -0.5], max: [1.0, 1.0, 0.0] },
            toaster: BoxRegion { min: [0.4, -0.15, 0.0], max: [0.7, 0.15, 0.25] },
            slot: BoxRegion { min: [0.5, -0.05, 0.27], max: [0.6, 0.05, 0.37] },
            close_below: 5.0,
            open_above: 95.0,
            gripper_scale: 0.01,
        }
    }
}

/// Shapes of the hand-built fixture traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Approach above the toaster with the gripper closed, descend into the
    /// slot, open after entering and lift away.
    Compliant,
    /// As `Compliant`, but the gripper opens two steps before the slot.
    EarlyOpen,
    /// Approaches at low height, sweeping through the toaster body.
    ThroughToaster,
}

impl ToastLayout {
    pub fn schema(&self) -> FeatureSchema {
        FeatureSchema::new(TOAST_CHANNELS).expect("toast channels are valid identifiers")
    }

    pub fn scales(&self) -> HashMap<String, f64> {
        HashMap::from([("p_g".to_string(), self.gripper_scale)])
    }

    /// Never touch the table or the toaster, eventually reach the slot, keep
    /// the gripper closed until then, and keep it open from the step after
    /// any slot visit onward.
    pub fn text(&self) -> String {
        let (table, toaster, slot) = (
            self.table.formula_text(),
            self.toaster.formula_text(),
            self.slot.formula_text(),
        );
        format!(
            "G !({table} | {toaster}) & F {slot} & (p_g < {} U {slot}) & G ({slot} -> X G (p_g > {}))",
            self.close_below, self.open_above
        )
    }

    pub fn spec(&self) -> Result<TaskSpec, ArmError> {
        let schema = self.schema();
        Ok(TaskSpec {
            formula: parse_with_scales(&self.text(), &schema, &self.scales())?,
            schema,
        })
    }

    /// Rows of a fixture trace, sampled every 50 ms.
    pub fn fixture(&self, kind: Fixture) -> Trajectory {
        let slot = self.slot.center();
        let above = slot[2] + 0.18;
        let approach_z = match kind {
            Fixture::ThroughToaster => 0.5 * (self.toaster.min[2] + self.toaster.max[2]),
            _ => above,
        };
        let mut points: Vec<[f64; 3]> = Vec::new();
        let start_x = self.toaster.min[0] - 0.2;
        for k in 0..8 {
            let s = k as f64 / 7.0;
            points.push([start_x + s * (slot[0] - start_x), slot[1], approach_z]);
        }
        for k in 1..=3 {
            let s = k as f64 / 3.0;
            points.push([slot[0], slot[1], approach_z + s * (slot[2] - approach_z)]);
        }
        points.extend([[slot[0], slot[1], slot[2]]; 2]);
        for k in 1..=3 {
            let s = k as f64 / 3.0;
            points.push([slot[0], slot[1], slot[2] + s * (above - slot[2])]);
        }
        let entry = points
            .iter()
            .position(|p| self.slot.contains(*p))
            .expect("fixture paths enter the slot");
        let opens_at = match kind {
            Fixture::EarlyOpen => entry - 2,
            _ => entry + 1,
        };
        let rows = points.iter().enumerate().map(|(t, p)| {
            let grip = if t >= opens_at { 100.0 } else { 0.0 };
            vec![p[0], p[1], p[2], 0.0, 0.0, 0.0, grip]
        });
        Trajectory::new(self.schema(), rows, 0.05).expect("fixture rows are finite")
    }
}

/// Hand-designed per-step reward of the toast-placing task:
/// `-c1 d_slot + c2 d_toaster - c3 |p_g - target|`, where the target gripper
/// position is 0 until the end-effector has come within [`SLOT_REACHED`] of
/// the slot center at some earlier step, and 100 afterwards. Distances are
/// to the region centers.
pub fn toast_comparison_reward(
    layout: &ToastLayout,
    traj: &Trajectory,
    coeffs: &ContinuousCoefficients,
) -> Result<StepRewards, ArmError> {
    let schema = traj.schema();
    let col = |name: &str| schema.index_of(name).ok_or(ArmError::SchemaMismatch);
    let (cx, cy, cz, cg) = (col("x")?, col("y")?, col("z")?, col("p_g")?);
    let dist = |p: [f64; 3], c: [f64; 3]| {
        (0..3).map(|k| (p[k] - c[k]).powi(2)).sum::<f64>().sqrt()
    };
    let (slot, toaster) = (layout.slot.center(), layout.toaster.center());
    let mut closest_so_far = f64::INFINITY;
    let mut out = Vec::with_capacity(traj.len());
    for s in traj.states() {
        let p = [s[cx], s[cy], s[cz]];
        let d_slot = dist(p, slot);
        let target = if closest_so_far > SLOT_REACHED { 0.0 } else { 100.0 };
        out.push(-coeffs.c1 * d_slot + coeffs.c2 * dist(p, toaster) - coeffs.c3 * (s[cg] - target).abs());
        closest_so_far = closest_so_far.min(d_slot);
    }
    Ok(StepRewards(out))
}
