use super::{toast, ArmError, SceneConfig, TaskId};
use crate::formula::{parse, unparse, FeatureSchema, Formula};

/// A formula together with the feature schema it was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub formula: Formula,
    pub schema: FeatureSchema,
}

impl TaskSpec {
    pub fn text(&self) -> String {
        unparse(&self.formula)
    }
}

fn goal_pred(scene: &SceneConfig, g: usize) -> String {
    format!("{} < {}", scene.goal_feature(g), scene.goals[g].radius)
}

fn obstacle_clause(scene: &SceneConfig) -> String {
    let clear: Vec<String> = (0..scene.obstacles.len())
        .map(|j| format!("{} > {}", scene.obstacle_feature(j), scene.obstacles[j].radius))
        .collect();
    format!("G ({})", clear.join(" & "))
}

/// Reach the goal and stay there, never entering an obstacle:
/// `F G (d_g < r_g) & G (d_o1 > r_o1 & d_o2 > r_o2)`.
pub fn phi1(scene: &SceneConfig) -> Result<TaskSpec, ArmError> {
    let schema = scene.feature_schema()?;
    let text = format!("F G ({}) & {}", goal_pred(scene, 0), obstacle_clause(scene));
    Ok(TaskSpec {
        formula: parse(&text, &schema)?,
        schema,
    })
}

/// Visit the goals in the listed order without visiting a later goal early,
/// never revisit a goal, and never enter an obstacle.
pub fn phi2(scene: &SceneConfig) -> Result<TaskSpec, ArmError> {
    if scene.goals.len() != 3 {
        return Err(ArmError::InvalidScene("the sequencing formula needs three goals".into()));
    }
    let schema = scene.feature_schema()?;
    let [a, b, c] = [0, 1, 2].map(|g| goal_pred(scene, g));
    let mut clauses = vec![
        format!("({a} T {b} T {c})"),
        format!("(!({b} | {c}) U {a})"),
        format!("(!({c}) U {b})"),
    ];
    clauses.extend([&a, &b, &c].map(|p| format!("G ({p} -> X G !({p}))")));
    clauses.push(obstacle_clause(scene));
    let text = clauses.join(" & ");
    Ok(TaskSpec {
        formula: parse(&text, &schema)?,
        schema,
    })
}

/// The specification matching a scene's task.
pub fn task_spec(scene: &SceneConfig) -> Result<TaskSpec, ArmError> {
    match scene.task {
        TaskId::Task1 => phi1(scene),
        TaskId::Task2 => phi2(scene),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinFormulas {
    pub phi1: TaskSpec,
    pub phi2: TaskSpec,
    pub phi_toast: TaskSpec,
}

/// The two arm specifications over the default scenes and the toast-placing
/// specification over the default toaster layout.
pub fn builtin_formulas() -> BuiltinFormulas {
    BuiltinFormulas {
        phi1: phi1(&SceneConfig::task1()).expect("default task 1 scene is valid"),
        phi2: phi2(&SceneConfig::task2()).expect("default task 2 scene is valid"),
        phi_toast: toast::ToastLayout::default()
            .spec()
            .expect("default toaster layout is valid"),
    }
}
