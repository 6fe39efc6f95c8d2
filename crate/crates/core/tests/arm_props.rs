use proptest::prelude::*;
use tltl_lab::arm::toast::{BoxRegion, ToastLayout};
use tltl_lab::arm::{
    forward_kinematics, phi1, phi2, reward_task2_discrete, tltl_reward, SceneConfig, VisitTracker,
};
use tltl_lab::formula::{parse, Formula};
use tltl_lab::semantics::{eval_bool, robustness, RobustnessConfig, Trajectory};

const LINKS: [f64; 3] = [0.3, 0.3, 0.3];

/// Feature rows for an end-effector path; joint channels are zero.
fn xy_trajectory(scene: &SceneConfig, path: &[(f64, f64)]) -> Trajectory {
    let rows = path.iter().map(|&(x, y)| {
        let mut row = vec![0.0; 6];
        row.extend([x, y]);
        row.extend(scene.goals.iter().map(|g| (x - g.x).hypot(y - g.y)));
        row.extend(scene.obstacles.iter().map(|o| (x - o.x).hypot(y - o.y)));
        row
    });
    Trajectory::new(scene.feature_schema().unwrap(), rows, scene.dt).unwrap()
}

/// `steps` points per segment along a polyline through `waypoints`.
fn polyline(waypoints: &[(f64, f64)], steps: usize) -> Vec<(f64, f64)> {
    let mut out = vec![waypoints[0]];
    for w in waypoints.windows(2) {
        for k in 1..=steps {
            let s = k as f64 / steps as f64;
            out.push((w[0].0 + s * (w[1].0 - w[0].0), w[0].1 + s * (w[1].1 - w[0].1)));
        }
    }
    out
}

fn rho(f: &Formula, traj: &Trajectory) -> f64 {
    robustness(f, traj, 0, &RobustnessConfig::default()).unwrap()
}

// Reach and stay in the goal disc, never touch an obstacle disc.
fn phi1_geometric(scene: &SceneConfig, path: &[(f64, f64)]) -> bool {
    let g = &scene.goals[0];
    let clear = path
        .iter()
        .all(|&(x, y)| scene.obstacles.iter().all(|o| (x - o.x).hypot(y - o.y) > o.radius));
    let settles = (0..path.len()).any(|t| path[t..].iter().all(|&(x, y)| (x - g.x).hypot(y - g.y) < g.radius));
    clear && settles
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-0.9f64..0.9, -0.9f64..0.9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn kinematics_is_lipschitz(
        q in prop::array::uniform3(-std::f64::consts::PI..std::f64::consts::PI),
        d in prop::array::uniform3(-1e-3f64..1e-3),
    ) {
        let a = forward_kinematics(&LINKS, &q);
        let b = forward_kinematics(&LINKS, &[q[0] + d[0], q[1] + d[1], q[2] + d[2]]);
        let moved = (a.0 - b.0).hypot(a.1 - b.1);
        let bound = LINKS.iter().sum::<f64>() * d.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!(moved <= bound + 1e-15);
        prop_assert!(a.0.hypot(a.1) <= 0.9 + 1e-9);
    }

    #[test]
    fn phi1_sign_matches_geometry(
        start in point(),
        mid in point(),
        end in prop_oneof![point(), (0.45f64..0.75, 0.25f64..0.55)],
        dwell in 0usize..6,
    ) {
        let scene = SceneConfig::task1();
        let mut path = polyline(&[start, mid, end], 8);
        path.extend(std::iter::repeat_n(end, dwell));
        let traj = xy_trajectory(&scene, &path);
        let spec = phi1(&scene).unwrap();
        let r = rho(&spec.formula, &traj);
        prop_assume!(r.abs() > 1e-9);
        prop_assert_eq!(r > 0.0, phi1_geometric(&scene, &path), "rho {}", r);
    }

    #[test]
    fn phi2_rejects_wrong_orders(order in Just([0usize, 1, 2]).prop_shuffle(), jitter in -0.05f64..0.05) {
        prop_assume!(order != [0, 1, 2]);
        let scene = SceneConfig::task2();
        let mut waypoints = vec![(-0.3, -0.5)];
        waypoints.extend(order.iter().map(|&g| (scene.goals[g].x + jitter, scene.goals[g].y - jitter)));
        let traj = xy_trajectory(&scene, &polyline(&waypoints, 10));
        let spec = phi2(&scene).unwrap();
        prop_assert!(rho(&spec.formula, &traj) < 0.0);
        prop_assert!(!eval_bool(&spec.formula, &traj, 0).unwrap());
    }

    #[test]
    fn phi2_rejects_revisits(again in 0usize..3, jitter in -0.05f64..0.05) {
        let scene = SceneConfig::task2();
        let centre = |g: usize| (scene.goals[g].x + jitter, scene.goals[g].y + jitter);
        let mut waypoints = vec![(-0.3, -0.5), centre(0), centre(1), centre(2)];
        // leave the last goal, come back to an already visited one
        waypoints.push((0.0, -0.2));
        waypoints.push(centre(again));
        let traj = xy_trajectory(&scene, &polyline(&waypoints, 10));
        let spec = phi2(&scene).unwrap();
        prop_assert!(rho(&spec.formula, &traj) < 0.0);
    }

    #[test]
    fn box_formula_agrees_with_membership(
        lo in prop::array::uniform3(-1.0f64..0.0),
        size in prop::array::uniform3(0.01f64..1.0),
        p in prop::array::uniform3(-1.2f64..1.2),
    ) {
        let b = BoxRegion { min: lo, max: [lo[0] + size[0], lo[1] + size[1], lo[2] + size[2]] };
        let layout = ToastLayout::default();
        let f = parse(&b.formula_text(), &layout.schema()).unwrap();
        let traj = Trajectory::new(layout.schema(), [vec![p[0], p[1], p[2], 0.0, 0.0, 0.0, 0.0]], 0.05).unwrap();
        let r = rho(&f, &traj);
        prop_assume!(r.abs() > 1e-12);
        prop_assert_eq!(r > 0.0, b.contains(p));
        prop_assert!((r - b.margin(p)).abs() < 1e-12);
    }
}

#[test]
fn phi1_reward_examples() {
    let scene = SceneConfig::task1();
    let spec = phi1(&scene).unwrap();
    let cfg = RobustnessConfig::default();
    // from below the obstacles, around the right of obstacle 2, into the goal
    let good = polyline(&[(0.45, -0.45), (0.75, -0.1), (0.6, 0.4)], 10);
    let traj = xy_trajectory(&scene, &good);
    assert!(phi1_geometric(&scene, &good));
    assert!(tltl_reward(&spec.formula, &traj, &cfg).unwrap() > 0.0);
    assert!(eval_bool(&spec.formula, &traj, 0).unwrap());
    // straight through obstacle 1 at (0.3, 0.2)
    let bad = polyline(&[(0.0, 0.0), (0.3, 0.2), (0.6, 0.4)], 10);
    let traj = xy_trajectory(&scene, &bad);
    assert!(tltl_reward(&spec.formula, &traj, &cfg).unwrap() < 0.0);
    assert_eq!(tltl_reward(&Formula::True, &traj, &cfg).unwrap(), cfg.rho_max);
}

#[test]
fn task2_entry_order_events() {
    let scene = SceneConfig::task2();
    let start = (-0.3, -0.5);
    let rewards = |goal: usize| {
        let target = (scene.goals[goal].x, scene.goals[goal].y);
        let traj = xy_trajectory(&scene, &polyline(&[start, target], 20));
        reward_task2_discrete(&scene, &traj, &mut VisitTracker::new(3)).unwrap().0
    };
    assert!(rewards(0).contains(&5.0));
    assert!(!rewards(0).contains(&-5.0));
    assert!(rewards(2).contains(&-5.0));
}
