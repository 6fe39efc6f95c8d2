mod common;

use common::{grid_dual_minimum, oracle_dual, oracle_kl};
use nalgebra::DVector;
use proptest::prelude::*;
use tltl_lab::reps::{
    dual_value, kl_to_uniform, reweight, solve_dual, update_policy, Episode, EpisodeBatch, EpisodeReward,
    LinearGaussianPolicy, ETA_MAX,
};

fn returns_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=50, 1e-3f64..1e3, -100.0f64..100.0).prop_flat_map(|(n, scale, offset)| {
        prop::collection::vec(-1.0f64..1.0, n)
            .prop_map(move |v| v.into_iter().map(|x| offset + scale * x).collect::<Vec<_>>())
    })
}

// Returns on a coarse dyadic grid, where adding an integer offset is exact.
fn dyadic_returns() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-64i32..=64, 2..=30)
        .prop_map(|v| v.into_iter().map(|k| f64::from(k) * 0.25).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weights_lie_on_the_simplex(returns in returns_strategy(), epsilon in 0.05f64..3.0) {
        let (_, w) = reweight(&returns, epsilon, 1e-6).unwrap();
        prop_assert_eq!(w.len(), returns.len());
        prop_assert!(w.iter().all(|&p| p >= 0.0 && p.is_finite()));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kl_bound_holds(returns in returns_strategy(), epsilon in 0.05f64..3.0) {
        let (_, w) = reweight(&returns, epsilon, 1e-6).unwrap();
        prop_assert!(oracle_kl(&w) <= epsilon + 1e-6, "kl {} > {}", oracle_kl(&w), epsilon);
        prop_assert!((kl_to_uniform(&w) - oracle_kl(&w)).abs() < 1e-9);
    }

    #[test]
    fn temperature_beats_a_dense_grid(returns in returns_strategy()) {
        let eta = solve_dual(&returns, 1.0, 1e-6).unwrap();
        let g = oracle_dual(&returns, 1.0, eta);
        let (_, grid_g) = grid_dual_minimum(&returns, 1.0, 1e-6, ETA_MAX, 2000);
        prop_assert!(g <= grid_g + 1e-9 * grid_g.abs().max(1.0), "{} vs grid {}", g, grid_g);
        prop_assert!((dual_value(&returns, 1.0, eta).unwrap() - g).abs() <= 1e-9 * g.abs().max(1.0));
    }

    #[test]
    fn shifting_returns_keeps_weights(returns in dyadic_returns(), offset in -1000i32..1000) {
        let shifted: Vec<f64> = returns.iter().map(|r| r + f64::from(offset)).collect();
        let (eta_a, wa) = reweight(&returns, 1.0, 1e-6).unwrap();
        let (eta_b, wb) = reweight(&shifted, 1.0, 1e-6).unwrap();
        prop_assert_eq!(eta_a, eta_b);
        prop_assert_eq!(wa, wb);
    }

    #[test]
    fn dual_is_convex(returns in returns_strategy(), a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let (ea, eb) = (10f64.powf(a), 10f64.powf(b));
        let mid = 0.5 * (ea + eb);
        let g = |e: f64| dual_value(&returns, 1.0, e).unwrap();
        let chord = 0.5 * (g(ea) + g(eb));
        prop_assert!(g(mid) <= chord + 1e-9 * chord.abs().max(1.0));
    }

    #[test]
    fn refit_covariance_stays_positive_definite(
        seed_values in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 2..12),
        raw_weights in prop::collection::vec(0.0f64..1.0, 12),
    ) {
        let n = seed_values.len();
        let horizon = 2;
        let policy = LinearGaussianPolicy::initial(horizon, 1, 3, 0.5, 1e-3).unwrap();
        let episodes: Vec<Episode> = seed_values
            .iter()
            .map(|k| Episode {
                states: vec![DVector::zeros(1); horizon + 1],
                actions: vec![DVector::from_vec(k.clone()); horizon],
                feedforwards: vec![DVector::from_vec(k.clone()); horizon],
                reward: EpisodeReward { terminal: 0.0, per_step: None },
            })
            .collect();
        let mut w: Vec<f64> = raw_weights[..n].iter().map(|x| x + 1e-3).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let updated = update_policy(&policy, &EpisodeBatch::new(episodes), &w).unwrap();
        let floor = 1e-6 * (1.0 - 1e-9);
        prop_assert!(updated.min_covariance_eigenvalue() >= floor, "{}", updated.min_covariance_eigenvalue());
        for t in 0..horizon {
            prop_assert!(updated.covariance(t).clone().cholesky().is_some());
        }
    }
}

#[test]
fn equal_returns_give_uniform_weights() {
    let (eta, w) = reweight(&[3.0; 7], 1.0, 1e-6).unwrap();
    assert_eq!(eta, ETA_MAX);
    assert!(w.iter().all(|&p| (p - 1.0 / 7.0).abs() < 1e-15));
}
