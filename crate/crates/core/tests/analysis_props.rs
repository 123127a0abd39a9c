use antdyn::analysis::{rate_report, verify_theorem2, CheckStatus, Theorem2Criteria};
use antdyn::integrate::euler_sum_allowance;
use antdyn::oracle::ClosedForm;
use antdyn::{integrate, ModelSpec, PathSystem, Settings};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn section5(x0: Vec<f64>) -> (ModelSpec, Vec<f64>) {
    let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
    let m = ModelSpec::new(1.0, 1.0, 10.0, PathSystem::from_lengths(&lengths).unwrap()).unwrap();
    (m, x0)
}

#[test]
fn shortest_path_wins_from_fifty_biased_starts() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let mut x0: Vec<f64> = (0..10).map(|_| rng.gen_range(0.01..2.0)).collect();
        // longest path gets the most pheromone
        x0.sort_by(f64::total_cmp);
        let (m, x0) = section5(x0);
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 2000)).unwrap();
        let fin = traj.final_state();
        let argmax = (0..10).max_by(|&a, &b| fin[a].total_cmp(&fin[b])).unwrap();
        assert_eq!(argmax, 0, "{x0:?}");
        let report = verify_theorem2(&m, &traj, &Theorem2Criteria::new(euler_sum_allowance(&m, 0.02, traj.sums()[0]))).unwrap();
        assert_eq!(report.status, CheckStatus::Pass, "{report:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Exact samples of random systems: fitted rates reproduce alpha (1 - d_i / d_1).
    #[test]
    fn fitted_rates_match_theory_on_oracle_samples(
        d in prop::collection::vec(0.1f64..0.85, 1..=5),
        x0 in prop::collection::vec(0.05f64..2.0, 6),
        alpha in 0.2f64..2.0,
        beta in 0.2f64..2.0,
    ) {
        let mut recip = vec![1.0];
        recip.extend(&d);
        let paths = PathSystem::from_reciprocals(&recip).unwrap();
        let x0 = paths.to_canonical(&x0[..recip.len()]);
        let m = ModelSpec::new(alpha, beta, 1.0, paths).unwrap();
        // horizon long enough for the first correction to die out
        let horizon = 60.0 / (alpha * 0.15);
        let oracle = ClosedForm::new(&m, &x0).unwrap();
        let traj = oracle.sample_grid(horizon / 400.0, 400).unwrap();
        let report = rate_report(&m, &traj, None).unwrap();
        for c in &report.components {
            match c.relative_rate_error {
                Some(err) => prop_assert!(err < 0.05, "{c:?}"),
                None => {
                    prop_assert!(m.paths().is_shortest(c.index));
                    prop_assert!((c.fitted_limit - c.theoretical_limit).abs() < 1e-6 * c.theoretical_limit, "{c:?}");
                }
            }
        }
    }
}

#[test]
fn rates_are_reported_in_gain_scaled_time() {
    let x0: Vec<f64> = (1..=10).map(|i| 0.1 * f64::from(i)).collect();
    let (m, x0) = section5(x0);
    let traj = ClosedForm::new(&m, &x0).unwrap().sample_grid(0.02, 2000).unwrap();
    let report = rate_report(&m, &traj, None).unwrap();
    assert_eq!(report.gamma, 10.0);
    let second = &report.components[1];
    assert!((second.theoretical_rate - 0.5).abs() < 1e-15);
    assert!((second.fitted_rate - 0.5).abs() < 0.025);
}
