//! Model I and its thinned variant: path invariants and renewal structure.

use proptest::prelude::*;
use ratchet_core::estimation::run_replicates;
use ratchet_core::stats;
use ratchet_core::{
    estimate_model_speed, estimate_speed_renewal, estimate_speed_terminal, renewal_increments,
    simulate_model1, simulate_model1_thinned, simulate_model1_thinned_with, JumpCause, Params,
    PathSample, SimGrid, SpeedModel, TruncationPolicy,
};

fn check_jump_log(path: &PathSample, delta: f64) {
    for j in &path.jumps {
        match j.cause {
            JumpCause::NewBinding => {
                assert!(j.old < j.new && j.new <= j.x, "{j:?}");
            }
            JumpCause::Dissociation => {
                assert!(delta > 0.0, "dissociation at delta = 0");
                assert!(j.new <= j.old, "{j:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reflection_and_jump_causes(
        gamma in 0.2f64..2.0,
        delta in 0.0f64..3.0,
        seed in any::<u64>(),
        floor in any::<bool>(),
    ) {
        let params = Params::at_origin(gamma, delta).unwrap();
        let grid = SimGrid::new(1e-3, 20.0, seed).unwrap();
        let policy = if floor { TruncationPolicy::floor() } else { TruncationPolicy::default_window() };
        let full = simulate_model1(&params, &grid, &policy, true).unwrap().path;
        prop_assert!(full.respects_boundary());
        check_jump_log(&full, delta);
        let thin = simulate_model1_thinned(&params, &grid, &policy, true).unwrap();
        prop_assert!(thin.path.respects_boundary());
        check_jump_log(&thin.path, delta);
        prop_assert!(thin.renewals.windows(2).all(|w| w[1].time > w[0].time));
    }
}

#[test]
fn boundary_never_drops_without_dissociation() {
    let params = Params::at_origin(0.5, 0.0).unwrap();
    for seed in 0..20 {
        let grid = SimGrid::new(1e-3, 100.0, seed).unwrap();
        let path = simulate_model1(&params, &grid, &TruncationPolicy::floor(), true)
            .unwrap()
            .path;
        assert!(path.r.windows(2).all(|w| w[1] >= w[0]));
        assert!(path.jumps.iter().all(|j| j.cause == JumpCause::NewBinding));
    }
}

#[test]
fn floor_mode_not_slower_than_window_at_large_delta() {
    let params = Params::at_origin(0.5, 4.0).unwrap();
    let grid = SimGrid::new(1e-3, 1000.0, 77).unwrap();
    let floor = estimate_model_speed(
        &SpeedModel::Model1(TruncationPolicy::floor()),
        &params,
        &grid,
        40,
        0,
    )
    .unwrap();
    let window = estimate_model_speed(
        &SpeedModel::Model1(TruncationPolicy::default_window()),
        &params,
        &grid,
        40,
        1,
    )
    .unwrap();
    assert!(
        floor.mean + 3.0 * floor.joint_se(&window) >= window.mean,
        "floor {} window {}",
        floor.mean,
        window.mean
    );
}

#[test]
fn renewal_increments_iid_and_consistent_with_terminal_speed() {
    let params = Params::at_origin(0.5, 0.5).unwrap();
    let grid = SimGrid::new(1e-3, 5000.0, 91).unwrap();
    let policy = TruncationPolicy::default_window();
    let runs = run_replicates(grid.seed, 0, 40, |_, s| {
        simulate_model1_thinned_with(s, &params, &grid, &policy, false)
    })
    .unwrap();

    let mut pooled = Vec::new();
    for r in &runs {
        let inc = renewal_increments(&r.renewals).unwrap();
        assert!(inc.iter().all(|&(ds, _)| ds > 0.0));
        pooled.extend(inc);
    }
    // independent paths concatenated keep the sequence iid
    let head: Vec<f64> = pooled.iter().take(6000).map(|v| v.1).collect();
    assert!(head.len() >= 2000);
    let rho = stats::lag1_autocorrelation(&head);
    assert!(rho.abs() < 0.05, "lag-1 {rho}");

    let renewal = estimate_speed_renewal(&pooled, 0.0).unwrap();
    let paths: Vec<PathSample> = runs.into_iter().map(|r| r.path).collect();
    let terminal = estimate_speed_terminal(&paths).unwrap();
    assert!(
        renewal.agrees_with(&terminal, 3.0),
        "renewal {} +- {}, terminal {} +- {}",
        renewal.mean,
        renewal.stderr,
        terminal.mean,
        terminal.stderr
    );
}

#[test]
fn window_factor_below_ten_rejected() {
    assert!(TruncationPolicy::window(5.0).is_err());
    assert!(TruncationPolicy::window(10.0).is_ok());
}
