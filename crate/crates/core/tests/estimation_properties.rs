//! Estimator calibration and the cumulative-process decomposition.

use ratchet_core::estimation::{run_replicates, terminal_speeds};
use ratchet_core::stats;
use ratchet_core::{
    decompose_cumulative, estimate_model_speed, estimate_speed_jumps, estimate_speed_renewal,
    estimate_speed_terminal, renewal_increments, scaling_collapse_check,
    simulate_model1_thinned_with, simulate_model2_with, speed_delta0, Params, PathSample, SimGrid,
    SpeedModel, TruncationPolicy,
};

#[test]
fn stderr_shrinks_like_inverse_root_n() {
    let params = Params::at_origin(0.5, 0.0).unwrap();
    let grid = SimGrid::new(1e-3, 500.0, 31).unwrap();
    let speeds = terminal_speeds(&SpeedModel::Model2, &params, &grid, 400, 0).unwrap();
    let ratio = stats::std_err(&speeds) / stats::std_err(&speeds[..200]);
    assert!((0.6..=0.82).contains(&ratio), "{ratio}");
}

#[test]
fn confidence_intervals_calibrated_at_zero_dissociation() {
    let params = Params::at_origin(0.5, 0.0).unwrap();
    let grid = SimGrid::new(1e-3, 500.0, 32).unwrap();
    let truth = speed_delta0(0.5).unwrap();
    let covered = (0..100)
        .filter(|&k| {
            estimate_model_speed(&SpeedModel::Model2, &params, &grid, 20, k)
                .unwrap()
                .covers(truth)
        })
        .count();
    assert!(covered >= 88, "{covered}/100");
}

#[test]
fn thinned_model_renewal_structure() {
    let params = Params::at_origin(0.5, 1.0).unwrap();
    let grid = SimGrid::new(1e-3, 5000.0, 33).unwrap();
    let policy = TruncationPolicy::default_window();
    let run_at = |horizon: f64| {
        let g = grid.with_horizon(horizon);
        run_replicates(grid.seed, 0, 200, move |_, s| {
            simulate_model1_thinned_with(s, &params, &g, &policy, false)
        })
        .unwrap()
    };
    let remainders = |runs: &[ratchet_core::ThinnedRun]| -> Vec<f64> {
        runs.iter()
            .map(|r| {
                let d = decompose_cumulative(&r.path, &r.renewals).unwrap();
                assert!(d.identity_residual() < 1e-9);
                d.remainder_rate().abs()
            })
            .collect()
    };
    let runs = run_at(5000.0);
    let early = remainders(&run_at(500.0));
    let late = remainders(&runs);
    let mut pooled = Vec::new();
    for r in &runs {
        pooled.extend(renewal_increments(&r.renewals).unwrap());
    }
    let (m0, m1) = (stats::median(&early), stats::median(&late));
    assert!(m1 < 0.5 * m0, "median |A_t|/t: {m0} at 500, {m1} at 5000");

    let renewal = estimate_speed_renewal(&pooled, 0.0).unwrap();
    let paths: Vec<PathSample> = runs.into_iter().map(|r| r.path).collect();
    let terminal = estimate_speed_terminal(&paths).unwrap();
    assert!(terminal.ci.0 > 0.0);
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
fn model2_terminal_and_jump_estimators_agree() {
    let params = Params::at_origin(0.5, 1.0).unwrap();
    let grid = SimGrid::new(1e-3, 5000.0, 34).unwrap();
    let runs = run_replicates(grid.seed, 0, 200, |_, s| {
        simulate_model2_with(s, &params, &grid, false)
    })
    .unwrap();
    // one long chain from the replicate records, each burnt in separately
    let mut records = Vec::new();
    for r in &runs {
        records.extend_from_slice(&r.records[r.records.len() / 5..]);
    }
    let jumps = estimate_speed_jumps(&records, 0.0).unwrap();
    let paths: Vec<PathSample> = runs.into_iter().map(|r| r.path).collect();
    let terminal = estimate_speed_terminal(&paths).unwrap();
    assert!(
        jumps.agrees_with(&terminal, 3.0),
        "jumps {} +- {}, terminal {} +- {}",
        jumps.mean,
        jumps.stderr,
        terminal.mean,
        terminal.stderr
    );
    assert!(jumps.jackknife_stderr.is_some());
}

#[test]
fn unit_gamma_scaling_is_trivial() {
    let grid = SimGrid::new(1e-3, 50.0, 35).unwrap();
    let r = scaling_collapse_check(&SpeedModel::Model2, 1.0, 0.7, &grid, 4).unwrap();
    assert_eq!(r.original.mean, r.rescaled.mean);
    assert_eq!(r.difference, 0.0);
}
