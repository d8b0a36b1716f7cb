//! Killed reflected Brownian motion and Poisson points against their laws.

use ratchet_core::estimation::run_replicates;
use ratchet_core::stats;
use ratchet_core::{
    rng_stream, sample_killed_reflected_bm, sample_killed_reflected_bm_with, sample_poisson_points,
    GreenContext, Lifetime, Params, SimGrid,
};

const SEED: u64 = 4242;

fn kill_times(params: &Params, start: f64, n: usize, config: u32) -> Vec<f64> {
    let grid = SimGrid::new(1e-3, 10.0, SEED).unwrap();
    run_replicates(SEED, config, n, |_, s| {
        Ok(sample_killed_reflected_bm_with(s, params, start, &grid, false)?.kill_time)
    })
    .unwrap()
}

#[test]
fn constant_hazard_kill_time_is_exponential() {
    // gamma > 0 is required; at 1e-12 the hazard is delta to within 1e-11
    let params = Params::at_origin(1e-12, 1.0).unwrap();
    let n = 100_000;
    let t = kill_times(&params, 0.0, n, 1);
    let (d, p) = stats::ks_one_sample(&t, |x| 1.0 - (-x).exp());
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d < critical, "KS {d} vs {critical} (p {p})");
}

#[test]
fn large_delta_lifetime() {
    let params = Params::at_origin(0.5, 100.0).unwrap();
    let m = stats::mean(&kill_times(&params, 0.0, 20_000, 2));
    assert!((m - 0.01).abs() < 0.05 * 0.01, "{m}");
}

#[test]
fn mean_kill_time_matches_speed_measure_integral() {
    for (k, &(g, d, x)) in [(0.5, 1.0, 1.0), (1.0, 0.5, 0.0)].iter().enumerate() {
        let params = Params::at_origin(g, d).unwrap();
        let exact = GreenContext::new(params)
            .unwrap()
            .mean_kill_time(x)
            .unwrap();
        let m = stats::mean(&kill_times(&params, x, 40_000, 10 + k as u32));
        assert!(
            (m - exact).abs() < 0.02 * exact,
            "({g}, {d}, {x}): {m} vs {exact}"
        );
    }
}

#[test]
fn kill_result_invariants_and_determinism() {
    let params = Params::at_origin(0.5, 0.3).unwrap();
    for seed in 0..200 {
        let grid = SimGrid::new(1e-3, 5.0, seed).unwrap();
        let a = sample_killed_reflected_bm(&params, 0.7, &grid, true).unwrap();
        assert!(a.kill_time > 0.0 && a.kill_position >= 0.0);
        assert!(a.path.as_ref().unwrap().iter().all(|&(_, v)| v >= 0.0));
        assert_eq!(
            a,
            sample_killed_reflected_bm(&params, 0.7, &grid, true).unwrap()
        );
    }
}

#[test]
fn rejects_non_finite_start() {
    let params = Params::at_origin(0.5, 1.0).unwrap();
    let grid = SimGrid::new(1e-3, 1.0, 1).unwrap();
    assert!(sample_killed_reflected_bm(&params, f64::NAN, &grid, false).is_err());
    assert!(sample_killed_reflected_bm(&params, f64::INFINITY, &grid, false).is_err());
}

#[test]
fn poisson_unit_square_and_lifetimes() {
    let mut s = rng_stream(SEED, 7);
    let reps = 100_000;
    let mut count = 0usize;
    let mut z = Vec::new();
    for _ in 0..reps {
        let pts = sample_poisson_points(&mut s, 1.0, (0.0, 1.0), (0.0, 1.0), 2.0).unwrap();
        count += pts.len();
        for p in pts {
            assert!((0.0..=1.0).contains(&p.tau) && (0.0..=1.0).contains(&p.r));
            match p.z {
                Lifetime::Finite(v) => z.push(v),
                Lifetime::Never => panic!("delta > 0 must give finite lifetimes"),
            }
        }
    }
    let mean = count as f64 / reps as f64;
    assert!((mean - 1.0).abs() < 0.01, "{mean}");
    let mz = stats::mean(&z);
    assert!((mz - 0.5).abs() < 0.02 * 0.5, "{mz}");
}
