//! Reflected Brownian motion killed at the state-dependent rate `gamma x + delta`.
//!
//! The reflected path is advanced on the Euler grid by `x <- |x + dB|`, which
//! reproduces the law of Brownian motion reflected at 0 at the grid times. The
//! integrated hazard is accumulated by the trapezoid rule and compared with a
//! single unit exponential level.

use serde::{Deserialize, Serialize};

use crate::error::{RatchetError, Result};
use crate::params::{Params, SimGrid};
use crate::rng::{rng_stream, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KilledPathResult {
    /// First grid time at which the integrated hazard exceeds the level.
    pub kill_time: f64,
    /// Path value at the last grid time before the kill.
    pub kill_position: f64,
    pub path: Option<Vec<(f64, f64)>>,
}

/// Runs one killed path on the stream `rng_stream(grid.seed, 0)`.
pub fn sample_killed_reflected_bm(
    params: &Params,
    start: f64,
    grid: &SimGrid,
    keep_path: bool,
) -> Result<KilledPathResult> {
    let mut stream = rng_stream(grid.seed, 0);
    sample_killed_reflected_bm_with(&mut stream, params, start, grid, keep_path)
}

/// Runs one killed path on a caller-owned stream.
///
/// The grid horizon is only the initial budget: a path still alive at the
/// horizon keeps running, with the budget doubled each time it is exhausted.
pub fn sample_killed_reflected_bm_with(
    stream: &mut RngStream,
    params: &Params,
    start: f64,
    grid: &SimGrid,
    keep_path: bool,
) -> Result<KilledPathResult> {
    if !start.is_finite() || start < 0.0 {
        return Err(RatchetError::InvalidParameter(format!(
            "start must be finite and >= 0, got {start}"
        )));
    }
    params.validate()?;
    grid.validate()?;
    let (gamma, delta, dt) = (params.gamma, params.delta, grid.dt);
    let sdt = dt.sqrt();
    let level = stream.exp1();
    let mut path = keep_path.then(|| vec![(0.0, start)]);

    let mut x = start;
    let mut rate = gamma * x + delta;
    let mut hazard = 0.0;
    let mut budget = grid.steps();
    let mut n: u64 = 0;
    loop {
        n += 1;
        let next = (x + sdt * stream.standard_normal()).abs();
        let next_rate = gamma * next + delta;
        hazard += 0.5 * dt * (rate + next_rate);
        let t = n as f64 * dt;
        if hazard >= level {
            return Ok(KilledPathResult {
                kill_time: t,
                kill_position: x,
                path,
            });
        }
        x = next;
        rate = next_rate;
        if let Some(p) = path.as_mut() {
            p.push((t, x));
        }
        if n == budget {
            budget = budget.saturating_mul(2);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(seed: u64) -> SimGrid {
        SimGrid::new(1e-3, 10.0, seed).unwrap()
    }

    #[test]
    fn deterministic() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let a = sample_killed_reflected_bm(&p, 0.3, &grid(5), true).unwrap();
        let b = sample_killed_reflected_bm(&p, 0.3, &grid(5), true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn path_stays_nonnegative() {
        let p = Params::at_origin(0.5, 0.0).unwrap();
        for seed in 0..50 {
            let r = sample_killed_reflected_bm(&p, 0.0, &grid(seed), true).unwrap();
            let path = r.path.unwrap();
            assert!(path.iter().all(|&(_, v)| v >= 0.0));
            assert!(r.kill_time > 0.0 && r.kill_position >= 0.0);
            assert_eq!(path.last().unwrap().1, r.kill_position);
        }
    }

    #[test]
    fn outlives_short_horizon() {
        // delta tiny and gamma tiny: the path must run past the initial horizon
        let p = Params::at_origin(1e-3, 1e-3).unwrap();
        let g = SimGrid::new(1e-2, 0.1, 1).unwrap();
        let r = sample_killed_reflected_bm(&p, 0.0, &g, false).unwrap();
        assert!(r.kill_time > 0.1);
    }

    #[test]
    fn rejects_bad_start() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        assert!(sample_killed_reflected_bm(&p, f64::NAN, &grid(1), false).is_err());
        assert!(sample_killed_reflected_bm(&p, f64::INFINITY, &grid(1), false).is_err());
    }
}
