//! Poisson points `(tau, r, z)` with intensity `rate dtau dr x delta e^{-delta z} dz`.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{RatchetError, Result};
use crate::rng::RngStream;

/// Bound duration of a molecule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lifetime {
    Finite(f64),
    /// `delta = 0`: the molecule never dissociates.
    Never,
}

impl Lifetime {
    pub fn sample(stream: &mut RngStream, delta: f64) -> Lifetime {
        if delta > 0.0 {
            Lifetime::Finite(stream.exponential(delta))
        } else {
            Lifetime::Never
        }
    }

    /// Absolute dissociation time of a molecule bound at `tau`.
    pub fn end(&self, tau: f64) -> Option<f64> {
        match *self {
            Lifetime::Finite(z) => Some(tau + z),
            Lifetime::Never => None,
        }
    }
}

/// One ratcheting molecule: bound at time `tau` at position `r` for duration `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonPoint {
    pub tau: f64,
    pub r: f64,
    pub z: Lifetime,
}

/// Samples the points falling in `t_window x x_window`.
pub fn sample_poisson_points(
    stream: &mut RngStream,
    rate_density: f64,
    t_window: (f64, f64),
    x_window: (f64, f64),
    delta: f64,
) -> Result<Vec<PoissonPoint>> {
    let bounds = [t_window.0, t_window.1, x_window.0, x_window.1];
    if bounds.iter().any(|b| !b.is_finite()) {
        return Err(RatchetError::UnboundedWindow(format!(
            "t {t_window:?}, x {x_window:?}"
        )));
    }
    if !(rate_density.is_finite() && rate_density > 0.0) {
        return Err(RatchetError::InvalidParameter(format!(
            "rate density must be finite and > 0, got {rate_density}"
        )));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(RatchetError::InvalidParameter(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    let dt = t_window.1 - t_window.0;
    let dx = x_window.1 - x_window.0;
    if dt < 0.0 || dx < 0.0 {
        return Err(RatchetError::InvalidParameter(
            "window bounds must be ordered".into(),
        ));
    }
    let mean = rate_density * dt * dx;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| RatchetError::InvalidParameter(e.to_string()))?
        .sample(stream.inner_mut()) as usize;
    let mut pts = Vec::with_capacity(count);
    for _ in 0..count {
        let tau = t_window.0 + dt * stream.uniform();
        let r = x_window.0 + dx * stream.uniform();
        let z = Lifetime::sample(stream, delta);
        pts.push(PoissonPoint { tau, r, z });
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    #[test]
    fn unit_square_count_mean() {
        let mut s = rng_stream(3, 0);
        let n = 100_000;
        let total: usize = (0..n)
            .map(|_| {
                sample_poisson_points(&mut s, 1.0, (0.0, 1.0), (0.0, 1.0), 1.0)
                    .unwrap()
                    .len()
            })
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn empty_window() {
        let mut s = rng_stream(3, 0);
        let v = sample_poisson_points(&mut s, 5.0, (1.0, 1.0), (0.0, 3.0), 1.0).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn lifetime_mean() {
        let mut s = rng_stream(4, 0);
        let mut zs = Vec::new();
        while zs.len() < 100_000 {
            for p in sample_poisson_points(&mut s, 10.0, (0.0, 1.0), (0.0, 10.0), 2.0).unwrap() {
                match p.z {
                    Lifetime::Finite(z) => zs.push(z),
                    Lifetime::Never => panic!("finite delta"),
                }
            }
        }
        let m = zs.iter().sum::<f64>() / zs.len() as f64;
        assert!((m - 0.5).abs() < 0.01, "{m}");
    }

    #[test]
    fn never_dissociates_without_delta() {
        let mut s = rng_stream(4, 0);
        let v = sample_poisson_points(&mut s, 10.0, (0.0, 1.0), (0.0, 1.0), 0.0).unwrap();
        assert!(v.iter().all(|p| p.z == Lifetime::Never));
    }

    #[test]
    fn points_inside_window() {
        let mut s = rng_stream(5, 0);
        let v = sample_poisson_points(&mut s, 50.0, (2.0, 3.0), (-1.0, 1.0), 1.0).unwrap();
        assert!(v
            .iter()
            .all(|p| (2.0..3.0).contains(&p.tau) && (-1.0..1.0).contains(&p.r)));
    }

    #[test]
    fn rejects_unbounded() {
        let mut s = rng_stream(5, 0);
        assert!(sample_poisson_points(&mut s, 1.0, (0.0, f64::INFINITY), (0.0, 1.0), 1.0).is_err());
        assert!(
            sample_poisson_points(&mut s, 1.0, (0.0, 1.0), (f64::NEG_INFINITY, 1.0), 1.0).is_err()
        );
    }
}
