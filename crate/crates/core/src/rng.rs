//! Reproducible, splittable random streams.
//!
//! Every replicate owns one [`RngStream`], keyed by `(seed, stream_id)`. The
//! generator is ChaCha8 in counter mode: the stream id selects a disjoint
//! keystream, so replicates can be fanned out across threads without any
//! overlap and without coordination.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

/// Returns the stream identified by `(seed, stream_id)`.
///
/// Identical arguments give bit-identical draws; distinct stream ids give
/// non-overlapping keystreams.
pub fn rng_stream(seed: u64, stream_id: u64) -> RngStream {
    let mut inner = ChaCha8Rng::seed_from_u64(seed);
    inner.set_stream(stream_id);
    RngStream { inner }
}

impl RngStream {
    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on `(0, 1]`, safe to feed to `ln`.
    #[inline]
    pub fn uniform_pos(&mut self) -> f64 {
        1.0 - self.inner.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Unit-rate exponential.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.inner)
    }

    /// Exponential with the given rate (mean `1 / rate`).
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        self.exp1() / rate
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Minimum over `[0, dt]` of a Brownian bridge from 0 to `end`.
    ///
    /// Inverts `P(min <= m) = exp(-2 m (m - end) / dt)` for `m <= min(0, end)`.
    #[inline]
    pub fn bridge_minimum(&mut self, end: f64, dt: f64) -> f64 {
        let u = self.uniform_pos();
        0.5 * (end - (end * end - 2.0 * dt * u.ln()).sqrt())
    }

    pub(crate) fn inner_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// Gaussian increment with mean 0 and variance `dt`.
#[inline]
pub fn sample_brownian_increment(stream: &mut RngStream, dt: f64) -> f64 {
    dt.sqrt() * stream.standard_normal()
}
