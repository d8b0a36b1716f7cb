//! Green function of reflected Brownian motion killed at rate `gamma x + delta`.
//!
//! With `s = (2 gamma)^{1/3}` and `a = 2^{1/3} delta / gamma^{2/3}` the equation
//! `u'' = (2 gamma x + 2 delta) u` has the decaying solution
//! `phi(x) = Ai(s x + a)` and the solution `psi(x) = Bi(s x + a) - C Ai(s x + a)`
//! with `C = Bi'(a) / Ai'(a)` chosen so that `psi'(0) = 0`. Their Wronskian is
//! `w = s / pi` and `G(x, y) = psi(min) phi(max) / w` is the Green function with
//! respect to the speed measure `2 dy`.

use serde::{Deserialize, Serialize};

use super::airy::{airy, AiryPair, AIRY_MAX_ARG};
use super::quad;
use crate::error::{RatchetError, Result};
use crate::params::Params;

pub type AiryFn = fn(f64) -> Result<AiryPair>;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GreenContext {
    pub params: Params,
    /// `C(gamma, delta) = Bi'(a) / Ai'(a)`
    pub c: f64,
    /// Wronskian `psi' phi - psi phi'`
    pub w: f64,
    /// `(2 gamma)^{1/3}`
    pub scale: f64,
    /// `2^{1/3} delta / gamma^{2/3}`
    pub shift: f64,
    ai_prime_a: f64,
    bi_prime_a: f64,
    #[serde(skip, default = "default_airy")]
    eval: AiryFn,
}

fn default_airy() -> AiryFn {
    airy
}

impl GreenContext {
    pub fn new(params: Params) -> Result<Self> {
        Self::with_evaluator(params, airy)
    }

    /// Builds the context on a caller-supplied Airy evaluator (used for fault
    /// injection in the validation suite).
    pub fn with_evaluator(params: Params, eval: AiryFn) -> Result<Self> {
        params.validate()?;
        let scale = (2.0 * params.gamma).cbrt();
        let shift = 2f64.cbrt() * params.delta / params.gamma.powf(2.0 / 3.0);
        let at_a = eval(shift)?;
        Ok(GreenContext {
            params,
            c: at_a.bi_prime / at_a.ai_prime,
            w: scale / std::f64::consts::PI,
            scale,
            shift,
            ai_prime_a: at_a.ai_prime,
            bi_prime_a: at_a.bi_prime,
            eval,
        })
    }

    fn at(&self, x: f64) -> Result<AiryPair> {
        if x.is_nan() || x < 0.0 {
            return Err(RatchetError::OutOfRange {
                what: "green function argument",
                value: x,
                lo: 0.0,
                hi: self.max_arg(),
            });
        }
        (self.eval)(self.scale * x + self.shift)
    }

    /// Largest `x` whose mapped argument stays in the Airy range.
    pub fn max_arg(&self) -> f64 {
        (AIRY_MAX_ARG - self.shift) / self.scale
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(self.at(x)?.ai)
    }

    pub fn phi_prime(&self, x: f64) -> Result<f64> {
        Ok(self.scale * self.at(x)?.ai_prime)
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        let v = self.at(x)?;
        Ok(v.bi - self.c * v.ai)
    }

    pub fn psi_prime(&self, x: f64) -> Result<f64> {
        let v = self.at(x)?;
        // Bi'(u) - C Ai'(u) over the common denominator; exactly 0 at u = a
        Ok(
            self.scale * (v.bi_prime * self.ai_prime_a - self.bi_prime_a * v.ai_prime)
                / self.ai_prime_a,
        )
    }

    /// `psi' phi - psi phi'` at `x`.
    pub fn wronskian_at(&self, x: f64) -> Result<f64> {
        Ok(self.psi_prime(x)? * self.phi(x)? - self.psi(x)? * self.phi_prime(x)?)
    }

    /// Killing rate density `k(y) = 2 gamma y + 2 delta`.
    pub fn kill_rate(&self, y: f64) -> f64 {
        2.0 * self.params.gamma * y + 2.0 * self.params.delta
    }

    /// Density of the killing position for a start at `x`.
    pub fn kill_position_density(&self, x: f64, y: f64) -> Result<f64> {
        Ok(green(self, x, y)? * self.kill_rate(y))
    }

    /// Expected lifetime `2 int_0^inf G(x, y) dy`.
    pub fn mean_kill_time(&self, x: f64) -> Result<f64> {
        self.integrate_in_y(x, |_| 2.0)
    }

    /// `int_0^inf G(x, y) k(y) dy`, which equals 1.
    pub fn kill_position_mass(&self, x: f64) -> Result<f64> {
        let k = *self;
        self.integrate_in_y(x, move |y| k.kill_rate(y))
    }

    /// `int_0^inf y G(x, y) k(y) dy` by quadrature.
    pub fn mean_kill_position_quadrature(&self, x: f64) -> Result<f64> {
        let k = *self;
        self.integrate_in_y(x, move |y| y * k.kill_rate(y))
    }

    /// `int_lo^hi G(x, y) k(y) dy`, the probability that the killing
    /// position falls in `[lo, hi]`.
    pub fn kill_position_probability(&self, x: f64, lo: f64, hi: f64) -> Result<f64> {
        self.check(x)?;
        let hi = hi.min(self.max_arg());
        if hi <= lo {
            return Ok(0.0);
        }
        let g = *self;
        let f = move |y: f64| green(&g, x, y).map(|v| v * g.kill_rate(y)).unwrap_or(0.0);
        let v = if lo < x && x < hi {
            quad::integrate(f, lo, x, 1e-10) + quad::integrate(f, x, hi, 1e-10)
        } else {
            quad::integrate(f, lo, hi, 1e-10)
        };
        Ok(v)
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x >= 0.0 && x <= self.max_arg()) {
            return Err(RatchetError::OutOfRange {
                what: "green function argument",
                value: x,
                lo: 0.0,
                hi: self.max_arg(),
            });
        }
        Ok(())
    }

    fn integrate_in_y<F: Fn(f64) -> f64>(&self, x: f64, weight: F) -> Result<f64> {
        self.check(x)?;
        let g = *self;
        let f = |y: f64| {
            if y > g.max_arg() {
                0.0
            } else {
                green(&g, x, y).map(|v| v * weight(y)).unwrap_or(0.0)
            }
        };
        // G has a kink at y = x; integrate the two sides separately.
        let left = quad::integrate(f, 0.0, x, 1e-11);
        let step = 0.25 / self.scale;
        let right = quad::integrate_decaying(f, x, step, self.max_arg() - x, 1e-11);
        Ok(left + right)
    }
}

/// `G(x, y) = psi(min(x, y)) phi(max(x, y)) / w`.
pub fn green(ctx: &GreenContext, x: f64, y: f64) -> Result<f64> {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    Ok(ctx.psi(lo)? * ctx.phi(hi)? / ctx.w)
}

/// Expected pre-kill position `x + phi(x) psi(0) / w` of the killed process
/// started at `x`.
pub fn mean_increment(ctx: &GreenContext, x: f64) -> Result<f64> {
    Ok(x + ctx.phi(x)? * ctx.psi(0.0)? / ctx.w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(g: f64, d: f64) -> GreenContext {
        GreenContext::new(Params::at_origin(g, d).unwrap()).unwrap()
    }

    #[test]
    fn symmetric() {
        let c = ctx(0.5, 1.0);
        for &(x, y) in &[(0.0, 1.0), (0.3, 2.7), (4.0, 1.5)] {
            assert_eq!(green(&c, x, y).unwrap(), green(&c, y, x).unwrap());
        }
    }

    #[test]
    fn reflecting_condition_and_wronskian() {
        for &(g, d) in &[
            (0.5, 0.0),
            (0.5, 1.0),
            (1.0, 1.0),
            (2.0, 1.0),
            (0.25, 0.5),
            (0.5, 2.0),
        ] {
            let c = ctx(g, d);
            assert!(c.psi_prime(0.0).unwrap().abs() < 1e-8);
            for i in 0..=80 {
                let x = i as f64 * 0.1;
                if x > c.max_arg() {
                    break;
                }
                assert!((c.wronskian_at(x).unwrap() - c.w).abs() < 1e-8 * c.w.max(1.0));
            }
        }
    }

    #[test]
    fn shapes() {
        let c = ctx(0.5, 1.0);
        let mut prev_phi = f64::INFINITY;
        let mut prev_psi = 0.0;
        for i in 0..100 {
            let x = i as f64 * 0.08;
            let (p, q) = (c.phi(x).unwrap(), c.psi(x).unwrap());
            assert!(p > 0.0 && p < prev_phi);
            assert!(q > 0.0 && q >= prev_psi);
            prev_phi = p;
            prev_psi = q;
        }
    }

    #[test]
    fn kill_density_normalizes() {
        for &(g, d, x) in &[(0.5, 0.0, 0.0), (0.5, 1.0, 1.0), (1.0, 1.0, 2.0)] {
            let c = ctx(g, d);
            assert!((c.kill_position_mass(x).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_position_closed_form_matches_quadrature() {
        let c = ctx(1.0, 1.0);
        let q = c.mean_kill_position_quadrature(2.0).unwrap();
        assert!((q - mean_increment(&c, 2.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn mean_increment_bounds_and_monotone() {
        let c = ctx(0.5, 1.0);
        let base = mean_increment(&c, 0.0).unwrap();
        let lower = c.phi(0.0).unwrap() * c.psi(0.0).unwrap() / c.w;
        assert_eq!(base, lower);
        let mut prev = base;
        for i in 1..60 {
            let x = i as f64 * 0.1;
            let m = mean_increment(&c, x).unwrap();
            assert!(m > prev && m >= lower && m <= x + lower);
            prev = m;
        }
    }

    #[test]
    fn constant_hazard_lifetime() {
        // at delta >> gamma-scale the lifetime is close to 1/delta
        let c = ctx(0.5, 8.0);
        let t = c.mean_kill_time(0.0).unwrap();
        assert!(t < 1.0 / 8.0 && t > 0.8 / 8.0, "{t}");
    }
}
