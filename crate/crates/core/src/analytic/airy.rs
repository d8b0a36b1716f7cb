//! Airy functions Ai, Bi and their derivatives on the real interval [-10, 40].
//!
//! Three evaluation regimes:
//!
//! * Maclaurin series for `-7 <= x <= 2` (all four functions) and for every
//!   `x >= 0` in the case of Bi, Bi' where the series has no cancellation.
//! * For `x > 2`, Ai and Ai' through the modified Bessel function of the
//!   second kind, `Ai(x) = sqrt(x/3) K_{1/3}(z) / pi` with `z = 2 x^{3/2} / 3`,
//!   where `K_nu` is evaluated from `K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt`
//!   by the trapezoid rule (geometrically convergent for this integrand).
//! * For `x < -7`, the oscillatory asymptotic expansions.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{RatchetError, Result};

pub const AIRY_MIN_ARG: f64 = -10.0;
pub const AIRY_MAX_ARG: f64 = 40.0;

/// Ai(0) = 3^{-2/3} / Gamma(2/3)
pub const AI_0: f64 = 0.355_028_053_887_817_2;
/// -Ai'(0) = 3^{-1/3} / Gamma(1/3)
pub const NEG_AIP_0: f64 = 0.258_819_403_792_806_8;
const SQRT_3: f64 = 1.732_050_807_568_877_2;

const SERIES_NEG_LIMIT: f64 = -7.0;
const SERIES_AI_POS_LIMIT: f64 = 2.0;

/// Values of Ai, Ai', Bi, Bi' at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryPair {
    /// `Ai Bi' - Ai' Bi`, identically `1/pi`.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Evaluates Ai, Ai', Bi, Bi' at `x` in `[-10, 40]`.
pub fn airy(x: f64) -> Result<AiryPair> {
    if !(AIRY_MIN_ARG..=AIRY_MAX_ARG).contains(&x) {
        return Err(RatchetError::OutOfRange {
            what: "airy argument",
            value: x,
            lo: AIRY_MIN_ARG,
            hi: AIRY_MAX_ARG,
        });
    }
    Ok(airy_unchecked(x))
}

pub(crate) fn airy_unchecked(x: f64) -> AiryPair {
    if x < SERIES_NEG_LIMIT {
        return asymptotic_negative(-x);
    }
    let s = maclaurin(x);
    let bi = SQRT_3 * (AI_0 * s.f + NEG_AIP_0 * s.g);
    let bi_prime = SQRT_3 * (AI_0 * s.fp + NEG_AIP_0 * s.gp);
    if x <= SERIES_AI_POS_LIMIT {
        AiryPair {
            ai: AI_0 * s.f - NEG_AIP_0 * s.g,
            ai_prime: AI_0 * s.fp - NEG_AIP_0 * s.gp,
            bi,
            bi_prime,
        }
    } else {
        let (ai, ai_prime) = ai_via_bessel_k(x);
        AiryPair {
            ai,
            ai_prime,
            bi,
            bi_prime,
        }
    }
}

struct Maclaurin {
    f: f64,
    fp: f64,
    g: f64,
    gp: f64,
}

/// The two canonical solutions `f = 1 + x^3/6 + ...` and `g = x + x^4/12 + ...`
/// of `u'' = x u`, with their derivatives.
fn maclaurin(x: f64) -> Maclaurin {
    let x3 = x * x * x;
    // f = sum a_k x^{3k},  a_k = a_{k-1} / (3k (3k-1))
    // g = sum b_k x^{3k+1}, b_k = b_{k-1} / (3k (3k+1))
    let mut f = 1.0;
    let mut fp = 0.0;
    let mut g = x;
    let mut gp = 1.0;
    let mut fterm = 1.0; // a_k x^{3k}
    let mut gterm = x; // b_k x^{3k+1}
    let mut k = 1usize;
    loop {
        let kk = 3.0 * k as f64;
        fterm *= x3 / (kk * (kk - 1.0));
        gterm *= x3 / (kk * (kk + 1.0));
        f += fterm;
        g += gterm;
        // d/dx of a_k x^{3k} is 3k a_k x^{3k-1}; of b_k x^{3k+1} is (3k+1) b_k x^{3k}
        let fpterm = if x == 0.0 { 0.0 } else { kk * fterm / x };
        let gpterm = (kk + 1.0) * gterm / x.abs().max(f64::MIN_POSITIVE) * x.signum();
        let gpterm = if x == 0.0 { 0.0 } else { gpterm };
        fp += fpterm;
        gp += gpterm;
        let small = |t: f64, s: f64| t.abs() <= 1e-17 * s.abs().max(1e-300);
        if k > 3 && small(fterm, f) && small(gterm, g) && small(fpterm, fp) && small(gpterm, gp) {
            break;
        }
        if fterm == 0.0 && gterm == 0.0 {
            break;
        }
        k += 1;
        if k > 2000 {
            break;
        }
    }
    Maclaurin { f, fp, g, gp }
}

/// `exp(z) K_nu(z)` for `nu` in {1/3, 2/3} by the trapezoid rule.
fn scaled_bessel_k(nu: f64, z: f64) -> f64 {
    // Integrand exp(-z (cosh t - 1)) cosh(nu t); near its peak it behaves like
    // exp(-z t^2 / 2), which fixes the step for large z.
    let h = (0.6 / z.sqrt()).min(0.2);
    let t_max = (1.0 + 46.0 / z).acosh();
    let n = (t_max / h).ceil() as usize;
    let mut sum = 0.5;
    for j in 1..=n {
        let t = j as f64 * h;
        sum += (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    }
    h * sum
}

fn ai_via_bessel_k(x: f64) -> (f64, f64) {
    let sx = x.sqrt();
    let zeta = 2.0 / 3.0 * x * sx;
    let decay = (-zeta).exp();
    let k13 = scaled_bessel_k(1.0 / 3.0, zeta);
    let k23 = scaled_bessel_k(2.0 / 3.0, zeta);
    let ai = (x / 3.0).sqrt() / PI * k13 * decay;
    let ai_prime = -x / (PI * SQRT_3) * k23 * decay;
    (ai, ai_prime)
}

/// Asymptotic expansions for `Ai(-z)`, `Bi(-z)` and derivatives, `z > 7`.
fn asymptotic_negative(z: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    // u_k = (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k) u_{k-1},  v_k = -(6k+1)/(6k-1) u_k
    let mut u_even = 0.0; // sum (-1)^k u_{2k} / zeta^{2k}
    let mut u_odd = 0.0; // sum (-1)^k u_{2k+1} / zeta^{2k+1}
    let mut v_even = 0.0;
    let mut v_odd = 0.0;
    let mut u = 1.0;
    let mut zpow = 1.0;
    let mut prev_mag = f64::INFINITY;
    for k in 0..60usize {
        if k > 0 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            zpow /= zeta;
        }
        let v = if k == 0 {
            1.0
        } else {
            let kf = k as f64;
            -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u
        };
        let ut = u * zpow;
        let vt = v * zpow;
        let mag = ut.abs().max(vt.abs());
        if mag > prev_mag {
            // the expansion is divergent: stop at the smallest term
            break;
        }
        prev_mag = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            u_even += sign * ut;
            v_even += sign * vt;
        } else {
            u_odd += sign * ut;
            v_odd += sign * vt;
        }
        if mag < 1e-17 {
            break;
        }
    }
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let pre = 1.0 / (PI.sqrt() * z.powf(0.25));
    let pre_d = z.powf(0.25) / PI.sqrt();
    AiryPair {
        ai: pre * (c * u_even + s * u_odd),
        ai_prime: pre_d * (s * v_even - c * v_odd),
        bi: pre * (-s * u_even + c * u_odd),
        bi_prime: pre_d * (c * v_even + s * v_odd),
    }
}
