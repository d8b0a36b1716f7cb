//! The speed ODE of Model II,
//!
//! ```text
//! A''(z) = -2 delta B(z) + 2 gamma z A(z),    B'(z) = -A'(z) - (gamma / delta) B(z),
//! ```
//!
//! with `A(0) = 1/2`, `B(0) = 0` and `A` decreasing to 0, solved by shooting
//! on `s = A'(0)`. Trajectories are integrated by RK4 with step-doubling
//! error control on a uniform output lattice. A trajectory is "steep" if `A`
//! crosses 0 and "shallow" if `A'` turns positive or `A` doubles. The
//! decaying solution is unstable against the growing mode, so once the
//! estimated amplification of a rounding-level perturbation reaches
//! `exp(SEGMENT_GROWTH)` the shot is repeated from the current point on the
//! slope alone, with `A` and `B` held fixed.

use serde::{Deserialize, Serialize};

use super::airy::{airy, AI_0, NEG_AIP_0};
use crate::error::{RatchetError, Result};
use crate::params::Params;

/// Output lattice step at `gamma = 1/2`; scales with `(2 gamma)^{-1/3}`.
const BASE_STEP: f64 = 5e-4;
/// Log-amplification of the growing mode allowed per re-shot segment.
const SEGMENT_GROWTH: f64 = 9.0;
/// `A` level (relative to `A(0)`) at which the solution is truncated.
const TAIL_LEVEL: f64 = 2e-11;
/// Above this value of `h gamma / delta` the `B` equation is replaced by its
/// quasi-steady reduction.
const QUASI_STEADY_STIFFNESS: f64 = 64.0;
/// Local relative error target of the step-doubling control.
const STEP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotClass {
    Steep,
    Shallow,
}

/// Grids of `A`, `A'` and `B` on `[0, z_max]` with the shot slope and speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub params: Params,
    pub z_grid: Vec<f64>,
    pub a: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub b: Vec<f64>,
    /// Shot value `A'(0)`.
    pub a_prime_0: f64,
    /// `-A'(0) / (2 A(0))`
    pub speed: f64,
    pub z_max: f64,
    /// Lattice step of `z_grid`.
    pub h: f64,
    /// Factor turning `2 gamma (A + B)` into a probability density.
    pub density_scale: f64,
    /// Number of re-shot segments (0 for the closed form).
    pub segments: usize,
    /// Final bracket width of the first shot.
    pub bracket_width: f64,
}

#[derive(Debug, Clone, Copy)]
struct State {
    a: f64,
    ap: f64,
    b: f64,
}

struct Flow {
    two_gamma: f64,
    two_delta: f64,
    relax: f64,
    h: f64,
    substeps: u32,
    /// `B` slaved to `-(delta/gamma) A' + (delta/gamma)^2 A''`, error `O((delta/gamma)^3)`
    quasi_steady: bool,
}

impl Flow {
    fn new(params: &Params, h: f64) -> Self {
        let relax = params.gamma / params.delta;
        let quasi_steady = h * relax > QUASI_STEADY_STIFFNESS;
        // start with a step inside the RK4 stability region of the B equation
        let substeps = if quasi_steady {
            1
        } else {
            (h * relax / 2.0).ceil().max(1.0) as u32
        };
        Flow {
            two_gamma: 2.0 * params.gamma,
            two_delta: 2.0 * params.delta,
            relax,
            h,
            substeps,
            quasi_steady,
        }
    }

    #[inline]
    fn slaved_b(&self, z: f64, a: f64, ap: f64) -> f64 {
        let eps = 1.0 / self.relax;
        -eps * ap + eps * eps * self.two_gamma * z * a
    }

    #[inline]
    fn rhs(&self, z: f64, s: State) -> State {
        if self.quasi_steady {
            let b = self.slaved_b(z, s.a, s.ap);
            return State {
                a: s.ap,
                ap: -self.two_delta * b + self.two_gamma * z * s.a,
                b: 0.0,
            };
        }
        State {
            a: s.ap,
            ap: -self.two_delta * s.b + self.two_gamma * z * s.a,
            b: -s.ap - self.relax * s.b,
        }
    }

    #[inline]
    fn rk4(&self, z: f64, s: State, h: f64) -> State {
        let k1 = self.rhs(z, s);
        let k2 = self.rhs(z + 0.5 * h, axpy(s, 0.5 * h, k1));
        let k3 = self.rhs(z + 0.5 * h, axpy(s, 0.5 * h, k2));
        let k4 = self.rhs(z + h, axpy(s, h, k3));
        State {
            a: s.a + h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
            ap: s.ap + h / 6.0 * (k1.ap + 2.0 * k2.ap + 2.0 * k3.ap + k4.ap),
            b: s.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
        }
    }

    /// Advances one lattice step, subdividing until the step-doubling error
    /// estimate meets `STEP_TOL`.
    fn advance(&mut self, z: f64, s: State) -> State {
        loop {
            let n = self.substeps;
            let hs = self.h / n as f64;
            let mut coarse = s;
            let mut fine = s;
            let mut err: f64 = 0.0;
            for i in 0..n {
                let zi = z + i as f64 * hs;
                coarse = self.rk4(zi, fine, hs);
                let mid = self.rk4(zi, fine, 0.5 * hs);
                let next = self.rk4(zi + 0.5 * hs, mid, 0.5 * hs);
                let scale = next.a.abs() + next.ap.abs() + next.b.abs() + 1e-300;
                let e = ((next.a - coarse.a).abs()
                    + (next.ap - coarse.ap).abs()
                    + (next.b - coarse.b).abs())
                    / (15.0 * scale);
                err = err.max(e);
                fine = next;
            }
            let _ = coarse;
            if err > STEP_TOL && n < 1 << 16 {
                self.substeps = n * 2;
                continue;
            }
            if err < STEP_TOL / 64.0 && n > 1 {
                self.substeps = n / 2;
            }
            if self.quasi_steady {
                fine.b = self.slaved_b(z + self.h, fine.a, fine.ap);
            }
            return fine;
        }
    }
}

#[inline]
fn axpy(s: State, h: f64, k: State) -> State {
    State {
        a: s.a + h * k.a,
        ap: s.ap + h * k.ap,
        b: s.b + h * k.b,
    }
}

/// Integrates from lattice index `k0` until the trajectory classifies.
fn classify_from(flow: &mut Flow, k0: usize, start: State, k_cap: usize) -> Option<ShotClass> {
    let mut s = start;
    for k in k0..k_cap {
        s = flow.advance(k as f64 * flow.h, s);
        if !(s.a.is_finite() && s.ap.is_finite()) {
            return None;
        }
        if s.a < 0.0 {
            return Some(ShotClass::Steep);
        }
        if s.ap > 0.0 || s.a > 2.0 * start.a {
            return Some(ShotClass::Shallow);
        }
    }
    None
}

fn lattice_step(params: &Params) -> f64 {
    BASE_STEP / (2.0 * params.gamma).cbrt()
}

/// Lattice index cap: far enough that the growing mode always shows. The
/// tail of `A` decays like `exp(-gamma z / delta)`, hence the second term.
fn lattice_cap(params: &Params, h: f64, z_max: f64) -> usize {
    let z_nat = 60.0 / (2.0 * params.gamma).cbrt() + 40.0 * params.delta / params.gamma;
    (z_max.min(z_nat) / h).ceil() as usize
}

struct Shot {
    lo: f64,
    hi: f64,
}

/// Bisects the slope at lattice index `k0` with `a`, `b` fixed, to adjacent
/// floating-point values.
fn shoot(
    flow: &mut Flow,
    k0: usize,
    a: f64,
    b: f64,
    mut lo: f64,
    mut hi: f64,
    k_cap: usize,
) -> Result<Shot> {
    let class = |flow: &mut Flow, s: f64| classify_from(flow, k0, State { a, ap: s, b }, k_cap);
    let mut widen = 0;
    loop {
        let cl = class(flow, lo);
        let ch = class(flow, hi);
        match (cl, ch) {
            (Some(ShotClass::Steep), Some(ShotClass::Shallow)) => break,
            _ if widen < 20 => {
                widen += 1;
                if cl != Some(ShotClass::Steep) {
                    lo -= (hi - lo).abs().max(lo.abs());
                }
                if ch != Some(ShotClass::Shallow) {
                    hi += (hi - lo).abs();
                }
            }
            _ => {
                return Err(RatchetError::BracketFailure {
                    lo,
                    hi,
                    class: format!("{cl:?}/{ch:?}"),
                })
            }
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match class(flow, mid) {
            Some(ShotClass::Steep) => lo = mid,
            Some(ShotClass::Shallow) => hi = mid,
            None => {
                return Err(RatchetError::BracketFailure {
                    lo,
                    hi,
                    class: "undecided".into(),
                })
            }
        }
    }
    Ok(Shot { lo, hi })
}

/// Solves the speed ODE. `z_max` caps the integration range; the returned
/// grid stops where `A` has decayed to about `1e-11`. Bisection always runs to
/// adjacent floating-point values, so `tol` only has to be a sane bound.
pub fn solve_speed_ode(params: &Params, z_max: f64, tol: f64) -> Result<OdeSolution> {
    params.validate()?;
    if !(tol.is_finite() && tol >= 1e-12) {
        return Err(RatchetError::InvalidParameter(format!(
            "tol must be >= 1e-12, got {tol}"
        )));
    }
    if !(z_max.is_finite() && z_max > 0.0) {
        return Err(RatchetError::InvalidParameter(format!(
            "z_max must be finite and > 0, got {z_max}"
        )));
    }
    if params.delta == 0.0 {
        return closed_form_delta0(params, z_max);
    }
    let h = lattice_step(params);
    let k_cap = lattice_cap(params, h, z_max);
    let mut flow = Flow::new(params, h);
    let scale = (2.0 * params.gamma).cbrt();

    let mut z_grid = vec![0.0];
    let mut av = vec![0.5];
    let mut apv = Vec::new();
    let mut bv = vec![0.0];

    let first = shoot(&mut flow, 0, 0.5, 0.0, -2.0 * scale, 0.0, k_cap)?;
    let bracket_width = first.hi - first.lo;
    if bracket_width > tol {
        return Err(RatchetError::Consistency(format!(
            "bracket width {bracket_width} above tolerance {tol}"
        )));
    }
    let a_prime_0 = first.hi;
    apv.push(a_prime_0);

    let mut k0 = 0usize;
    let mut seg_start = State {
        a: 0.5,
        ap: a_prime_0,
        b: 0.0,
    };
    let mut segments = 1;
    let tail = TAIL_LEVEL * 0.5;
    loop {
        // record the segment until the growing mode has gained SEGMENT_GROWTH
        // e-folds on the decaying one
        let mut s = seg_start;
        let mut k = k0;
        let mut growth = 0.0;
        while growth < SEGMENT_GROWTH && s.a > tail {
            if k + 1 >= k_cap {
                return Err(RatchetError::Consistency(format!(
                    "A did not decay below {tail:e} before z = {}",
                    k_cap as f64 * h
                )));
            }
            s = flow.advance(k as f64 * h, s);
            k += 1;
            if s.a <= 0.0 || s.ap >= 0.0 {
                return Err(RatchetError::Consistency(format!(
                    "shot trajectory left the decaying branch at z = {}",
                    k as f64 * h
                )));
            }
            let z = k as f64 * h;
            growth += h * ((2.0 * params.gamma * z).sqrt().max(scale) - s.ap / s.a);
            z_grid.push(z);
            av.push(s.a);
            apv.push(s.ap);
            bv.push(s.b);
        }
        if s.a <= tail {
            break;
        }
        // re-shoot the slope from here
        let guess = s.ap;
        let shot = shoot(
            &mut flow,
            k,
            s.a,
            s.b,
            guess - 0.5 * guess.abs(),
            guess + 0.5 * guess.abs(),
            k_cap,
        )?;
        let refined = shot.hi;
        *apv.last_mut().expect("non-empty") = refined;
        seg_start = State {
            a: s.a,
            ap: refined,
            b: s.b,
        };
        k0 = k;
        segments += 1;
    }

    let z_end = *z_grid.last().expect("non-empty");
    let mut sol = OdeSolution {
        params: *params,
        z_grid,
        a: av,
        a_prime: apv,
        b: bv,
        a_prime_0,
        speed: -a_prime_0 / (2.0 * 0.5),
        z_max: z_end,
        h,
        density_scale: 1.0,
        segments,
        bracket_width,
    };
    let mass = 2.0 * params.gamma * simpson(&sol.a, &sol.b, h);
    sol.density_scale = 1.0 / mass;
    Ok(sol)
}

/// `int (A + B)` over the grid by composite Simpson (trapezoid on a leftover interval).
fn simpson(a: &[f64], b: &[f64], h: f64) -> f64 {
    let f = |i: usize| a[i] + b[i];
    let n = a.len() - 1;
    let even = n - n % 2;
    let mut s = 0.0;
    let mut i = 0;
    while i < even {
        s += h / 3.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
        i += 2;
    }
    if even < n {
        s += 0.5 * h * (f(n - 1) + f(n));
    }
    s
}

fn closed_form_delta0(params: &Params, z_max: f64) -> Result<OdeSolution> {
    let h = lattice_step(params);
    let scale = (2.0 * params.gamma).cbrt();
    let norm = 1.0 / (2.0 * AI_0);
    let mut z_grid = Vec::new();
    let mut a = Vec::new();
    let mut ap = Vec::new();
    let mut k = 0usize;
    loop {
        let z = k as f64 * h;
        if z > z_max {
            return Err(RatchetError::Consistency(format!(
                "A did not decay below the tail level before z = {z_max}"
            )));
        }
        let v = airy(scale * z)?;
        z_grid.push(z);
        a.push(norm * v.ai);
        ap.push(norm * scale * v.ai_prime);
        if norm * v.ai < TAIL_LEVEL * 0.5 {
            break;
        }
        k += 1;
    }
    let b = vec![0.0; a.len()];
    let a_prime_0 = -norm * scale * NEG_AIP_0;
    // int_0^inf Ai = 1/3
    let mass = 2.0 * params.gamma * norm / (3.0 * scale);
    Ok(OdeSolution {
        params: *params,
        z_max: *z_grid.last().expect("non-empty"),
        z_grid,
        a,
        a_prime: ap,
        b,
        a_prime_0,
        speed: -a_prime_0,
        h,
        density_scale: 1.0 / mass,
        segments: 0,
        bracket_width: 0.0,
    })
}

/// `-Ai'(0) / (2 Ai(0)) (2 gamma)^{1/3}`, the speed at `delta = 0`.
pub fn speed_delta0(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(RatchetError::InvalidParameter(format!(
            "gamma must be finite and > 0, got {gamma}"
        )));
    }
    let v = airy(0.0)?;
    Ok(-v.ai_prime / (2.0 * v.ai) * (2.0 * gamma).cbrt())
}

/// Shooting classifier scan: classifies `n` slopes evenly spaced on
/// `[-2 (2 gamma)^{1/3}, 0]` and returns the classes in order.
pub fn shooting_scan(params: &Params, n: usize) -> Result<Vec<Option<ShotClass>>> {
    params.validate()?;
    if params.delta == 0.0 {
        return Err(RatchetError::InvalidParameter(
            "the scan applies to delta > 0".into(),
        ));
    }
    let h = lattice_step(params);
    let k_cap = lattice_cap(params, h, f64::INFINITY);
    let mut flow = Flow::new(params, h);
    let lo = -2.0 * (2.0 * params.gamma).cbrt();
    Ok((0..n)
        .map(|i| {
            let s = lo * (1.0 - i as f64 / (n - 1) as f64);
            classify_from(
                &mut flow,
                0,
                State {
                    a: 0.5,
                    ap: s,
                    b: 0.0,
                },
                k_cap,
            )
        })
        .collect())
}

/// Number of class changes along a scan (undecided entries count as changes).
pub fn class_changes(scan: &[Option<ShotClass>]) -> usize {
    scan.windows(2).filter(|w| w[0] != w[1]).count()
}

impl OdeSolution {
    fn locate(&self, z: f64) -> Result<(usize, f64)> {
        if !(z >= 0.0 && z <= self.z_max) {
            return Err(RatchetError::OutOfRange {
                what: "ode grid",
                value: z,
                lo: 0.0,
                hi: self.z_max,
            });
        }
        let i = ((z / self.h) as usize).min(self.z_grid.len() - 2);
        Ok((i, (z - self.z_grid[i]) / self.h))
    }

    fn hermite(&self, i: usize, u: f64, f: &[f64], df: (f64, f64)) -> f64 {
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        h00 * f[i] + h10 * self.h * df.0 + h01 * f[i + 1] + h11 * self.h * df.1
    }

    fn b_prime(&self, i: usize) -> f64 {
        if self.params.delta == 0.0 {
            0.0
        } else {
            -self.a_prime[i] - self.params.gamma / self.params.delta * self.b[i]
        }
    }

    pub fn a_at(&self, z: f64) -> Result<f64> {
        let (i, u) = self.locate(z)?;
        Ok(self.hermite(i, u, &self.a, (self.a_prime[i], self.a_prime[i + 1])))
    }

    pub fn b_at(&self, z: f64) -> Result<f64> {
        let (i, u) = self.locate(z)?;
        Ok(self.hermite(i, u, &self.b, (self.b_prime(i), self.b_prime(i + 1))))
    }

    /// Stationary `E[W] = -A'(0)` for the density-normalized `A`.
    pub fn stationary_mean_w(&self) -> f64 {
        -self.density_scale * self.a_prime_0
    }

    /// Stationary `E[eta] = 2 A(0)` for the density-normalized `A`.
    pub fn stationary_mean_eta(&self) -> f64 {
        2.0 * self.density_scale * self.a[0]
    }

    /// Largest residuals `|A'' + 2 delta B - 2 gamma z A|` and
    /// `|B' + A' + (gamma / delta) B|`, with `A''` and `B'` from 5-point
    /// central differences on the grid.
    pub fn residuals(&self) -> (f64, f64) {
        let (g, d) = (self.params.gamma, self.params.delta);
        let h = self.h;
        let (mut ra, mut rb) = (0.0f64, 0.0f64);
        for i in 2..self.a.len().saturating_sub(2) {
            let a = &self.a;
            let a2 = (-a[i - 2] + 16.0 * a[i - 1] - 30.0 * a[i] + 16.0 * a[i + 1] - a[i + 2])
                / (12.0 * h * h);
            let z = self.z_grid[i];
            ra = ra.max((a2 + 2.0 * d * self.b[i] - 2.0 * g * z * a[i]).abs());
            if d > 0.0 {
                let b = &self.b;
                let b1 = (b[i - 2] - 8.0 * b[i - 1] + 8.0 * b[i + 1] - b[i + 2]) / (12.0 * h);
                rb = rb.max((b1 + self.a_prime[i] + g / d * b[i]).abs());
            }
        }
        (ra, rb)
    }

    /// `A''(0)` by a one-sided sixth-point difference on the grid.
    pub fn a_second_derivative_at_zero(&self) -> f64 {
        let a = &self.a;
        (45.0 * a[0] - 154.0 * a[1] + 214.0 * a[2] - 156.0 * a[3] + 61.0 * a[4] - 10.0 * a[5])
            / (12.0 * self.h * self.h)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.a.windows(2).all(|w| w[1] < w[0])
    }
}

/// Stationary density of `Y`, `k * 2 gamma (A(z) + B(z))` with `k` the
/// normalizing factor, so that it integrates to 1.
pub fn density_fy(ode: &OdeSolution, params: &Params, z: f64) -> Result<f64> {
    Ok(ode.density_scale * density_fy_unnormalized(ode, params, z)?)
}

/// `2 gamma (A(z) + B(z))` for the solution with `A(0) = 1/2`; equals `gamma` at 0.
pub fn density_fy_unnormalized(ode: &OdeSolution, params: &Params, z: f64) -> Result<f64> {
    Ok(2.0 * params.gamma * (ode.a_at(z)? + ode.b_at(z)?))
}
