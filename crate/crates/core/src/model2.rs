//! Model II: Brownian motion reflected at a boundary that jumps up to a
//! uniform point of `(R, X)` at rate `gamma (X - R)` and down by an
//! `Exp(gamma / delta)` distance at rate `delta`.
//!
//! Two constructions are provided: the jump recursion (reflected gap advanced
//! by `|v + dB|`) and the active-point construction driven by one unreflected
//! Brownian motion `B`, with `X = R + |B - S|`. The latter also drives the
//! coupled pair used to demonstrate uniqueness of the stationary jump chain.

use serde::{Deserialize, Serialize};

use crate::error::{RatchetError, Result};
use crate::params::{Params, SimGrid};
use crate::path::{JumpCause, PathSample, Recorder};
use crate::rng::{rng_stream, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// One step of the jump-time Markov chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    /// `X - R` right after the jump.
    pub y: f64,
    /// Boundary displacement.
    pub w: f64,
    /// Time since the previous jump.
    pub eta: f64,
    pub direction: Direction,
    /// `X - R` right before the jump.
    pub gap_before: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model2Run {
    pub path: PathSample,
    pub records: Vec<JumpRecord>,
}

/// Outcome of one boundary event given the gap `v` at the event.
#[inline]
fn boundary_event(stream: &mut RngStream, gamma: f64, delta: f64, v: f64) -> (Direction, f64) {
    let up = gamma * v;
    if stream.uniform() * (up + delta) < up {
        (Direction::Up, v * stream.uniform())
    } else {
        (Direction::Down, -stream.exponential(gamma / delta))
    }
}

/// Model II by the jump recursion, stream `(grid.seed, 0)`.
pub fn simulate_model2(params: &Params, grid: &SimGrid, record: bool) -> Result<Model2Run> {
    simulate_model2_with(&mut rng_stream(grid.seed, 0), params, grid, record)
}

pub fn simulate_model2_with(
    stream: &mut RngStream,
    params: &Params,
    grid: &SimGrid,
    record: bool,
) -> Result<Model2Run> {
    params.validate()?;
    grid.validate()?;
    let (gamma, delta, dt) = (params.gamma, params.delta, grid.dt);
    let sdt = dt.sqrt();
    let mut r = 0.0;
    let mut v = params.x0;
    let mut rate = gamma * v + delta;
    let mut hazard = 0.0;
    let mut level = stream.exp1();
    let mut last_jump = 0.0;
    let mut rec = Recorder::new(record, v, r);
    let mut records = Vec::new();
    let steps = grid.steps();
    for n in 1..=steps {
        let t = n as f64 * dt;
        v = (v + sdt * stream.standard_normal()).abs();
        let next_rate = gamma * v + delta;
        hazard += 0.5 * dt * (rate + next_rate);
        rate = next_rate;
        if hazard >= level {
            hazard = 0.0;
            level = stream.exp1();
            let x = r + v;
            let (direction, w) = boundary_event(stream, gamma, delta, v);
            if direction == Direction::Down && delta == 0.0 {
                return Err(RatchetError::Consistency("down-jump with delta = 0".into()));
            }
            let old = r;
            r += w;
            let gap_before = v;
            v = x - r;
            rate = gamma * v + delta;
            let cause = match direction {
                Direction::Up => JumpCause::NewBinding,
                Direction::Down => JumpCause::Dissociation,
            };
            rec.jump(t, old, r, x, cause);
            records.push(JumpRecord {
                y: v,
                w,
                eta: t - last_jump,
                direction,
                gap_before,
            });
            last_jump = t;
        }
        rec.step(t, r + v, r, n == steps);
    }
    Ok(Model2Run {
        path: rec.path,
        records,
    })
}

/// Active point, boundary, driving Brownian value and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivePointState {
    pub s: f64,
    pub r: f64,
    pub b: f64,
    pub t: f64,
}

impl ActivePointState {
    pub fn x(&self) -> f64 {
        self.r + (self.b - self.s).abs()
    }
}

/// Applies an up-jump of the active point by fraction `u` towards `b`.
#[inline]
fn up_towards(st: &mut ActivePointState, u: f64) {
    let d = st.b - st.s;
    st.s += u * d;
    st.r += u * d.abs();
}

/// Moves the active point `e` away from `b`.
#[inline]
fn down_away(st: &mut ActivePointState, e: f64) {
    if st.s >= st.b {
        st.s += e;
    } else {
        st.s -= e;
    }
    st.r -= e;
}

/// Model II by the active-point construction, stream `(grid.seed, 0)`.
pub fn simulate_model2_activepoint(
    params: &Params,
    grid: &SimGrid,
    record: bool,
) -> Result<Model2Run> {
    simulate_model2_activepoint_with(&mut rng_stream(grid.seed, 0), params, grid, record)
}

pub fn simulate_model2_activepoint_with(
    stream: &mut RngStream,
    params: &Params,
    grid: &SimGrid,
    record: bool,
) -> Result<Model2Run> {
    params.validate()?;
    grid.validate()?;
    if params.delta <= 0.0 {
        return Err(RatchetError::InvalidParameter(
            "the active-point construction needs delta > 0".into(),
        ));
    }
    let (gamma, delta, dt) = (params.gamma, params.delta, grid.dt);
    let sdt = dt.sqrt();
    let mut st = ActivePointState {
        s: params.x0,
        r: 0.0,
        b: 0.0,
        t: 0.0,
    };
    let mut rate = gamma * (st.b - st.s).abs() + delta;
    let mut hazard = 0.0;
    let mut level = stream.exp1();
    let mut last_jump = 0.0;
    let mut rec = Recorder::new(record, st.x(), st.r);
    let mut records = Vec::new();
    let steps = grid.steps();
    for n in 1..=steps {
        st.t = n as f64 * dt;
        st.b += sdt * stream.standard_normal();
        let gap = (st.b - st.s).abs();
        let next_rate = gamma * gap + delta;
        hazard += 0.5 * dt * (rate + next_rate);
        rate = next_rate;
        if hazard >= level {
            hazard = 0.0;
            level = stream.exp1();
            let x = st.x();
            let old = st.r;
            let up = gamma * gap;
            let (direction, cause) = if stream.uniform() * (up + delta) < up {
                up_towards(&mut st, stream.uniform());
                (Direction::Up, JumpCause::NewBinding)
            } else {
                down_away(&mut st, stream.exponential(gamma / delta));
                (Direction::Down, JumpCause::Dissociation)
            };
            rate = gamma * (st.b - st.s).abs() + delta;
            rec.jump(st.t, old, st.r, x, cause);
            records.push(JumpRecord {
                y: st.x() - st.r,
                w: st.r - old,
                eta: st.t - last_jump,
                direction,
                gap_before: gap,
            });
            last_jump = st.t;
        }
        rec.step(st.t, st.x(), st.r, n == steps);
    }
    Ok(Model2Run {
        path: rec.path,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledRunResult {
    /// First time the two active points coincide; `None` if not within the horizon.
    pub coupling_time: Option<f64>,
    pub first: PathSample,
    pub second: PathSample,
}

/// Two active-point ratchets started at `x1`, `x2` on the same Brownian
/// motion with maximally coupled boundary events. Stops at coupling.
pub fn simulate_coupled_pair(
    params: &Params,
    x1: f64,
    x2: f64,
    grid: &SimGrid,
) -> Result<CoupledRunResult> {
    simulate_coupled_pair_with(&mut rng_stream(grid.seed, 0), params, x1, x2, grid, false)
}

/// As [`simulate_coupled_pair`]; with `follow` the pair keeps running to the
/// horizon after coupling, sharing every event.
pub fn simulate_coupled_pair_with(
    stream: &mut RngStream,
    params: &Params,
    x1: f64,
    x2: f64,
    grid: &SimGrid,
    follow: bool,
) -> Result<CoupledRunResult> {
    params.validate()?;
    grid.validate()?;
    if params.delta <= 0.0 {
        return Err(RatchetError::InvalidParameter(
            "the coupled pair needs delta > 0".into(),
        ));
    }
    for x in [x1, x2] {
        if !(x.is_finite() && x >= 0.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "start must be finite and >= 0, got {x}"
            )));
        }
    }
    let (gamma, delta, dt) = (params.gamma, params.delta, grid.dt);
    let sdt = dt.sqrt();
    let mut a = ActivePointState {
        s: x1,
        r: 0.0,
        b: 0.0,
        t: 0.0,
    };
    let mut c = ActivePointState {
        s: x2,
        r: 0.0,
        b: 0.0,
        t: 0.0,
    };
    let mut rec_a = Recorder::new(false, a.x(), a.r);
    let mut rec_c = Recorder::new(false, c.x(), c.r);
    let mut coupling_time = (a.s == c.s).then_some(0.0);
    if coupling_time.is_some() && !follow {
        return Ok(CoupledRunResult {
            coupling_time,
            first: rec_a.path,
            second: rec_c.path,
        });
    }

    let total_rate = |a: &ActivePointState, c: &ActivePointState| {
        let (da, dc) = (a.b - a.s, c.b - c.s);
        if a.s == c.s {
            gamma * da.abs() + delta
        } else if (da >= 0.0) == (dc >= 0.0) {
            gamma * da.abs().max(dc.abs()) + 2.0 * delta
        } else {
            gamma * (da.abs() + dc.abs()) + 2.0 * delta
        }
    };
    let mut rate = total_rate(&a, &c);
    let mut hazard = 0.0;
    let mut level = stream.exp1();
    let steps = grid.steps();
    for n in 1..=steps {
        let t = n as f64 * dt;
        let db = sdt * stream.standard_normal();
        a.b += db;
        c.b += db;
        a.t = t;
        c.t = t;
        let next_rate = total_rate(&a, &c);
        hazard += 0.5 * dt * (rate + next_rate);
        rate = next_rate;
        if hazard >= level {
            hazard = 0.0;
            level = stream.exp1();
            let (xa, xc) = (a.x(), c.x());
            let (ra, rc) = (a.r, c.r);
            coupled_event(stream, gamma, delta, &mut a, &mut c);
            if a.r != ra {
                rec_a.jump(t, ra, a.r, xa, cause_of(ra, a.r));
            }
            if c.r != rc {
                rec_c.jump(t, rc, c.r, xc, cause_of(rc, c.r));
            }
            rate = total_rate(&a, &c);
            if coupling_time.is_none() && a.s == c.s {
                coupling_time = Some(t);
                if !follow {
                    rec_a.step(t, a.x(), a.r, true);
                    rec_c.step(t, c.x(), c.r, true);
                    break;
                }
            }
        }
        rec_a.step(t, a.x(), a.r, n == steps);
        rec_c.step(t, c.x(), c.r, n == steps);
    }
    Ok(CoupledRunResult {
        coupling_time,
        first: rec_a.path,
        second: rec_c.path,
    })
}

fn cause_of(old: f64, new: f64) -> JumpCause {
    if new > old {
        JumpCause::NewBinding
    } else {
        JumpCause::Dissociation
    }
}

/// Resolves one event of the coupled pair, choosing the channel in
/// proportion to the channel rates.
fn coupled_event(
    stream: &mut RngStream,
    gamma: f64,
    delta: f64,
    a: &mut ActivePointState,
    c: &mut ActivePointState,
) {
    let (da, dc) = (a.b - a.s, c.b - c.s);
    if a.s == c.s {
        // coupled: one shared set of channels
        let up = gamma * da.abs();
        if stream.uniform() * (up + delta) < up {
            let u = stream.uniform();
            up_towards(a, u);
            up_towards(c, u);
        } else {
            let e = stream.exponential(gamma / delta);
            down_away(a, e);
            down_away(c, e);
        }
        return;
    }
    let pick = stream.uniform();
    if (da >= 0.0) == (dc >= 0.0) {
        let a_near = da.abs() <= dc.abs();
        let (near, far) = if a_near {
            (da.abs(), dc.abs())
        } else {
            (dc.abs(), da.abs())
        };
        let rates = [gamma * near, gamma * (far - near), delta, delta];
        let total: f64 = rates.iter().sum();
        let mut u = pick * total;
        if u < rates[0] {
            // both land on the same uniform point between the nearer active point and B
            let target = {
                let n = if a_near { &*a } else { &*c };
                n.s + stream.uniform() * (n.b - n.s)
            };
            for st in [&mut *a, &mut *c] {
                st.r += (target - st.s).abs();
                st.s = target;
            }
            return;
        }
        u -= rates[0];
        if u < rates[1] {
            // only the far one moves, landing between its point and the near one
            let (f, n_s) = if a_near {
                (&mut *c, a.s)
            } else {
                (&mut *a, c.s)
            };
            let target = f.s + stream.uniform() * (n_s - f.s);
            f.r += (target - f.s).abs();
            f.s = target;
            return;
        }
        u -= rates[1];
        let e = stream.exponential(gamma / delta);
        if u < rates[2] {
            down_away(a, e);
        } else {
            down_away(c, e);
        }
    } else {
        let rates = [gamma * da.abs(), gamma * dc.abs(), delta, delta];
        let total: f64 = rates.iter().sum();
        let mut u = pick * total;
        if u < rates[0] {
            up_towards(a, stream.uniform());
            return;
        }
        u -= rates[0];
        if u < rates[1] {
            up_towards(c, stream.uniform());
            return;
        }
        u -= rates[1];
        let e = stream.exponential(gamma / delta);
        if u < rates[2] {
            down_away(a, e);
        } else {
            down_away(c, e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: f64, seed: u64) -> SimGrid {
        SimGrid::new(1e-3, h, seed).unwrap()
    }

    #[test]
    fn records_consistent() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let run = simulate_model2(&p, &grid(200.0, 1), true).unwrap();
        assert!(run.path.respects_boundary());
        assert_eq!(run.records.len(), run.path.jumps.len());
        for (rec, j) in run.records.iter().zip(&run.path.jumps) {
            assert!(rec.eta > 0.0 && rec.y >= 0.0);
            assert_eq!(rec.direction == Direction::Up, rec.w > 0.0);
            assert!((j.new - j.old - rec.w).abs() < 1e-12);
        }
    }

    #[test]
    fn no_down_jumps_without_delta() {
        let p = Params::at_origin(0.5, 0.0).unwrap();
        let run = simulate_model2(&p, &grid(200.0, 2), false).unwrap();
        assert!(run.records.iter().all(|r| r.direction == Direction::Up));
    }

    #[test]
    fn active_point_continuous_at_jumps() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let run = simulate_model2_activepoint(&p, &grid(200.0, 3), true).unwrap();
        assert!(run.path.respects_boundary());
        // X after the jump equals X before it
        let mut k = 0;
        for j in &run.path.jumps {
            while run.path.times[k] < j.time {
                k += 1;
            }
            assert!((run.path.x[k] - j.x).abs() < 1e-9, "jump at {}", j.time);
        }
    }

    #[test]
    fn equal_starts_couple_at_once() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let r = simulate_coupled_pair(&p, 2.0, 2.0, &grid(10.0, 1)).unwrap();
        assert_eq!(r.coupling_time, Some(0.0));
    }

    #[test]
    fn identical_jumps_after_coupling() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let g = grid(300.0, 5);
        let r = simulate_coupled_pair_with(&mut rng_stream(5, 0), &p, 0.0, 5.0, &g, true).unwrap();
        let tc = r.coupling_time.expect("couples");
        let after = |ps: &PathSample| {
            ps.jumps
                .iter()
                .filter(|j| j.time > tc)
                .map(|j| (j.time, j.new - j.old))
                .collect::<Vec<_>>()
        };
        let (ja, jc) = (after(&r.first), after(&r.second));
        assert!(!ja.is_empty());
        assert_eq!(ja.len(), jc.len());
        for (u, v) in ja.iter().zip(&jc) {
            assert_eq!(u.0, v.0);
            assert!((u.1 - v.1).abs() < 1e-9);
        }
    }
}
