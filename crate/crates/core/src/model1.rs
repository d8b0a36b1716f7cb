//! Model I: Brownian motion reflected at the highest bound molecule, and the
//! thinned variant whose fallback boundaries are restricted to molecules bound
//! after the last renewal time.
//!
//! The protein is advanced with the exact Skorokhod map on each grid step:
//! with Brownian increment `b` and the minimum `m` of the Brownian bridge over
//! the step, `X <- max(X + b, R + b - m)`, and the step contains a hit of the
//! boundary iff `R - m >= X`. Both facts are exact in law, and the map is
//! monotone in `(X, R)`, which gives pathwise domination of the thinned
//! process under shared noise.
//!
//! Molecules are materialized on `[cov, X]` only. In equilibrium-window mode
//! `cov` trails the boundary by one to two window widths; when a boundary has
//! to fall below `cov`, the region just below is filled with the Poisson
//! points that are bound and alive at that instant, one window chunk at a time.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{RatchetError, Result};
use crate::params::{Params, SimGrid};
use crate::path::{JumpCause, PathSample, Recorder};
use crate::rng::{rng_stream, RngStream};

pub const DEFAULT_WINDOW_FACTOR: f64 = 30.0;
pub const MIN_WINDOW_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationMode {
    /// Permanent boundary at 0 and bindings on `[0, X]`.
    FloorAtBoundary0,
    /// Bindings on a window reaching `window_factor * delta / gamma` below `R`.
    EquilibriumWindow,
}

/// What to do when a boundary must fall below the materialized window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum UnderflowAction {
    /// Extend the window downwards with freshly sampled molecules.
    #[default]
    Extend,
    /// Report [`RatchetError::WindowUnderflow`].
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    pub window_factor: f64,
    #[serde(default)]
    pub on_underflow: UnderflowAction,
}

impl TruncationPolicy {
    pub fn floor() -> Self {
        TruncationPolicy {
            mode: TruncationMode::FloorAtBoundary0,
            window_factor: DEFAULT_WINDOW_FACTOR,
            on_underflow: UnderflowAction::Extend,
        }
    }

    pub fn window(window_factor: f64) -> Result<Self> {
        let p = TruncationPolicy {
            mode: TruncationMode::EquilibriumWindow,
            window_factor,
            on_underflow: UnderflowAction::Extend,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn default_window() -> Self {
        TruncationPolicy {
            mode: TruncationMode::EquilibriumWindow,
            window_factor: DEFAULT_WINDOW_FACTOR,
            on_underflow: UnderflowAction::Extend,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_factor.is_finite() && self.window_factor >= MIN_WINDOW_FACTOR) {
            return Err(RatchetError::InvalidParameter(format!(
                "window_factor must be >= {MIN_WINDOW_FACTOR}, got {}",
                self.window_factor
            )));
        }
        Ok(())
    }
}

/// A renewal time of the thinned process and the protein position there
/// (which equals the boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Renewal {
    pub time: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Model1Stats {
    pub bindings: u64,
    pub dissociations: u64,
    /// Downward window extensions.
    pub window_fills: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model1Run {
    pub path: PathSample,
    pub stats: Model1Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinnedRun {
    pub path: PathSample,
    pub renewals: Vec<Renewal>,
    pub stats: Model1Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledModel1Run {
    pub full: PathSample,
    pub thinned: ThinnedRun,
    /// Grid times at which `X^ > X` or `R^ > R`.
    pub domination_violations: u64,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

type Mol = (Key, u64);

struct Proc {
    thinned: bool,
    x: f64,
    r: f64,
    active: Mol,
    set: BTreeSet<Mol>,
    deaths: BinaryHeap<Reverse<(Key, Mol)>>,
    eligible_from: f64,
    awaiting_hit: bool,
    renewals: Vec<Renewal>,
    rec: Recorder,
}

impl Proc {
    fn insert(&mut self, m: Mol, death: Option<f64>) {
        self.set.insert(m);
        if let Some(d) = death {
            self.deaths.push(Reverse((Key(d), m)));
        }
    }
}

const FLOOR_ID: u64 = 0;
// skip the bridge minimum when a hit within the step has probability < e^-40
const BRIDGE_SKIP: f64 = 40.0;

struct Engine<'a> {
    gamma: f64,
    delta: f64,
    dt: f64,
    floor: bool,
    width: f64,
    on_underflow: UnderflowAction,
    cov: f64,
    next_id: u64,
    bind_cum: f64,
    bind_level: f64,
    stats: Model1Stats,
    stream: &'a mut RngStream,
}

impl<'a> Engine<'a> {
    fn new(
        stream: &'a mut RngStream,
        params: &Params,
        grid: &SimGrid,
        policy: &TruncationPolicy,
    ) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        policy.validate()?;
        let floor = policy.mode == TruncationMode::FloorAtBoundary0;
        let width = policy.window_factor * params.delta / params.gamma;
        let bind_level = stream.exp1();
        Ok(Engine {
            gamma: params.gamma,
            delta: params.delta,
            dt: grid.dt,
            floor,
            width,
            on_underflow: policy.on_underflow,
            cov: if floor { 0.0 } else { -width },
            next_id: FLOOR_ID + 1,
            bind_cum: 0.0,
            bind_level,
            stats: Model1Stats::default(),
            stream,
        })
    }

    fn procs(&mut self, x0: f64, thinned: &[bool], record: bool) -> Vec<Proc> {
        // the molecule at the origin: permanent in floor mode, otherwise
        // an ordinary molecule shared by every process
        let death = if self.floor || self.delta == 0.0 {
            None
        } else {
            Some(self.stream.exponential(self.delta))
        };
        let m0 = (Key(0.0), FLOOR_ID);
        thinned
            .iter()
            .map(|&th| {
                let mut p = Proc {
                    thinned: th,
                    x: x0,
                    r: 0.0,
                    active: m0,
                    set: BTreeSet::new(),
                    deaths: BinaryHeap::new(),
                    eligible_from: 0.0,
                    awaiting_hit: th,
                    renewals: Vec::new(),
                    rec: Recorder::new(record, x0, 0.0),
                };
                p.insert(m0, death);
                if th && x0 == 0.0 {
                    p.renewals.push(Renewal { time: 0.0, x: 0.0 });
                    p.awaiting_hit = false;
                }
                p
            })
            .collect()
    }

    fn step(&mut self, procs: &mut [Proc], t: f64) -> Result<()> {
        let dt = self.dt;
        let b = dt.sqrt() * self.stream.standard_normal();
        let need_m = procs.iter().any(|p| {
            let v = p.x - p.r;
            v + b < 0.0 || 2.0 * v * (v + b) < BRIDGE_SKIP * dt
        });
        let m = if need_m {
            self.stream.bridge_minimum(b, dt)
        } else {
            b.min(0.0)
        };
        for p in procs.iter_mut() {
            let hit = p.r - m >= p.x;
            p.x = (p.x + b).max(p.r + b - m);
            if p.thinned && p.awaiting_hit && hit {
                renew(p, t, self.floor);
            }
        }
        if self.delta > 0.0 {
            for i in 0..procs.len() {
                self.dissociations(procs, i, t)?;
            }
        }
        self.bindings(procs, t);
        if !self.floor && self.delta > 0.0 {
            self.raise_cov(procs);
        }
        Ok(())
    }

    fn dissociations(&mut self, procs: &mut [Proc], i: usize, t: f64) -> Result<()> {
        loop {
            let p = &mut procs[i];
            match p.deaths.peek() {
                Some(Reverse((d, _))) if d.0 <= t => {}
                _ => return Ok(()),
            }
            let Reverse((_, mol)) = p.deaths.pop().expect("peeked");
            if !p.set.remove(&mol) {
                continue;
            }
            self.stats.dissociations += 1;
            if mol != p.active {
                continue;
            }
            while procs[i].set.is_empty() {
                self.fill(procs, t)?;
            }
            let p = &mut procs[i];
            let &next = p.set.last().expect("non-empty");
            let old = p.r;
            p.active = next;
            p.r = next.0 .0;
            p.rec.jump(t, old, p.r, p.x, JumpCause::Dissociation);
            if p.thinned {
                p.awaiting_hit = true;
            }
        }
    }

    /// Materializes one window chunk below `cov` with the molecules bound
    /// there and still alive at `t`.
    fn fill(&mut self, procs: &mut [Proc], t: f64) -> Result<()> {
        if self.on_underflow == UnderflowAction::Fail || self.floor {
            return Err(RatchetError::WindowUnderflow { time: t });
        }
        // A renewal is stamped at the end of its grid step, so a death in the
        // same step may precede it; eligibility gets one step of slack, which
        // also keeps the eligible density positive.
        let slack = self.dt;
        let t_ref = procs
            .iter()
            .map(|p| p.eligible_from - slack)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let span = t - t_ref;
        let alive = -(-self.delta * span).exp_m1();
        let density = self.gamma / self.delta * alive;
        let chunk = self.width;
        let lo = self.cov - chunk;
        let mean = density * chunk;
        let count = Poisson::new(mean)
            .map_err(|e| RatchetError::Consistency(e.to_string()))?
            .sample(self.stream.inner_mut()) as u64;
        for _ in 0..count {
            let r = lo + chunk * self.stream.uniform();
            // age of a molecule alive at t, bound in [t_ref, t]
            let age = -(-alive * self.stream.uniform()).ln_1p() / self.delta;
            let tau = t - age;
            let death = t + self.stream.exponential(self.delta);
            let mol = (Key(r), self.next_id);
            self.next_id += 1;
            for p in procs.iter_mut() {
                if tau >= p.eligible_from - slack {
                    p.insert(mol, Some(death));
                }
            }
        }
        self.cov = lo;
        self.stats.window_fills += 1;
        Ok(())
    }

    fn bindings(&mut self, procs: &mut [Proc], t: f64) {
        let hi = procs.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let lo = if self.delta == 0.0 {
            procs.iter().map(|p| p.r).fold(f64::INFINITY, f64::min)
        } else {
            self.cov
        };
        let len = (hi - lo).max(0.0);
        self.bind_cum += self.gamma * len * self.dt;
        while self.bind_cum >= self.bind_level {
            self.bind_cum -= self.bind_level;
            self.bind_level = self.stream.exp1();
            let r = lo + len * self.stream.uniform();
            let death = if self.delta > 0.0 {
                Some(t + self.stream.exponential(self.delta))
            } else {
                None
            };
            let mol = (Key(r), self.next_id);
            self.next_id += 1;
            self.stats.bindings += 1;
            for p in procs.iter_mut() {
                if r > p.x {
                    continue;
                }
                if r > p.r {
                    let old = p.r;
                    p.insert(mol, death);
                    p.active = mol;
                    p.r = r;
                    p.rec.jump(t, old, r, p.x, JumpCause::NewBinding);
                    if p.thinned {
                        p.awaiting_hit = true;
                    }
                } else if death.is_some() {
                    p.insert(mol, death);
                }
            }
        }
    }

    fn raise_cov(&mut self, procs: &mut [Proc]) {
        let low_r = procs.iter().map(|p| p.r).fold(f64::INFINITY, f64::min);
        let target = low_r - self.width;
        if target - self.cov > self.width {
            self.cov = target;
            let cut = (Key(target), 0);
            for p in procs.iter_mut() {
                p.set = p.set.split_off(&cut);
            }
        }
    }
}

fn renew(p: &mut Proc, t: f64, floor: bool) {
    p.renewals.push(Renewal { time: t, x: p.r });
    p.eligible_from = t;
    p.awaiting_hit = false;
    let active = p.active;
    p.set.retain(|m| *m == active || (floor && m.1 == FLOOR_ID));
}

fn run(
    stream: &mut RngStream,
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    thinned: &[bool],
    record: bool,
) -> Result<(Vec<Proc>, Model1Stats, u64, u64)> {
    let mut eng = Engine::new(stream, params, grid, policy)?;
    let mut procs = eng.procs(params.x0, thinned, record);
    let steps = grid.steps();
    let mut violations = 0;
    for n in 1..=steps {
        let t = n as f64 * grid.dt;
        eng.step(&mut procs, t)?;
        let last = n == steps;
        for p in procs.iter_mut() {
            p.rec.step(t, p.x, p.r, last);
        }
        if procs.len() == 2 && (procs[1].x > procs[0].x || procs[1].r > procs[0].r) {
            violations += 1;
        }
    }
    Ok((procs, eng.stats, violations, steps))
}

/// Model I on `[0, grid.horizon]` with the stream `(grid.seed, 0)`.
pub fn simulate_model1(
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    record: bool,
) -> Result<Model1Run> {
    simulate_model1_with(&mut rng_stream(grid.seed, 0), params, grid, policy, record)
}

pub fn simulate_model1_with(
    stream: &mut RngStream,
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    record: bool,
) -> Result<Model1Run> {
    let (mut procs, stats, _, _) = run(stream, params, grid, policy, &[false], record)?;
    let p = procs.pop().expect("one process");
    Ok(Model1Run {
        path: p.rec.path,
        stats,
    })
}

/// Thinned Model I with its renewal times.
///
/// In floor mode a boundary with no eligible molecule below it drops to 0,
/// which after a renewal is almost always the case; the window mode is the
/// meaningful one for this variant.
pub fn simulate_model1_thinned(
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    record: bool,
) -> Result<ThinnedRun> {
    simulate_model1_thinned_with(&mut rng_stream(grid.seed, 0), params, grid, policy, record)
}

pub fn simulate_model1_thinned_with(
    stream: &mut RngStream,
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    record: bool,
) -> Result<ThinnedRun> {
    let (mut procs, stats, _, _) = run(stream, params, grid, policy, &[true], record)?;
    let p = procs.pop().expect("one process");
    Ok(ThinnedRun {
        path: p.rec.path,
        renewals: p.renewals,
        stats,
    })
}

/// Full and thinned Model I driven by the same Brownian increments and the
/// same Poisson points.
pub fn simulate_model1_coupled(
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    record: bool,
) -> Result<CoupledModel1Run> {
    simulate_model1_coupled_with(&mut rng_stream(grid.seed, 0), params, grid, policy, record)
}

pub fn simulate_model1_coupled_with(
    stream: &mut RngStream,
    params: &Params,
    grid: &SimGrid,
    policy: &TruncationPolicy,
    record: bool,
) -> Result<CoupledModel1Run> {
    let (mut procs, stats, violations, steps) =
        run(stream, params, grid, policy, &[false, true], record)?;
    let th = procs.pop().expect("two processes");
    let full = procs.pop().expect("two processes");
    Ok(CoupledModel1Run {
        full: full.rec.path,
        thinned: ThinnedRun {
            path: th.rec.path,
            renewals: th.renewals,
            stats,
        },
        domination_violations: violations,
        steps,
    })
}

/// `(sigma_n - sigma_{n-1}, X_{sigma_n} - X_{sigma_{n-1}})` for consecutive renewals.
pub fn renewal_increments(renewals: &[Renewal]) -> Result<Vec<(f64, f64)>> {
    if renewals.len() < 2 {
        return Err(RatchetError::InsufficientData {
            what: "renewal times",
            needed: 2,
            got: renewals.len(),
        });
    }
    Ok(renewals
        .windows(2)
        .map(|w| (w[1].time - w[0].time, w[1].x - w[0].x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::JumpCause;

    fn grid(h: f64, seed: u64) -> SimGrid {
        SimGrid::new(1e-3, h, seed).unwrap()
    }

    #[test]
    fn boundary_respected_and_jumps_consistent() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        for policy in [
            TruncationPolicy::floor(),
            TruncationPolicy::default_window(),
        ] {
            let run = simulate_model1(&p, &grid(50.0, 3), &policy, true).unwrap();
            assert!(run.path.respects_boundary());
            for j in &run.path.jumps {
                match j.cause {
                    JumpCause::NewBinding => assert!(j.new > j.old && j.new <= j.x),
                    JumpCause::Dissociation => assert!(j.new <= j.old),
                }
            }
            assert!(run.stats.dissociations > 0);
        }
    }

    #[test]
    fn no_dissociation_without_delta() {
        let p = Params::at_origin(0.5, 0.0).unwrap();
        let run = simulate_model1(
            &p,
            &grid(100.0, 9),
            &TruncationPolicy::default_window(),
            true,
        )
        .unwrap();
        assert!(run.path.r.windows(2).all(|w| w[1] >= w[0]));
        assert!(run
            .path
            .jumps
            .iter()
            .all(|j| j.cause == JumpCause::NewBinding));
        assert_eq!(run.stats.dissociations, 0);
    }

    #[test]
    fn deterministic() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let pol = TruncationPolicy::default_window();
        let a = simulate_model1(&p, &grid(20.0, 1), &pol, true).unwrap();
        let b = simulate_model1(&p, &grid(20.0, 1), &pol, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thinned_dominated_under_shared_noise() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        for seed in 0..5 {
            let run = simulate_model1_coupled(
                &p,
                &grid(100.0, seed),
                &TruncationPolicy::default_window(),
                false,
            )
            .unwrap();
            assert_eq!(run.domination_violations, 0);
            assert!(run.thinned.renewals.len() > 2);
        }
    }

    #[test]
    fn thinned_equals_full_without_delta() {
        let p = Params::at_origin(0.5, 0.0).unwrap();
        let run = simulate_model1_coupled(
            &p,
            &grid(50.0, 4),
            &TruncationPolicy::default_window(),
            true,
        )
        .unwrap();
        assert_eq!(run.full, run.thinned.path);
    }

    #[test]
    fn renewals_increase() {
        let p = Params::at_origin(0.5, 0.5).unwrap();
        let run = simulate_model1_thinned(
            &p,
            &grid(200.0, 2),
            &TruncationPolicy::default_window(),
            false,
        )
        .unwrap();
        let inc = renewal_increments(&run.renewals).unwrap();
        assert!(inc.iter().all(|&(ds, _)| ds > 0.0));
        assert_eq!(run.renewals[0], Renewal { time: 0.0, x: 0.0 });
    }

    #[test]
    fn strict_window_reports_underflow() {
        let p = Params::at_origin(0.5, 4.0).unwrap();
        let mut pol = TruncationPolicy::default_window();
        // find a seed whose origin molecule dies before anything binds below it
        let seed = (0..400)
            .find(|&s| {
                simulate_model1(&p, &grid(2.0, s), &pol, false)
                    .unwrap()
                    .stats
                    .window_fills
                    > 0
            })
            .expect("an early underflow within 400 seeds");
        pol.on_underflow = UnderflowAction::Fail;
        let r = simulate_model1(&p, &grid(2.0, seed), &pol, false);
        assert!(matches!(r, Err(RatchetError::WindowUnderflow { .. })));
    }

    #[test]
    fn rejects_small_window() {
        assert!(TruncationPolicy::window(5.0).is_err());
        assert!(TruncationPolicy::window(10.0).is_ok());
    }
}
