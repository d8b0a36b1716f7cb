//! Discretized trajectories `(t, X_t, R_t)` with their boundary-jump log.

use serde::{Deserialize, Serialize};

/// What moved the reflection boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpCause {
    /// A molecule bound between the boundary and the protein (boundary up).
    NewBinding,
    /// The active molecule left (boundary down).
    Dissociation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub old: f64,
    pub new: f64,
    pub cause: JumpCause,
    /// Protein position at the jump (continuous across it).
    pub x: f64,
}

/// A trajectory sampled on the grid. Without full recording only the initial
/// and terminal samples are kept; the jump log is always complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
}

impl PathSample {
    pub(crate) fn start(t: f64, x: f64, r: f64) -> Self {
        PathSample {
            times: vec![t],
            x: vec![x],
            r: vec![r],
            jumps: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: f64, r: f64) {
        self.times.push(t);
        self.x.push(x);
        self.r.push(r);
    }

    pub fn terminal_time(&self) -> f64 {
        *self.times.last().expect("path has a start sample")
    }

    pub fn terminal_x(&self) -> f64 {
        *self.x.last().expect("path has a start sample")
    }

    pub fn terminal_r(&self) -> f64 {
        *self.r.last().expect("path has a start sample")
    }

    /// `X_T / T`.
    pub fn terminal_speed(&self) -> f64 {
        self.terminal_x() / self.terminal_time()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `X[i] >= R[i]` at every stored sample.
    pub fn respects_boundary(&self) -> bool {
        self.x.iter().zip(&self.r).all(|(x, r)| x >= r)
    }
}

/// Appends samples when full recording is on and always keeps the end point.
pub(crate) struct Recorder {
    pub path: PathSample,
    full: bool,
}

impl Recorder {
    pub fn new(full: bool, x: f64, r: f64) -> Self {
        Recorder {
            path: PathSample::start(0.0, x, r),
            full,
        }
    }

    #[inline]
    pub fn step(&mut self, t: f64, x: f64, r: f64, last: bool) {
        if self.full || last {
            self.path.push(t, x, r);
        }
    }

    pub fn jump(&mut self, time: f64, old: f64, new: f64, x: f64, cause: JumpCause) {
        self.path.jumps.push(JumpEvent {
            time,
            old,
            new,
            cause,
            x,
        });
    }
}
