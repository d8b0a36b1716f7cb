//! Model parameters and the time discretization shared by every simulator.

use serde::{Deserialize, Serialize};

use crate::error::{RatchetError, Result};

/// Binding rate `gamma` (per unit length per unit time), dissociation rate
/// `delta` and the initial offset `x0` of the protein above the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub gamma: f64,
    pub delta: f64,
    pub x0: f64,
}

impl Params {
    pub fn new(gamma: f64, delta: f64, x0: f64) -> Result<Self> {
        let p = Params { gamma, delta, x0 };
        p.validate()?;
        Ok(p)
    }

    /// Shorthand for a ratchet started on its boundary.
    pub fn at_origin(gamma: f64, delta: f64) -> Result<Self> {
        Self::new(gamma, delta, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "gamma must be finite and > 0, got {}",
                self.gamma
            )));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "delta must be finite and >= 0, got {}",
                self.delta
            )));
        }
        if !(self.x0.is_finite() && self.x0 >= 0.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "x0 must be finite and >= 0, got {}",
                self.x0
            )));
        }
        Ok(())
    }

    /// Parameters of the rescaled ratchet `(1, delta * gamma^{-2/3})`.
    pub fn unit_gamma_equivalent(&self) -> Params {
        Params {
            gamma: 1.0,
            delta: self.delta * self.gamma.powf(-2.0 / 3.0),
            x0: self.x0 * self.gamma.cbrt(),
        }
    }
}

/// Euler grid: step `dt`, total simulated time `horizon`, replicate `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl SimGrid {
    pub const DEFAULT_DT: f64 = 1e-3;

    pub fn new(dt: f64, horizon: f64, seed: u64) -> Result<Self> {
        let g = SimGrid { dt, horizon, seed };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "dt must be finite and > 0, got {}",
                self.dt
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "horizon must be finite and > 0, got {}",
                self.horizon
            )));
        }
        if self.dt > self.horizon {
            return Err(RatchetError::InvalidParameter(format!(
                "dt ({}) exceeds horizon ({})",
                self.dt, self.horizon
            )));
        }
        let steps = (self.horizon / self.dt).ceil();
        if steps > (u64::MAX >> 11) as f64 {
            return Err(RatchetError::InvalidParameter(
                "horizon / dt does not fit in a step counter".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps needed to cover the horizon.
    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).round().max(1.0) as u64
    }

    /// Same grid, step halved (used for discretization checks).
    pub fn halved(&self) -> SimGrid {
        SimGrid {
            dt: self.dt / 2.0,
            ..*self
        }
    }

    pub fn with_seed(&self, seed: u64) -> SimGrid {
        SimGrid { seed, ..*self }
    }

    pub fn with_horizon(&self, horizon: f64) -> SimGrid {
        SimGrid { horizon, ..*self }
    }
}
