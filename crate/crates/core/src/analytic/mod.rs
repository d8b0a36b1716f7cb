//! Special functions, the Green function of killed reflected Brownian motion
//! and the speed ODE.

pub mod airy;
pub mod green;
pub mod ode;
pub mod quad;
