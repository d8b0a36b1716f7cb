//! Simulation and numerical analysis of the broken Brownian ratchet.
//!
//! The crate provides seeded random streams, the killed reflected Brownian
//! motion sampler, grid simulators for Model I (full and thinned) and
//! Model II (jump recursion, active-point construction, coupled pairs), the
//! Airy/Green-function toolkit with the speed ODE solved by shooting, and
//! Monte-Carlo speed estimators.

pub mod analytic;
pub mod error;
pub mod estimation;
pub mod killed;
pub mod model1;
pub mod model2;
pub mod params;
pub mod path;
pub mod poisson;
pub mod rng;
pub mod stats;
pub mod validation;

pub use analytic::airy::{airy, AiryPair};
pub use analytic::green::{green, mean_increment, GreenContext};
pub use analytic::ode::{
    density_fy, density_fy_unnormalized, solve_speed_ode, speed_delta0, OdeSolution, ShotClass,
};
pub use error::{RatchetError, Result};
pub use estimation::{
    compare_models, decompose_cumulative, decompose_cumulative_at, estimate_model_speed,
    estimate_speed_jumps, estimate_speed_renewal, estimate_speed_terminal, run_replicates,
    scaling_collapse_check, stationary_jump_statistics, CompareRow, CompareTable,
    CumulativeDecomposition, EstimateMethod, JumpStatistics, ScalingReport, SpeedEstimate,
    SpeedModel,
};
pub use killed::{sample_killed_reflected_bm, sample_killed_reflected_bm_with, KilledPathResult};
pub use model1::{
    renewal_increments, simulate_model1, simulate_model1_coupled, simulate_model1_coupled_with,
    simulate_model1_thinned, simulate_model1_thinned_with, simulate_model1_with, CoupledModel1Run,
    Model1Run, Renewal, ThinnedRun, TruncationMode, TruncationPolicy,
};
pub use model2::{
    simulate_coupled_pair, simulate_coupled_pair_with, simulate_model2,
    simulate_model2_activepoint, simulate_model2_activepoint_with, simulate_model2_with,
    ActivePointState, CoupledRunResult, Direction, JumpRecord, Model2Run,
};
pub use params::{Params, SimGrid};
pub use path::{JumpCause, JumpEvent, PathSample};
pub use poisson::{sample_poisson_points, Lifetime, PoissonPoint};
pub use rng::{rng_stream, sample_brownian_increment, RngStream};
