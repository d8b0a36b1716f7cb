//! Speed estimators, the cumulative-process decomposition, the scaling
//! collapse and the Model I / Model II comparison.
//!
//! Replicate `i` of configuration `c` always draws from the stream
//! `(seed, c << 32 | i)`, so a table is reproducible whatever the number of
//! worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ode::solve_speed_ode;
use crate::error::{RatchetError, Result};
use crate::model1::{
    simulate_model1_thinned_with, simulate_model1_with, Renewal, TruncationPolicy,
};
use crate::model2::{simulate_model2_activepoint_with, simulate_model2_with, JumpRecord};
use crate::params::{Params, SimGrid};
use crate::path::PathSample;
use crate::rng::{rng_stream, RngStream};
use crate::stats;

pub const DEFAULT_CI_LEVEL: f64 = 0.95;
pub const DEFAULT_BURN_IN: f64 = 0.2;
/// Records needed after burn-in by the ratio estimators.
pub const MIN_RATIO_SAMPLES: usize = 1000;
/// Above this many increments the jackknife cross-check is attached.
pub const JACKKNIFE_MIN: usize = 5000;
/// Relative Model I / Model II discrepancy accepted as "approximately the same".
pub const MODEL_AGREEMENT_TOL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Terminal,
    Renewal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_level: f64,
    pub ci: (f64, f64),
    /// Replicates (terminal) or increments / batches (renewal) behind the estimate.
    pub n_replicates: usize,
    pub method: EstimateMethod,
    /// Degrees of freedom of the t-interval.
    pub df: f64,
    /// Leave-one-out jackknife standard error, ratio estimator with n >= 5000 only.
    pub jackknife_stderr: Option<f64>,
}

impl SpeedEstimate {
    fn build(mean: f64, stderr: f64, n: usize, df: f64, method: EstimateMethod) -> Self {
        let mut e = SpeedEstimate {
            mean,
            stderr,
            ci_level: DEFAULT_CI_LEVEL,
            ci: (mean, mean),
            n_replicates: n,
            method,
            df,
            jackknife_stderr: None,
        };
        e.set_level(DEFAULT_CI_LEVEL);
        e
    }

    fn set_level(&mut self, level: f64) {
        let q = stats::two_sided_quantile(level, self.df);
        self.ci_level = level;
        self.ci = (self.mean - q * self.stderr, self.mean + q * self.stderr);
    }

    /// The same estimate with a t-interval at another level.
    pub fn with_level(&self, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(RatchetError::InvalidParameter(format!(
                "confidence level must lie in (0, 1), got {level}"
            )));
        }
        let mut e = self.clone();
        e.set_level(level);
        Ok(e)
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci.0 <= value && value <= self.ci.1
    }

    /// `|mean - value| <= k * stderr`.
    pub fn within_se(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }

    /// Standard error of the difference to an independent estimate.
    pub fn joint_se(&self, other: &SpeedEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }

    /// `|self - other| <= k * joint_se`.
    pub fn agrees_with(&self, other: &SpeedEstimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.joint_se(other)
    }
}

/// Mean and t-interval of per-replicate `X_T / T`.
pub fn estimate_speed_terminal(paths: &[PathSample]) -> Result<SpeedEstimate> {
    if paths.len() < 2 {
        return Err(RatchetError::InsufficientData {
            what: "replicates",
            needed: 2,
            got: paths.len(),
        });
    }
    let t = paths[0].terminal_time();
    if paths.iter().any(|p| p.terminal_time() != t) {
        return Err(RatchetError::InvalidParameter(
            "replicates must share the horizon".into(),
        ));
    }
    let v: Vec<f64> = paths.iter().map(PathSample::terminal_speed).collect();
    Ok(terminal_from_speeds(&v))
}

fn terminal_from_speeds(v: &[f64]) -> SpeedEstimate {
    SpeedEstimate::build(
        stats::mean(v),
        stats::std_err(v),
        v.len(),
        (v.len() - 1) as f64,
        EstimateMethod::Terminal,
    )
}

/// Ratio of means of `(time, space)` pairs with a delta-method standard error.
fn ratio_estimate(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let st: f64 = pairs.iter().map(|p| p.0).sum();
    let sx: f64 = pairs.iter().map(|p| p.1).sum();
    let r = sx / st;
    let (mt, mx) = (st / n, sx / n);
    let (mut vtt, mut vxx, mut vtx) = (0.0, 0.0, 0.0);
    for &(t, x) in pairs {
        vtt += (t - mt) * (t - mt);
        vxx += (x - mx) * (x - mx);
        vtx += (t - mt) * (x - mx);
    }
    let d = n - 1.0;
    let var = (vxx / d - 2.0 * r * vtx / d + r * r * vtt / d) / (n * mt * mt);
    (r, var.max(0.0).sqrt())
}

fn jackknife(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let st: f64 = pairs.iter().map(|p| p.0).sum();
    let sx: f64 = pairs.iter().map(|p| p.1).sum();
    let loo: Vec<f64> = pairs.iter().map(|&(t, x)| (sx - x) / (st - t)).collect();
    let m = stats::mean(&loo);
    ((n - 1.0) / n * loo.iter().map(|r| (r - m) * (r - m)).sum::<f64>()).sqrt()
}

fn post_burn_in<T>(xs: &[T], burn_in: f64) -> Result<&[T]> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(RatchetError::InvalidParameter(format!(
            "burn-in fraction must lie in [0, 1), got {burn_in}"
        )));
    }
    let skip = (burn_in * xs.len() as f64).floor() as usize;
    let rest = &xs[skip..];
    if rest.len() < MIN_RATIO_SAMPLES {
        return Err(RatchetError::InsufficientData {
            what: "post-burn-in increments",
            needed: MIN_RATIO_SAMPLES,
            got: rest.len(),
        });
    }
    Ok(rest)
}

/// Renewal-reward estimator `mean(dX) / mean(dsigma)` over iid
/// `(dsigma, dX)` increments, e.g. from [`crate::renewal_increments`].
pub fn estimate_speed_renewal(increments: &[(f64, f64)], burn_in: f64) -> Result<SpeedEstimate> {
    let pairs = post_burn_in(increments, burn_in)?;
    let (r, se) = ratio_estimate(pairs);
    let mut e = SpeedEstimate::build(
        r,
        se,
        pairs.len(),
        (pairs.len() - 1) as f64,
        EstimateMethod::Renewal,
    );
    if pairs.len() >= JACKKNIFE_MIN {
        e.jackknife_stderr = Some(jackknife(pairs));
    }
    Ok(e)
}

fn batch_count(n: usize) -> usize {
    ((n as f64).sqrt() as usize).clamp(20, 1000)
}

/// `(sum eta, sum W)` over consecutive batches of the Markov chain records.
fn jump_batches(records: &[JumpRecord]) -> Vec<(f64, f64)> {
    let k = batch_count(records.len());
    let eta: Vec<f64> = records.iter().map(|r| r.eta).collect();
    let w: Vec<f64> = records.iter().map(|r| r.w).collect();
    stats::batch_sums(&eta, k)
        .into_iter()
        .zip(stats::batch_sums(&w, k))
        .collect()
}

/// Ratio estimator `sum W / sum eta` over Model II jump records. The records
/// form a Markov chain, so the standard error comes from the delta method on
/// batch sums.
pub fn estimate_speed_jumps(records: &[JumpRecord], burn_in: f64) -> Result<SpeedEstimate> {
    let recs = post_burn_in(records, burn_in)?;
    let sw: f64 = recs.iter().map(|r| r.w).sum();
    let se: f64 = recs.iter().map(|r| r.eta).sum();
    let batches = jump_batches(recs);
    let (_, stderr) = ratio_estimate(&batches);
    let mut e = SpeedEstimate::build(
        sw / se,
        stderr,
        recs.len(),
        (batches.len() - 1) as f64,
        EstimateMethod::Renewal,
    );
    if recs.len() >= JACKKNIFE_MIN {
        e.jackknife_stderr = Some(jackknife(&batches));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `counts / (n * width)`
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn uniform(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &x in xs {
            if x >= lo && x <= hi {
                counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
            }
        }
        let n = xs.len() as f64;
        Histogram {
            edges: (0..=bins).map(|i| lo + i as f64 * width).collect(),
            density: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
            counts,
        }
    }
}

/// Stationary moments of the jump chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpStatistics {
    pub n: usize,
    pub mean_w: f64,
    pub se_w: f64,
    pub mean_eta: f64,
    pub se_eta: f64,
    pub y_histogram: Histogram,
    /// Post-burn-in `Y` values in record order.
    pub y: Vec<f64>,
}

impl JumpStatistics {
    pub fn speed(&self) -> f64 {
        self.mean_w / self.mean_eta
    }
}

/// Drops the first `burn_in_fraction` of the records and returns the means of
/// `W` and `eta` with batch-means standard errors and a 30-bin histogram of `Y`.
pub fn stationary_jump_statistics(
    records: &[JumpRecord],
    burn_in_fraction: f64,
) -> Result<JumpStatistics> {
    let recs = post_burn_in(records, burn_in_fraction)?;
    let n = recs.len();
    let batches = jump_batches(recs);
    let per = (n / batches.len()) as f64;
    let bw: Vec<f64> = batches.iter().map(|b| b.1 / per).collect();
    let be: Vec<f64> = batches.iter().map(|b| b.0 / per).collect();
    let y: Vec<f64> = recs.iter().map(|r| r.y).collect();
    let y_max = y.iter().copied().fold(0.0, f64::max);
    Ok(JumpStatistics {
        n,
        mean_w: recs.iter().map(|r| r.w).sum::<f64>() / n as f64,
        se_w: stats::std_err(&bw),
        mean_eta: recs.iter().map(|r| r.eta).sum::<f64>() / n as f64,
        se_eta: stats::std_err(&be),
        y_histogram: Histogram::uniform(&y, 0.0, y_max.max(f64::MIN_POSITIVE), 30),
        y,
    })
}

/// `X_t = S_{M_t} + A_t` for the thinned Model I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeDecomposition {
    pub t: f64,
    pub x_t: f64,
    /// Number of completed renewal cycles.
    pub m_t: usize,
    pub s_mt: f64,
    pub a_t: f64,
}

impl CumulativeDecomposition {
    pub fn remainder_rate(&self) -> f64 {
        self.a_t / self.t
    }

    pub fn identity_residual(&self) -> f64 {
        (self.x_t - self.s_mt - self.a_t).abs()
    }
}

/// Decomposes at time `t` given `x_t`: with renewals `sigma_0 < ... <= t`,
/// `S = X_{sigma_M} - X_{sigma_0}` and `A = X_{sigma_0} + X_t - X_{sigma_M}`.
pub fn decompose_cumulative_at(
    renewals: &[Renewal],
    t: f64,
    x_t: f64,
) -> Result<CumulativeDecomposition> {
    if renewals.is_empty() {
        return Err(RatchetError::InsufficientData {
            what: "renewal times",
            needed: 1,
            got: 0,
        });
    }
    let seen = renewals.partition_point(|r| r.time <= t);
    if seen == 0 {
        return Ok(CumulativeDecomposition {
            t,
            x_t,
            m_t: 0,
            s_mt: 0.0,
            a_t: x_t,
        });
    }
    let (first, last) = (renewals[0].x, renewals[seen - 1].x);
    Ok(CumulativeDecomposition {
        t,
        x_t,
        m_t: seen - 1,
        s_mt: last - first,
        a_t: first + x_t - last,
    })
}

/// [`decompose_cumulative_at`] at the terminal time of `path`.
pub fn decompose_cumulative(
    path: &PathSample,
    renewals: &[Renewal],
) -> Result<CumulativeDecomposition> {
    decompose_cumulative_at(renewals, path.terminal_time(), path.terminal_x())
}

/// Model variants with a terminal speed estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedModel {
    Model1(TruncationPolicy),
    Model1Thinned(TruncationPolicy),
    Model2,
    Model2ActivePoint,
}

impl SpeedModel {
    pub fn run_path(
        &self,
        stream: &mut RngStream,
        params: &Params,
        grid: &SimGrid,
        record: bool,
    ) -> Result<PathSample> {
        Ok(match self {
            SpeedModel::Model1(p) => simulate_model1_with(stream, params, grid, p, record)?.path,
            SpeedModel::Model1Thinned(p) => {
                simulate_model1_thinned_with(stream, params, grid, p, record)?.path
            }
            SpeedModel::Model2 => simulate_model2_with(stream, params, grid, record)?.path,
            SpeedModel::Model2ActivePoint => {
                simulate_model2_activepoint_with(stream, params, grid, record)?.path
            }
        })
    }
}

/// Worker count: `RATCHET_THREADS` if set to a positive integer, else all cores.
pub fn worker_count() -> usize {
    std::env::var("RATCHET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Stream of replicate `i` in configuration `config`.
pub fn replicate_stream(seed: u64, config: u32, i: u32) -> RngStream {
    rng_stream(seed, (u64::from(config) << 32) | u64::from(i))
}

/// Runs `f(i, stream)` for replicates `0..n` on up to [`worker_count`]
/// threads; results come back in replicate order.
pub fn run_replicates<T, F>(seed: u64, config: u32, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> Result<T> + Sync + Send,
{
    let job = || {
        (0..n)
            .into_par_iter()
            .map(|i| f(i, &mut replicate_stream(seed, config, i as u32)))
            .collect::<Result<Vec<T>>>()
    };
    let workers = worker_count();
    if workers == 1 {
        return (0..n)
            .map(|i| f(i, &mut replicate_stream(seed, config, i as u32)))
            .collect();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RatchetError::Consistency(format!("thread pool: {e}")))?
        .install(job)
}

/// Terminal speeds `X_T / T` of `n` replicates.
pub fn terminal_speeds(
    model: &SpeedModel,
    params: &Params,
    grid: &SimGrid,
    n: usize,
    config: u32,
) -> Result<Vec<f64>> {
    params.validate()?;
    grid.validate()?;
    run_replicates(grid.seed, config, n, |_, s| {
        Ok(model.run_path(s, params, grid, false)?.terminal_speed())
    })
}

/// Terminal speed estimate over `n` replicates.
pub fn estimate_model_speed(
    model: &SpeedModel,
    params: &Params,
    grid: &SimGrid,
    n: usize,
    config: u32,
) -> Result<SpeedEstimate> {
    if n < 2 {
        return Err(RatchetError::InsufficientData {
            what: "replicates",
            needed: 2,
            got: n,
        });
    }
    Ok(terminal_from_speeds(&terminal_speeds(
        model, params, grid, n, config,
    )?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub gamma: f64,
    pub delta: f64,
    pub original: SpeedEstimate,
    /// Estimate at `(1, delta gamma^{-2/3})`.
    pub rescaled: SpeedEstimate,
    /// `gamma^{1/3} * rescaled.mean`
    pub predicted: f64,
    pub difference: f64,
    pub joint_se: f64,
    pub within_3se: bool,
}

/// Estimates the speed at `(gamma, delta)` and at `(1, delta gamma^{-2/3})`
/// independently and checks `speed(gamma, delta) = gamma^{1/3} speed(1, .)`.
///
/// The rescaled run uses time step and horizon multiplied by `gamma^{2/3}`,
/// so both runs discretize the same process in law.
pub fn scaling_collapse_check(
    model: &SpeedModel,
    gamma: f64,
    delta: f64,
    grid: &SimGrid,
    n: usize,
) -> Result<ScalingReport> {
    let params = Params::at_origin(gamma, delta)?;
    let original = estimate_model_speed(model, &params, grid, n, 0)?;
    let rescaled = if gamma == 1.0 {
        original.clone()
    } else {
        let f = gamma.powf(2.0 / 3.0);
        let g1 = SimGrid::new(grid.dt * f, grid.horizon * f, grid.seed)?;
        estimate_model_speed(model, &params.unit_gamma_equivalent(), &g1, n, 1)?
    };
    let c = gamma.cbrt();
    let predicted = c * rescaled.mean;
    let joint_se = if gamma == 1.0 {
        original.stderr
    } else {
        original.stderr.hypot(c * rescaled.stderr)
    };
    let difference = original.mean - predicted;
    Ok(ScalingReport {
        gamma,
        delta,
        within_3se: difference.abs() <= 3.0 * joint_se,
        original,
        rescaled,
        predicted,
        difference,
        joint_se,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub delta: f64,
    pub speed_i_floor: SpeedEstimate,
    pub speed_i_window: SpeedEstimate,
    pub speed_ii_sim: SpeedEstimate,
    pub speed_ii_ode: f64,
}

impl CompareRow {
    /// Largest `|speed_I - speed_II| / speed_II` over both truncation modes,
    /// against the simulated Model II speed.
    pub fn max_relative_gap(&self) -> f64 {
        let ii = self.speed_ii_sim.mean;
        ((self.speed_i_floor.mean - ii).abs() / ii).max((self.speed_i_window.mean - ii).abs() / ii)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub gamma: f64,
    pub grid: SimGrid,
    pub replicates: usize,
    pub rows: Vec<CompareRow>,
    pub notes: Vec<String>,
}

/// The liminf / limsup caveat attached to every Model I estimate.
pub const MODEL1_LIMIT_NOTE: &str = "Model I speeds are X_T/T at a finite horizon; \
the existence of the limit is not known, only positive liminf and finite limsup";

/// Model I (floor and window truncation), simulated Model II and the ODE
/// speed per `delta`.
pub fn compare_models(
    gamma: f64,
    delta_grid: &[f64],
    grid: &SimGrid,
    n: usize,
) -> Result<CompareTable> {
    grid.validate()?;
    let mut rows = Vec::with_capacity(delta_grid.len());
    for (k, &delta) in delta_grid.iter().enumerate() {
        let params = Params::at_origin(gamma, delta)?;
        let base = 3 * k as u32;
        let floor = SpeedModel::Model1(TruncationPolicy::floor());
        let window = SpeedModel::Model1(TruncationPolicy::default_window());
        rows.push(CompareRow {
            delta,
            speed_i_floor: estimate_model_speed(&floor, &params, grid, n, base)?,
            speed_i_window: estimate_model_speed(&window, &params, grid, n, base + 1)?,
            speed_ii_sim: estimate_model_speed(&SpeedModel::Model2, &params, grid, n, base + 2)?,
            speed_ii_ode: solve_speed_ode(&params, 1e4, 1e-12)?.speed,
        });
    }
    Ok(CompareTable {
        gamma,
        grid: *grid,
        replicates: n,
        rows,
        notes: vec![
            MODEL1_LIMIT_NOTE.into(),
            "window truncation is an extension; floor truncation fixes the boundary floor at 0"
                .into(),
        ],
    })
}

/// One-sided trend test: slope of an inverse-variance weighted regression of
/// speed on `delta`, as `(slope, z)`. A decreasing trend has `z` well below 0.
pub fn trend_test(deltas: &[f64], estimates: &[SpeedEstimate]) -> (f64, f64) {
    let w: Vec<f64> = estimates
        .iter()
        .map(|e| 1.0 / (e.stderr * e.stderr).max(1e-300))
        .collect();
    let sw: f64 = w.iter().sum();
    let xm = deltas.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = estimates
        .iter()
        .zip(&w)
        .map(|(e, w)| e.mean * w)
        .sum::<f64>()
        / sw;
    let sxx: f64 = deltas
        .iter()
        .zip(&w)
        .map(|(x, w)| w * (x - xm).powi(2))
        .sum();
    let sxy: f64 = deltas
        .iter()
        .zip(estimates)
        .zip(&w)
        .map(|((x, e), w)| w * (x - xm) * (e.mean - ym))
        .sum();
    let slope = sxy / sxx;
    (slope, slope * sxx.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model2::Direction;

    #[test]
    fn identical_replicates_degenerate() {
        let e = terminal_from_speeds(&[0.3; 10]);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.ci, (0.3, 0.3));
    }

    #[test]
    fn constant_increments_exact_ratio() {
        let inc = vec![(2.0, 0.5); 2000];
        let e = estimate_speed_renewal(&inc, 0.0).unwrap();
        assert_eq!(e.mean, 0.25);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn jump_ratio_matches_stationary_statistics() {
        let mut s = rng_stream(1, 0);
        let recs: Vec<JumpRecord> = (0..5000)
            .map(|_| JumpRecord {
                y: s.uniform(),
                w: s.standard_normal() + 0.2,
                eta: s.exp1(),
                direction: Direction::Up,
                gap_before: 1.0,
            })
            .collect();
        let e = estimate_speed_jumps(&recs, 0.2).unwrap();
        let st = stationary_jump_statistics(&recs, 0.2).unwrap();
        assert!((e.mean - st.speed()).abs() <= 1e-15 * e.mean.abs());
        assert!(e.jackknife_stderr.is_none() || e.n_replicates >= JACKKNIFE_MIN);
    }

    #[test]
    fn too_few_increments() {
        assert!(matches!(
            estimate_speed_renewal(&[(1.0, 1.0); 10], 0.0),
            Err(RatchetError::InsufficientData { .. })
        ));
        assert!(estimate_speed_terminal(&[]).is_err());
    }

    #[test]
    fn decomposition_before_first_renewal() {
        let ren = [Renewal { time: 5.0, x: 1.0 }];
        let d = decompose_cumulative_at(&ren, 2.0, 0.7).unwrap();
        assert_eq!((d.m_t, d.s_mt, d.a_t), (0, 0.0, 0.7));
        let ren = [
            Renewal { time: 1.0, x: 0.5 },
            Renewal { time: 3.0, x: 1.5 },
            Renewal { time: 6.0, x: 2.25 },
        ];
        let d = decompose_cumulative_at(&ren, 4.0, 2.0).unwrap();
        assert_eq!(d.m_t, 1);
        assert_eq!(d.s_mt, 1.0);
        assert_eq!(d.identity_residual(), 0.0);
    }

    #[test]
    fn level_change_widens() {
        let e = terminal_from_speeds(&[0.1, 0.2, 0.3, 0.4]);
        let w = e.with_level(0.99).unwrap();
        assert!(w.ci.0 < e.ci.0 && w.ci.1 > e.ci.1);
        assert!(e.with_level(1.0).is_err());
    }

    #[test]
    fn replicates_independent_of_thread_count() {
        let p = Params::at_origin(0.5, 1.0).unwrap();
        let g = SimGrid::new(1e-3, 5.0, 9).unwrap();
        let a = terminal_speeds(&SpeedModel::Model2, &p, &g, 8, 3).unwrap();
        let b: Vec<f64> = (0..8)
            .map(|i| {
                SpeedModel::Model2
                    .run_path(&mut replicate_stream(9, 3, i), &p, &g, false)
                    .unwrap()
                    .terminal_speed()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn trend_sign() {
        let est: Vec<SpeedEstimate> = [0.4, 0.3, 0.2]
            .iter()
            .map(|&m| terminal_from_speeds(&[m - 0.01, m, m + 0.01]))
            .collect();
        let (slope, z) = trend_test(&[0.0, 1.0, 2.0], &est);
        assert!(slope < 0.0 && z < -3.0);
    }
}
