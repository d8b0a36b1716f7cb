//! Acceptance suite: every criterion as a list of checks, each carrying an
//! `(observed, expected, tolerance)` triple. Failures are reported, never
//! thrown. `Fast` runs the same checks at reduced sample sizes.
//!
//! The Airy evaluator is injectable so that a corrupted table can be shown
//! to trip the Wronskian checks and nothing else; only those checks see it.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::analytic::airy::{airy, AiryPair};
use crate::analytic::green::{mean_increment, AiryFn, GreenContext};
use crate::analytic::ode::{
    class_changes, shooting_scan, solve_speed_ode, speed_delta0, OdeSolution,
};
use crate::error::Result;
use crate::estimation::{
    compare_models, estimate_model_speed, estimate_speed_renewal, run_replicates,
    scaling_collapse_check, stationary_jump_statistics, trend_test, CompareTable, SpeedModel,
    MODEL_AGREEMENT_TOL,
};
use crate::killed::sample_killed_reflected_bm_with;
use crate::model1::{renewal_increments, simulate_model1_coupled_with, TruncationPolicy};
use crate::model2::{simulate_coupled_pair_with, simulate_model2_with};
use crate::params::{Params, SimGrid};
use crate::stats;

pub const GOLDEN_SPEED: f64 = 0.36452;
pub const VALIDATION_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

/// Sample sizes of a suite.
#[derive(Debug, Clone, Copy)]
struct Scale {
    reps: usize,
    horizon: f64,
    jumps: usize,
    killed: usize,
    seeds: usize,
    coupled_min: usize,
}

impl Suite {
    fn scale(self) -> Scale {
        match self {
            Suite::Full => Scale {
                reps: 200,
                horizon: 2000.0,
                jumps: 100_000,
                killed: 100_000,
                seeds: 100,
                coupled_min: 99,
            },
            Suite::Fast => Scale {
                reps: 40,
                horizon: 1000.0,
                jumps: 20_000,
                killed: 20_000,
                seeds: 30,
                coupled_min: 29,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// `|observed - expected| <= tolerance`
    fn near(label: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Check {
        Check {
            label: label.into(),
            observed,
            expected,
            tolerance,
            passed: (observed - expected).abs() <= tolerance,
        }
    }

    /// `observed > threshold` (tolerance column is 0).
    fn above(label: impl Into<String>, observed: f64, threshold: f64) -> Check {
        Check {
            label: label.into(),
            observed,
            expected: threshold,
            tolerance: 0.0,
            passed: observed > threshold,
        }
    }

    /// `observed < threshold`.
    fn below(label: impl Into<String>, observed: f64, threshold: f64) -> Check {
        Check {
            label: label.into(),
            observed,
            expected: threshold,
            tolerance: 0.0,
            passed: observed < threshold,
        }
    }

    fn error(label: impl Into<String>, err: impl std::fmt::Display) -> Check {
        Check {
            label: format!("{}: error: {err}", label.into()),
            observed: f64::NAN,
            expected: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

impl ValidationReport {
    /// One `PASS`/`FAIL` line per criterion followed by its checks.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!(
                "{} {:>2} {} ({:.1}s)\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.name,
                c.seconds
            ));
            for k in &c.checks {
                out.push_str(&format!(
                    "       {} {}: observed {:.6e}, expected {:.6e}, tolerance {:.3e}\n",
                    if k.passed { "ok " } else { "BAD" },
                    k.label,
                    k.observed,
                    k.expected,
                    k.tolerance
                ));
            }
        }
        out
    }
}

fn criterion(id: u32, name: &str, f: impl FnOnce() -> Result<Vec<Check>>) -> CriterionResult {
    let start = Instant::now();
    let checks = match f() {
        Ok(c) => c,
        Err(e) => vec![Check::error(name, e)],
    };
    CriterionResult {
        id,
        name: name.into(),
        passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
        seconds: start.elapsed().as_secs_f64(),
        checks,
    }
}

const DELTAS: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];

/// Runs the suite with the standard Airy evaluator.
pub fn validate(suite: Suite) -> ValidationReport {
    validate_with(suite, airy)
}

/// Runs the suite with `airy_fn` feeding the Wronskian checks of criterion 10.
pub fn validate_with(suite: Suite, airy_fn: AiryFn) -> ValidationReport {
    validate_selected(suite, airy_fn, &[])
}

/// As [`validate_with`], restricted to the criteria in `only` (all if empty).
pub fn validate_selected(suite: Suite, airy_fn: AiryFn, only: &[u32]) -> ValidationReport {
    let sc = suite.scale();
    let seed = VALIDATION_SEED;
    let want = |id: u32| only.is_empty() || only.contains(&id);
    let grid = SimGrid::new(SimGrid::DEFAULT_DT, sc.horizon, seed).expect("valid grid");

    let mut table: Option<Result<CompareTable>> = None;
    let table_for = |table: &mut Option<Result<CompareTable>>| {
        table
            .get_or_insert_with(|| compare_models(0.5, &DELTAS, &grid, sc.reps))
            .as_ref()
            .map(Clone::clone)
            .map_err(Clone::clone)
    };

    let mut criteria = Vec::new();
    if want(1) {
        criteria.push(criterion(1, "zero-dissociation golden speed", golden));
    }
    if want(2) {
        criteria.push(criterion(
            2,
            "Model II simulation covers the ODE speed",
            || ode_closure(table_for(&mut table)?, &grid, sc, suite),
        ));
    }
    if want(3) || want(4) {
        let start = Instant::now();
        let stationary = stationary_run(sc, seed);
        // the shared run is charged to the first of the two criteria
        let mut shared = start.elapsed().as_secs_f64();
        if want(3) {
            criterion_push(
                &mut criteria,
                3,
                "stationary renewal identities",
                &stationary,
                |s| Ok(renewal_identities(s)),
            );
            criteria.last_mut().expect("pushed").seconds += shared;
            shared = 0.0;
        }
        if want(4) {
            criterion_push(
                &mut criteria,
                4,
                "stationary gap density",
                &stationary,
                stationary_density,
            );
            criteria.last_mut().expect("pushed").seconds += shared;
        }
    }
    if want(5) {
        criteria.push(criterion(5, "killed reflected BM oracle", || {
            killed_oracle(sc, seed)
        }));
    }
    if want(6) {
        criteria.push(criterion(6, "scaling collapse", || scaling(sc, &grid)));
    }
    if want(7) {
        criteria.push(criterion(7, "Model I / Model II comparison", || {
            comparison(table_for(&mut table)?)
        }));
    }
    if want(8) {
        criteria.push(criterion(
            8,
            "pathwise domination of the thinned Model I",
            || domination(sc, seed),
        ));
    }
    if want(9) {
        criteria.push(criterion(9, "coupling of Model II pairs", || {
            coupling(sc, seed)
        }));
    }
    if want(10) {
        criteria.push(criterion(10, "numerics invariants", || numerics(airy_fn)));
    }
    if want(11) {
        criteria.push(criterion(11, "Model I speed positivity", || {
            positivity(table_for(&mut table)?, &grid, sc)
        }));
    }
    ValidationReport {
        suite,
        seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

fn criterion_push<T>(
    out: &mut Vec<CriterionResult>,
    id: u32,
    name: &str,
    input: &Result<T>,
    f: impl FnOnce(&T) -> Result<Vec<Check>>,
) {
    out.push(criterion(id, name, || match input {
        Ok(v) => f(v),
        Err(e) => Err(e.clone()),
    }));
}

fn golden() -> Result<Vec<Check>> {
    let v = speed_delta0(0.5)?;
    // independent route: Gamma(2/3) / Gamma(1/3) * (3 gamma / 4)^{1/3}
    let oracle = gamma_fn(2.0 / 3.0) / gamma_fn(1.0 / 3.0) * 0.375f64.cbrt();
    Ok(vec![
        Check::near("speed_delta0(0.5) vs gamma-function form", v, oracle, 1e-10),
        Check::near("speed_delta0(0.5) vs 0.36452", v, GOLDEN_SPEED, 1e-4),
    ])
}

fn ode_closure(t: CompareTable, grid: &SimGrid, sc: Scale, suite: Suite) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for row in t.rows.iter().filter(|r| r.delta > 0.0) {
        let e = &row.speed_ii_sim;
        checks.push(Check::near(
            format!("delta={} simulated vs ODE speed (3 SE)", row.delta),
            e.mean,
            row.speed_ii_ode,
            3.0 * e.stderr,
        ));
    }
    // discretization: the delta = 1 estimate moves by less than 3 joint SE at dt/2
    let p = Params::at_origin(0.5, 1.0)?;
    let row = t
        .rows
        .iter()
        .find(|r| r.delta == 1.0)
        .expect("delta grid has 1");
    let n = if suite == Suite::Full {
        sc.reps
    } else {
        sc.reps / 2
    };
    let half = estimate_model_speed(&SpeedModel::Model2, &p, &grid.halved(), n, 100)?;
    checks.push(Check::near(
        "delta=1 Model II dt vs dt/2 (3 joint SE)",
        half.mean,
        row.speed_ii_sim.mean,
        3.0 * half.joint_se(&row.speed_ii_sim),
    ));
    Ok(checks)
}

struct Stationary {
    stats: crate::estimation::JumpStatistics,
    ode: OdeSolution,
    params: Params,
}

fn stationary_run(sc: Scale, seed: u64) -> Result<Stationary> {
    let params = Params::at_origin(0.5, 1.0)?;
    let ode = solve_speed_ode(&params, 1e4, 1e-12)?;
    let total = (sc.jumps as f64 / 0.8).ceil() as usize;
    // about 1 / E[eta] jumps per unit time; 30% slack
    let horizon = 1.3 * total as f64 * ode.stationary_mean_eta();
    let grid = SimGrid::new(SimGrid::DEFAULT_DT, horizon, seed)?;
    let mut stream = crate::estimation::replicate_stream(seed, 200, 0);
    let mut recs = simulate_model2_with(&mut stream, &params, &grid, false)?.records;
    recs.truncate(total);
    let stats = stationary_jump_statistics(&recs, 1.0 - sc.jumps as f64 / total as f64)?;
    Ok(Stationary { stats, ode, params })
}

fn renewal_identities(s: &Stationary) -> Vec<Check> {
    let st = &s.stats;
    vec![
        Check::near(
            format!("mean W over {} jumps vs -A'(0) (3 SE)", st.n),
            st.mean_w,
            s.ode.stationary_mean_w(),
            3.0 * st.se_w,
        ),
        Check::near(
            "mean eta vs 2 A(0) (3 SE)",
            st.mean_eta,
            s.ode.stationary_mean_eta(),
            3.0 * st.se_eta,
        ),
    ]
}

/// Equiprobable bin edges for a continuous cdf on `[0, hi]`.
fn quantile_edges(cdf: impl Fn(f64) -> Result<f64>, bins: usize, hi: f64) -> Result<Vec<f64>> {
    let mut edges = vec![0.0];
    for j in 1..bins {
        let q = j as f64 / bins as f64;
        let (mut lo, mut up) = (*edges.last().expect("non-empty"), hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + up);
            if cdf(mid)? < q {
                lo = mid;
            } else {
                up = mid;
            }
        }
        edges.push(0.5 * (lo + up));
    }
    Ok(edges)
}

fn bin_counts(xs: &[f64], edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len()];
    for &x in xs {
        counts[edges.partition_point(|&e| e <= x) - 1] += 1;
    }
    counts
}

fn stationary_density(s: &Stationary) -> Result<Vec<Check>> {
    let ode = &s.ode;
    let g2 = 2.0 * s.params.gamma * ode.density_scale;
    // cumulative trapezoid of the density on the solver lattice
    let mut cum = vec![0.0];
    for i in 1..ode.a.len() {
        let f0 = g2 * (ode.a[i - 1] + ode.b[i - 1]);
        let f1 = g2 * (ode.a[i] + ode.b[i]);
        cum.push(cum[i - 1] + 0.5 * ode.h * (f0 + f1));
    }
    let total = *cum.last().expect("non-empty");
    let cdf = |z: f64| -> Result<f64> {
        let i = ((z / ode.h) as usize).min(cum.len() - 2);
        let u = (z - i as f64 * ode.h) / ode.h;
        Ok((cum[i] + u * (cum[i + 1] - cum[i])) / total)
    };
    let bins = 30;
    let edges = quantile_edges(cdf, bins, ode.z_max)?;
    let counts = bin_counts(&s.stats.y, &edges);
    // the Y records are positively correlated, which only inflates the statistic
    let (_, p) = stats::chi_square_gof(&counts, &vec![1.0 / bins as f64; bins], 0)?;
    Ok(vec![
        Check::above("chi-square p-value, 30 equiprobable bins", p, 0.01),
        Check::near("density mass on the grid", total, 1.0, 1e-3),
    ])
}

const KILLED_CASES: [(f64, f64, f64); 3] = [(0.5, 0.0, 0.0), (0.5, 1.0, 1.0), (1.0, 1.0, 2.0)];

fn killed_oracle(sc: Scale, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, &(g, d, x)) in KILLED_CASES.iter().enumerate() {
        let params = Params::at_origin(g, d)?;
        let ctx = GreenContext::new(params)?;
        let grid = SimGrid::new(SimGrid::DEFAULT_DT, 10.0, seed)?;
        let pos = run_replicates(seed, 300 + k as u32, sc.killed, |_, s| {
            Ok(sample_killed_reflected_bm_with(s, &params, x, &grid, false)?.kill_position)
        })?;
        let mc = stats::mean(&pos);
        let exact = mean_increment(&ctx, x)?;
        let tag = format!("(gamma={g}, delta={d}, x={x})");
        checks.push(Check::near(
            format!("{tag} mean kill position (2%)"),
            mc,
            exact,
            0.02 * exact,
        ));
        let bins = 40;
        let hi = ctx.max_arg();
        let edges = quantile_edges(|y| ctx.kill_position_probability(x, 0.0, y), bins, hi)?;
        let counts = bin_counts(&pos, &edges);
        let (_, p) = stats::chi_square_gof(&counts, &vec![1.0 / bins as f64; bins], 0)?;
        checks.push(Check::above(
            format!("{tag} kill position chi-square p"),
            p,
            0.01,
        ));
    }
    Ok(checks)
}

fn scaling(sc: Scale, grid: &SimGrid) -> Result<Vec<Check>> {
    let cases = [
        ("Model II", SpeedModel::Model2, 2.0, 1.0),
        (
            "Model I window",
            SpeedModel::Model1(TruncationPolicy::default_window()),
            0.25,
            0.5,
        ),
    ];
    let mut checks = Vec::new();
    for (name, model, g, d) in cases {
        let r = scaling_collapse_check(&model, g, d, &grid.with_seed(grid.seed + 1), sc.reps)?;
        checks.push(Check::near(
            format!("{name} (gamma={g}, delta={d}) vs gamma^(1/3) speed(1, delta gamma^(-2/3)) (3 joint SE)"),
            r.original.mean,
            r.predicted,
            3.0 * r.joint_se,
        ));
    }
    Ok(checks)
}

fn comparison(t: CompareTable) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for r in &t.rows {
        let ii = r.speed_ii_sim.mean;
        for (mode, e) in [("floor", &r.speed_i_floor), ("window", &r.speed_i_window)] {
            checks.push(Check::below(
                format!("delta={} |speed_I({mode}) - speed_II| / speed_II", r.delta),
                (e.mean - ii).abs() / ii,
                MODEL_AGREEMENT_TOL,
            ));
        }
    }
    let zero = t
        .rows
        .iter()
        .find(|r| r.delta == 0.0)
        .expect("delta grid has 0");
    for (name, e) in [
        ("Model I floor", &zero.speed_i_floor),
        ("Model I window", &zero.speed_i_window),
        ("Model II", &zero.speed_ii_sim),
    ] {
        checks.push(Check::near(
            format!("delta=0 {name} covers 0.36452 (3 SE)"),
            e.mean,
            GOLDEN_SPEED,
            3.0 * e.stderr,
        ));
    }
    let deltas: Vec<f64> = t.rows.iter().map(|r| r.delta).collect();
    let ode_drop = t
        .rows
        .windows(2)
        .map(|w| w[1].speed_ii_ode - w[0].speed_ii_ode)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::below(
        "largest ODE speed step along delta (strictly decreasing)",
        ode_drop,
        0.0,
    ));
    type Pick = fn(&crate::estimation::CompareRow) -> &crate::estimation::SpeedEstimate;
    let series: [(&str, Pick); 3] = [
        ("Model I floor", |r| &r.speed_i_floor),
        ("Model I window", |r| &r.speed_i_window),
        ("Model II", |r| &r.speed_ii_sim),
    ];
    for (name, pick) in series {
        let est: Vec<_> = t.rows.iter().map(|r| pick(r).clone()).collect();
        let (_, z) = trend_test(&deltas, &est);
        checks.push(Check::below(
            format!("{name} weighted trend z-score"),
            z,
            -3.0,
        ));
        // non-increasing within noise: every rise below 3 joint SE
        let worst = est
            .windows(2)
            .map(|w| (w[1].mean - w[0].mean) / w[0].joint_se(&w[1]))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::below(
            format!("{name} largest step rise in joint SE"),
            worst,
            3.0,
        ));
    }
    Ok(checks)
}

fn domination(sc: Scale, seed: u64) -> Result<Vec<Check>> {
    let params = Params::at_origin(0.5, 1.0)?;
    let grid = SimGrid::new(SimGrid::DEFAULT_DT, 500.0, seed)?;
    let policy = TruncationPolicy::default_window();
    let violations = run_replicates(seed, 400, sc.seeds, |_, s| {
        Ok(simulate_model1_coupled_with(s, &params, &grid, &policy, false)?.domination_violations)
    })?;
    let clean = violations.iter().filter(|&&v| v == 0).count();
    Ok(vec![Check::near(
        format!(
            "seeds with thinned <= full at every grid time (of {})",
            sc.seeds
        ),
        clean as f64,
        sc.seeds as f64,
        0.0,
    )])
}

fn coupling(sc: Scale, seed: u64) -> Result<Vec<Check>> {
    let params = Params::at_origin(0.5, 1.0)?;
    let grid = SimGrid::new(SimGrid::DEFAULT_DT, 1000.0, seed)?;
    let coupled = run_replicates(seed, 500, sc.seeds, |_, s| {
        Ok(
            simulate_coupled_pair_with(s, &params, 0.0, 5.0, &grid, false)?
                .coupling_time
                .is_some(),
        )
    })?;
    let n = coupled.iter().filter(|&&c| c).count();
    Ok(vec![Check::above(
        format!("pairs coupled before T=1000 (of {})", sc.seeds),
        n as f64,
        sc.coupled_min as f64 - 0.5,
    )])
}

const NUMERICS_CASES: [(f64, f64); 6] = [
    (0.5, 0.25),
    (0.5, 0.5),
    (0.5, 1.0),
    (0.5, 2.0),
    (1.0, 1.0),
    (2.0, 1.0),
];

fn numerics(airy_fn: AiryFn) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let grid: Vec<f64> = (0..=800).map(|i| i as f64 * 0.01).collect();
    let inv_pi = std::f64::consts::FRAC_1_PI;
    let mut worst: f64 = 0.0;
    for &x in &grid {
        worst = worst.max((airy_fn(x)?.wronskian() - inv_pi).abs());
    }
    checks.push(Check::below(
        "Airy Wronskian deviation on [0, 8]",
        worst,
        1e-8,
    ));
    let mut worst: f64 = 0.0;
    for &(g, d) in &NUMERICS_CASES {
        let ctx = GreenContext::with_evaluator(Params::at_origin(g, d)?, airy_fn)?;
        for &x in &grid {
            worst = worst.max((ctx.wronskian_at(x)? - ctx.w).abs());
        }
    }
    checks.push(Check::below(
        "(psi, phi) Wronskian deviation on [0, 8]",
        worst,
        1e-8,
    ));
    let (mut res, mut curv): (f64, f64) = (0.0, 0.0);
    let mut single = 0;
    for &(g, d) in &NUMERICS_CASES {
        let p = Params::at_origin(g, d)?;
        let ode = solve_speed_ode(&p, 1e4, 1e-12)?;
        let (ra, rb) = ode.residuals();
        res = res.max(ra).max(rb);
        curv = curv.max(ode.a_second_derivative_at_zero().abs());
        if class_changes(&shooting_scan(&p, 200)?) == 1 {
            single += 1;
        }
    }
    checks.push(Check::below("largest ODE residual", res, 1e-6));
    checks.push(Check::below("largest |A''(0)|", curv, 1e-6));
    checks.push(Check::near(
        "parameter sets with exactly one classifier change",
        single as f64,
        NUMERICS_CASES.len() as f64,
        0.0,
    ));
    Ok(checks)
}

fn positivity(t: CompareTable, grid: &SimGrid, sc: Scale) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for r in &t.rows {
        for (mode, e) in [("floor", &r.speed_i_floor), ("window", &r.speed_i_window)] {
            checks.push(Check::above(
                format!("(gamma=0.5, delta={}) {mode} lower 99% bound", r.delta),
                e.with_level(0.99)?.ci.0,
                0.0,
            ));
        }
    }
    // the edge delta = 8 gamma
    let p = Params::at_origin(0.5, 4.0)?;
    for (k, (mode, policy)) in [
        ("floor", TruncationPolicy::floor()),
        ("window", TruncationPolicy::default_window()),
    ]
    .into_iter()
    .enumerate()
    {
        let e = estimate_model_speed(
            &SpeedModel::Model1(policy),
            &p,
            grid,
            sc.reps,
            600 + k as u32,
        )?;
        checks.push(Check::above(
            format!("(gamma=0.5, delta=4) {mode} lower 99% bound"),
            e.with_level(0.99)?.ci.0,
            0.0,
        ));
    }
    // thinned Model I: renewal estimator agrees with the terminal one
    let p = Params::at_origin(0.5, 1.0)?;
    let policy = TruncationPolicy::default_window();
    let runs = run_replicates(grid.seed, 700, sc.reps / 4, |_, s| {
        let run = crate::model1::simulate_model1_thinned_with(s, &p, grid, &policy, false)?;
        renewal_increments(&run.renewals)
    })?;
    let inc: Vec<(f64, f64)> = runs.concat();
    let e = estimate_speed_renewal(&inc, 0.0)?;
    checks.push(Check::above(
        "thinned (delta=1) renewal lower 99% bound",
        e.with_level(0.99)?.ci.0,
        0.0,
    ));
    Ok(checks)
}

/// An Airy evaluator with `Bi'` off by one part in a million, for fault injection.
pub fn corrupted_airy(x: f64) -> Result<AiryPair> {
    let mut v = airy(x)?;
    v.bi_prime *= 1.0 + 1e-6;
    Ok(v)
}
