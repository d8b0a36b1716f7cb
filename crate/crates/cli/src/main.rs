//! `ratchet`: configuration-driven experiment runner.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 runtime error, 4 numerics
//! (shooting) failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratchet_core::estimation::{run_replicates, MODEL1_LIMIT_NOTE};
use ratchet_core::validation::{corrupted_airy, validate_with, Suite};
use ratchet_core::{
    compare_models, density_fy, estimate_speed_renewal, estimate_speed_terminal,
    renewal_increments, scaling_collapse_check, simulate_model1_thinned_with, simulate_model1_with,
    simulate_model2_activepoint_with, simulate_model2_with, solve_speed_ode, speed_delta0,
    JumpRecord, PathSample, RatchetError, Renewal, SpeedModel,
};
use serde::Serialize;

use config::{ExperimentConfig, Format, ModelKind, TruncationKind};
use output::{real, FileEntry, Writer};

#[derive(Parser)]
#[command(
    name = "ratchet",
    version,
    about = "Broken Brownian ratchet experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Binding rate per unit length and time.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Dissociation rate.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Initial gap X_0 - R_0.
    #[arg(long, global = true)]
    x0: Option<f64>,
    /// Time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Simulated time per replicate.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; repeat for several.
    #[arg(long = "format", global = true, value_enum)]
    formats: Vec<Format>,
    /// Model I truncation of the molecule field.
    #[arg(long, global = true, value_enum)]
    truncation: Option<TruncationKind>,
    /// Window depth below the boundary, in units of delta / gamma.
    #[arg(long, global = true)]
    window_factor: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated simulation of one model.
    Simulate {
        #[arg(long, value_enum)]
        model: Option<ModelKind>,
    },
    /// Solve the speed ODE.
    Ode {
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Model I vs Model II speed table over a delta grid.
    Compare {
        /// Comma-separated list, e.g. 0,0.25,0.5,1,2
        #[arg(long, value_delimiter = ',')]
        delta_grid: Option<Vec<f64>>,
    },
    /// Check speed(gamma, delta) = gamma^(1/3) speed(1, delta gamma^(-2/3)).
    ScalingCheck {
        #[arg(long, value_enum)]
        model: Option<ModelKind>,
    },
    /// Run the acceptance suite.
    Validate {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
        /// Test hook: corrupt the Airy evaluator fed to the Wronskian checks.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

enum Failure {
    Config(String),
    Runtime(String),
    Numerics(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Numerics(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Numerics(m) => m,
        }
    }
}

impl From<RatchetError> for Failure {
    fn from(e: RatchetError) -> Self {
        match e {
            RatchetError::BracketFailure { .. } => Failure::Numerics(e.to_string()),
            RatchetError::InvalidParameter(_) | RatchetError::OutOfRange { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o: {e}"))
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    software: String,
    subcommand: &'a str,
    seed: u64,
    wall_seconds: f64,
    config: &'a ExperimentConfig,
    files: &'a [FileEntry],
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ratchet: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn effective_config(c: &Common, command: &Command) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text).map_err(Failure::Config)?
        }
        None => ExperimentConfig::default(),
    };
    macro_rules! set {
        ($flag:expr, $field:expr) => {
            if let Some(v) = $flag {
                $field = v;
            }
        };
    }
    set!(c.gamma, cfg.params.gamma);
    set!(c.delta, cfg.params.delta);
    set!(c.x0, cfg.params.x0);
    set!(c.dt, cfg.grid.dt);
    set!(c.horizon, cfg.grid.horizon);
    set!(c.seed, cfg.grid.seed);
    set!(c.replicates, cfg.replicates);
    set!(c.out.clone(), cfg.output_dir);
    set!(c.truncation, cfg.truncation.mode);
    set!(c.window_factor, cfg.truncation.window_factor);
    if !c.formats.is_empty() {
        cfg.formats = c.formats.clone();
        cfg.formats.dedup();
    }
    match command {
        Command::Simulate { model } => {
            set!(*model, cfg.model);
            if matches!(cfg.model, ModelKind::Ode | ModelKind::Compare) {
                return Err(Failure::Config(
                    "simulate needs one of model1, model1-thinned, model2, model2-activepoint"
                        .into(),
                ));
            }
            cfg.delta_grid = None;
        }
        Command::Ode { z_max, tol } => {
            cfg.model = ModelKind::Ode;
            cfg.delta_grid = None;
            set!(*z_max, cfg.ode.z_max);
            set!(*tol, cfg.ode.tol);
        }
        Command::Compare { delta_grid } => {
            cfg.model = ModelKind::Compare;
            if let Some(g) = delta_grid {
                cfg.delta_grid = Some(g.clone());
            }
        }
        Command::ScalingCheck { model } => {
            set!(*model, cfg.model);
            if matches!(cfg.model, ModelKind::Ode | ModelKind::Compare) {
                cfg.model = ModelKind::Model2;
            }
            cfg.delta_grid = None;
        }
        Command::Validate { .. } => {}
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = effective_config(&cli.common, &cli.command)?;
    let start = Instant::now();
    let mut w = Writer::new(&cfg.output_dir).map_err(|e| {
        Failure::Config(format!(
            "output directory {}: {e}",
            cfg.output_dir.display()
        ))
    })?;
    let name = match &cli.command {
        Command::Simulate { .. } => {
            simulate(&cfg, &mut w)?;
            "simulate"
        }
        Command::Ode { .. } => {
            ode(&cfg, &mut w)?;
            "ode"
        }
        Command::Compare { .. } => {
            compare(&cfg, &mut w)?;
            "compare"
        }
        Command::ScalingCheck { .. } => {
            scaling(&cfg, &mut w)?;
            "scaling-check"
        }
        Command::Validate {
            suite,
            inject_fault,
        } => {
            validate(*suite, *inject_fault, &mut w)?;
            "validate"
        }
    };
    w.write("config.toml", cfg.to_toml().as_bytes())?;
    let manifest = RunManifest {
        software: format!("ratchet {}", env!("CARGO_PKG_VERSION")),
        subcommand: name,
        seed: cfg.grid.seed,
        wall_seconds: start.elapsed().as_secs_f64(),
        config: &cfg,
        files: &w.files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(cfg.output_dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn speed_model(cfg: &ExperimentConfig) -> Result<SpeedModel, Failure> {
    let policy = cfg.policy().map_err(Failure::Config)?;
    Ok(match cfg.model {
        ModelKind::Model1 => SpeedModel::Model1(policy),
        ModelKind::Model1Thinned => SpeedModel::Model1Thinned(policy),
        ModelKind::Model2 => SpeedModel::Model2,
        ModelKind::Model2Activepoint => SpeedModel::Model2ActivePoint,
        ModelKind::Ode | ModelKind::Compare => {
            return Err(Failure::Config("not a simulation model".into()))
        }
    })
}

struct Replicate {
    path: PathSample,
    records: Vec<JumpRecord>,
    renewals: Vec<Renewal>,
}

fn has(cfg: &ExperimentConfig, f: Format) -> bool {
    cfg.formats.contains(&f)
}

/// At most `max` evenly spaced indices of `0..n`, always including the last.
fn thin(n: usize, max: usize) -> Vec<usize> {
    let step = n.div_ceil(max).max(1);
    let mut idx: Vec<usize> = (0..n).step_by(step).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx
}

fn simulate(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), Failure> {
    let params = cfg.core_params().map_err(Failure::Config)?;
    let grid = cfg.core_grid().map_err(Failure::Config)?;
    let policy = cfg.policy().map_err(Failure::Config)?;
    let n = cfg.replicates;
    let record = n == 1;
    let model = cfg.model;
    let reps = run_replicates(grid.seed, 0, n, |_, s| {
        Ok(match model {
            ModelKind::Model1 => Replicate {
                path: simulate_model1_with(s, &params, &grid, &policy, record)?.path,
                records: vec![],
                renewals: vec![],
            },
            ModelKind::Model1Thinned => {
                let r = simulate_model1_thinned_with(s, &params, &grid, &policy, record)?;
                Replicate {
                    path: r.path,
                    records: vec![],
                    renewals: r.renewals,
                }
            }
            ModelKind::Model2 | ModelKind::Model2Activepoint => {
                let r = if model == ModelKind::Model2 {
                    simulate_model2_with(s, &params, &grid, record)?
                } else {
                    simulate_model2_activepoint_with(s, &params, &grid, record)?
                };
                Replicate {
                    path: r.path,
                    records: if record { r.records } else { vec![] },
                    renewals: vec![],
                }
            }
            ModelKind::Ode | ModelKind::Compare => unreachable!("validated"),
        })
    })?;

    let paths: Vec<PathSample> = reps.iter().map(|r| r.path.clone()).collect();
    let estimate = if n >= 2 {
        Some(estimate_speed_terminal(&paths)?)
    } else {
        None
    };
    let renewal_estimate = if model == ModelKind::Model1Thinned {
        let inc: Vec<(f64, f64)> = reps
            .iter()
            .filter_map(|r| renewal_increments(&r.renewals).ok())
            .flatten()
            .collect();
        estimate_speed_renewal(&inc, 0.0).ok()
    } else {
        None
    };

    let header = [
        "replicate",
        "speed",
        "terminal_time",
        "terminal_x",
        "terminal_r",
    ];
    let rows: Vec<Vec<String>> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                i.to_string(),
                real(p.terminal_speed()),
                real(p.terminal_time()),
                real(p.terminal_x()),
                real(p.terminal_r()),
            ]
        })
        .collect();
    if has(cfg, Format::Csv) {
        w.csv("replicates.csv", &header, &rows)?;
        if record {
            let r = &reps[0];
            let p = &r.path;
            let pr: Vec<Vec<String>> = thin(p.len(), 5000)
                .into_iter()
                .map(|i| vec![real(p.times[i]), real(p.x[i]), real(p.r[i])])
                .collect();
            w.csv("path.csv", &["t", "x", "r"], &pr)?;
            let jr: Vec<Vec<String>> = p
                .jumps
                .iter()
                .map(|j| {
                    vec![
                        real(j.time),
                        real(j.old),
                        real(j.new),
                        format!("{:?}", j.cause),
                        real(j.x),
                    ]
                })
                .collect();
            w.csv("jumps.csv", &["time", "old", "new", "cause", "x"], &jr)?;
            if !r.records.is_empty() {
                let rr: Vec<Vec<String>> = r
                    .records
                    .iter()
                    .map(|k| {
                        vec![
                            real(k.y),
                            real(k.w),
                            real(k.eta),
                            format!("{:?}", k.direction).to_lowercase(),
                            real(k.gap_before),
                        ]
                    })
                    .collect();
                w.csv(
                    "records.csv",
                    &["y", "w", "eta", "direction", "gap_before"],
                    &rr,
                )?;
            }
            if model == ModelKind::Model1Thinned {
                let rn: Vec<Vec<String>> = r
                    .renewals
                    .iter()
                    .map(|k| vec![real(k.time), real(k.x)])
                    .collect();
                w.csv("renewals.csv", &["time", "x"], &rn)?;
            }
        }
    }
    if has(cfg, Format::Json) {
        #[derive(Serialize)]
        struct Summary<'a> {
            model: ModelKind,
            replicates: usize,
            speeds: Vec<f64>,
            estimate: &'a Option<ratchet_core::SpeedEstimate>,
            renewal_estimate: &'a Option<ratchet_core::SpeedEstimate>,
            notes: Vec<&'a str>,
        }
        let mut notes = Vec::new();
        if matches!(model, ModelKind::Model1 | ModelKind::Model1Thinned) {
            notes.push(MODEL1_LIMIT_NOTE);
            if cfg.truncation.mode == TruncationKind::Window {
                notes
                    .push("equilibrium-window truncation is an extension of the floor-at-0 scheme");
            }
        }
        w.json(
            "summary.json",
            &Summary {
                model,
                replicates: n,
                speeds: paths.iter().map(PathSample::terminal_speed).collect(),
                estimate: &estimate,
                renewal_estimate: &renewal_estimate,
                notes,
            },
        )?;
    }
    if has(cfg, Format::Gnuplot) {
        if record {
            let p = &reps[0].path;
            let pr: Vec<Vec<String>> = thin(p.len(), 5000)
                .into_iter()
                .map(|i| vec![real(p.times[i]), real(p.x[i]), real(p.r[i])])
                .collect();
            w.gnuplot(
                "path",
                &["t", "x", "r"],
                &pr,
                "set xlabel 't'\nplot datafile using 1:2 with lines title 'X', \
                 datafile using 1:3 with steps title 'R'\n",
            )?;
        } else {
            let sr: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r[0].clone(), r[1].clone()])
                .collect();
            w.gnuplot(
                "speeds",
                &["replicate", "speed"],
                &sr,
                "set xlabel 'replicate'\nset ylabel 'X_T / T'\n\
                 plot datafile using 1:2 with points title 'terminal speed'\n",
            )?;
        }
    }
    if let Some(e) = &estimate {
        println!(
            "speed {:.6} +- {:.6} ({}% CI [{:.6}, {:.6}], n = {})",
            e.mean,
            e.stderr,
            e.ci_level * 100.0,
            e.ci.0,
            e.ci.1,
            e.n_replicates
        );
    } else {
        println!("speed {:.6}", paths[0].terminal_speed());
    }
    Ok(())
}

fn ode(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), Failure> {
    let params = cfg.core_params().map_err(Failure::Config)?;
    let sol = solve_speed_ode(&params, cfg.ode.z_max, cfg.ode.tol).map_err(|e| match e {
        RatchetError::InvalidParameter(_) => Failure::Config(e.to_string()),
        _ => Failure::Numerics(e.to_string()),
    })?;
    let (res_a, res_b) = sol.residuals();
    if has(cfg, Format::Json) {
        #[derive(Serialize)]
        struct OdeSummary {
            gamma: f64,
            delta: f64,
            speed: f64,
            a_prime_0: f64,
            speed_delta0: f64,
            z_max: f64,
            segments: usize,
            density_scale: f64,
            stationary_mean_w: f64,
            stationary_mean_eta: f64,
            residual_a: f64,
            residual_b: f64,
            a_second_derivative_0: f64,
        }
        w.json(
            "ode.json",
            &OdeSummary {
                gamma: params.gamma,
                delta: params.delta,
                speed: sol.speed,
                a_prime_0: sol.a_prime_0,
                speed_delta0: speed_delta0(params.gamma)?,
                z_max: sol.z_max,
                segments: sol.segments,
                density_scale: sol.density_scale,
                stationary_mean_w: sol.stationary_mean_w(),
                stationary_mean_eta: sol.stationary_mean_eta(),
                residual_a: res_a,
                residual_b: res_b,
                a_second_derivative_0: sol.a_second_derivative_at_zero(),
            },
        )?;
    }
    let rows: Vec<Vec<String>> = thin(sol.z_grid.len(), 4000)
        .into_iter()
        .map(|i| {
            let z = sol.z_grid[i];
            vec![
                real(z),
                real(sol.a[i]),
                real(sol.a_prime[i]),
                real(sol.b[i]),
                real(density_fy(&sol, &params, z).unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    let header = ["z", "A", "A_prime", "B", "f_Y"];
    if has(cfg, Format::Csv) {
        w.csv("ode.csv", &header, &rows)?;
    }
    if has(cfg, Format::Gnuplot) {
        w.gnuplot(
            "ode",
            &header,
            &rows,
            "set xlabel 'z'\nplot datafile using 1:2 with lines title 'A', \
             datafile using 1:4 with lines title 'B', datafile using 1:5 with lines title 'f_Y'\n",
        )?;
    }
    println!("speed {:.10} (A'(0) = {:.10})", sol.speed, sol.a_prime_0);
    Ok(())
}

fn estimate_cells(e: &ratchet_core::SpeedEstimate) -> Vec<String> {
    vec![real(e.mean), real(e.stderr), real(e.ci.0), real(e.ci.1)]
}

fn compare(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), Failure> {
    let grid = cfg.core_grid().map_err(Failure::Config)?;
    let deltas = cfg.delta_grid.clone().expect("validated");
    let table = compare_models(cfg.params.gamma, &deltas, &grid, cfg.replicates)?;
    let mut names = vec!["delta".to_string()];
    for series in ["speed_I_floor", "speed_I_window", "speed_II_sim"] {
        for suffix in ["", "_se", "_ci_low", "_ci_high"] {
            names.push(format!("{series}{suffix}"));
        }
    }
    names.push("speed_II_ode".into());
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![real(r.delta)];
            v.extend(estimate_cells(&r.speed_i_floor));
            v.extend(estimate_cells(&r.speed_i_window));
            v.extend(estimate_cells(&r.speed_ii_sim));
            v.push(real(r.speed_ii_ode));
            v
        })
        .collect();
    if has(cfg, Format::Csv) {
        w.csv("compare.csv", &header, &rows)?;
    }
    if has(cfg, Format::Json) {
        w.json("compare.json", &table)?;
    }
    if has(cfg, Format::Gnuplot) {
        let v0 = speed_delta0(cfg.params.gamma)?;
        let body = format!(
            "set xlabel 'delta'\nset ylabel 'speed'\n\
             plot datafile using 1:2:3 with yerrorbars title 'Model I (floor)', \
             datafile using 1:6:7 with yerrorbars title 'Model I (window)', \
             datafile using 1:10:11 with yerrorbars title 'Model II (simulation)', \
             datafile using 1:14 with linespoints title 'Model II (ODE)', \
             {v0} with lines dashtype 2 title 'delta = 0 speed'\n"
        );
        w.gnuplot("speed_vs_delta", &header, &rows, &body)?;
    }
    for r in &table.rows {
        println!(
            "delta {:<6} I(floor) {:.4}  I(window) {:.4}  II(sim) {:.4}  II(ode) {:.4}",
            r.delta,
            r.speed_i_floor.mean,
            r.speed_i_window.mean,
            r.speed_ii_sim.mean,
            r.speed_ii_ode
        );
    }
    Ok(())
}

fn scaling(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), Failure> {
    let grid = cfg.core_grid().map_err(Failure::Config)?;
    let model = speed_model(cfg)?;
    if cfg.replicates < 2 {
        return Err(Failure::Config(
            "scaling-check needs at least 2 replicates".into(),
        ));
    }
    let r = scaling_collapse_check(
        &model,
        cfg.params.gamma,
        cfg.params.delta,
        &grid,
        cfg.replicates,
    )?;
    if has(cfg, Format::Json) {
        w.json("scaling.json", &r)?;
    }
    let header = [
        "gamma",
        "delta",
        "speed",
        "speed_se",
        "rescaled_speed",
        "rescaled_se",
        "predicted",
        "difference",
        "joint_se",
        "within_3se",
    ];
    let row = vec![
        real(r.gamma),
        real(r.delta),
        real(r.original.mean),
        real(r.original.stderr),
        real(r.rescaled.mean),
        real(r.rescaled.stderr),
        real(r.predicted),
        real(r.difference),
        real(r.joint_se),
        r.within_3se.to_string(),
    ];
    if has(cfg, Format::Csv) {
        w.csv("scaling.csv", &header, std::slice::from_ref(&row))?;
    }
    if has(cfg, Format::Gnuplot) {
        w.gnuplot(
            "scaling",
            &header[..9],
            &[row[..9].to_vec()],
            "set ylabel 'speed'\nset xrange [-0.5:1.5]\n\
             plot datafile using (0):3:4 with yerrorbars title 'speed(gamma, delta)', \
             datafile using (1):7:9 with yerrorbars title 'gamma^(1/3) speed(1, .)'\n",
        )?;
    }
    println!(
        "speed {:.6}  predicted {:.6}  difference {:.2e}  joint SE {:.2e}  {}",
        r.original.mean,
        r.predicted,
        r.difference,
        r.joint_se,
        if r.within_3se {
            "collapses"
        } else {
            "does not collapse"
        }
    );
    Ok(())
}

fn validate(suite: SuiteArg, inject_fault: bool, w: &mut Writer) -> Result<(), Failure> {
    let suite = match suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let report = if inject_fault {
        validate_with(suite, corrupted_airy)
    } else {
        validate_with(suite, ratchet_core::airy)
    };
    let text = report.render();
    print!("{text}");
    w.json("validation.json", &report)?;
    w.write("validation.txt", text.as_bytes())?;
    Ok(())
}
