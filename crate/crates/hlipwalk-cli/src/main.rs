//! Command-line front end: runs scenarios, estimates disturbance bounds,
//! computes invariant error sets, and renders plots.
//!
//! Exit codes: 0 success, 2 malformed input, 3 runtime or simulation failure,
//! 4 unstable closed loop.

mod output;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hlipwalk::batch::{run_configs, run_scenarios};
use hlipwalk::geom::{
    estimate_w, linear_map, minkowski_sum, mrpi_outer, support, DisturbanceSample, Zonotope,
};
use hlipwalk::hlip::{dlqr_gain, make_params, s2s_matrices, spectral_radius, LqrWeights};
use hlipwalk::sim::{run_scenario, ScenarioConfig, ScenarioResult};
use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;

use output::RunReport;

#[derive(Parser)]
#[command(
    name = "hlipwalk",
    version,
    about = "Footstep planning and reduced-order gait simulation for stepping-controlled walking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenario configs and write CSV, JSON, and SVG artifacts.
    Run {
        /// Scenario config files (JSON).
        #[arg(required_unless_present = "config_flag", value_name = "CONFIG")]
        config: Vec<PathBuf>,
        /// Scenario config file (may repeat); same as passing it positionally.
        #[arg(long = "config", value_name = "CONFIG")]
        config_flag: Vec<PathBuf>,
        /// Output directory; with several configs each gets a subdirectory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override applied to every config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for independent scenarios.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a calibration scenario and bound the logged step disturbances.
    EstimateW {
        /// Scenario config file (JSON).
        #[arg(required_unless_present = "config_flag", conflicts_with = "config_flag", value_name = "CONFIG")]
        config: Option<PathBuf>,
        /// Scenario config file; same as passing it positionally.
        #[arg(long = "config", value_name = "CONFIG")]
        config_flag: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Relative inflation of the sample bounding box (overrides the config).
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Compute a disturbance-invariant error set from a disturbance bound.
    Rpi {
        /// Disturbance zonotope JSON file (as written by estimate-w).
        w: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenario config supplying model parameters and LQR weights.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Termination tolerance of the invariant-set recursion.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Diagonal LQR state weights, overriding the config.
        #[arg(long, num_args = 3, value_names = ["QC", "QP", "QV"])]
        q_diag: Option<Vec<f64>>,
        /// LQR input weight, overriding the config.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Re-render the SVG plots for an existing run directory.
    Plot {
        /// Run directory containing config.json, trajectory.csv, steps.csv.
        dir: PathBuf,
    },
    /// Run one scenario across consecutive seeds and aggregate the summaries.
    Sweep {
        /// Scenario config file (JSON).
        #[arg(required_unless_present = "config_flag", conflicts_with = "config_flag", value_name = "CONFIG")]
        config: Option<PathBuf>,
        /// Scenario config file; same as passing it positionally.
        #[arg(long = "config", value_name = "CONFIG")]
        config_flag: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of seeded runs.
        #[arg(long, default_value_t = 20)]
        runs: u64,
        /// First seed; later runs use seed+1, seed+2, ...
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

enum CliError {
    Config(String),
    Runtime(String),
    Unstable(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) | CliError::Unstable(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Unstable(_) => 4,
        }
    }
}

fn map_run_error(e: &hlipwalk::Error) -> CliError {
    use hlipwalk::Error::*;
    match e {
        InvalidParameter(_) | InvalidInput(_) | DimensionMismatch(_) | InvalidPhase(_) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Runtime(e.to_string()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("HLIPWALK_LOG", "warn"),
    )
    .format_timestamp(None)
    .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { mut config, config_flag, out, seed, jobs } => {
            config.extend(config_flag);
            cmd_run(config, out, seed, jobs)
        }
        Command::EstimateW { config, config_flag, out, seed, margin } => {
            let config = config.or(config_flag).expect("clap enforces a config");
            cmd_estimate_w(&config, out, seed, margin)
        }
        Command::Rpi { w, out, config, eps, q_diag, r } => {
            cmd_rpi(&w, out, config.as_deref(), eps, q_diag, r)
        }
        Command::Plot { dir } => cmd_plot(&dir),
        Command::Sweep { config, config_flag, out, runs, seed, jobs } => {
            let config = config.or(config_flag).expect("clap enforces a config");
            cmd_sweep(&config, out, runs, seed, jobs)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn effective_seed(cfg: &ScenarioConfig, flag: Option<u64>) -> u64 {
    flag.or(cfg.seed).unwrap_or(cfg.model.rng_seed)
}

fn default_out_dir(cfg: &ScenarioConfig, config_path: &Path, suffix: &str) -> PathBuf {
    if let Some(dir) = &cfg.out_dir {
        return PathBuf::from(dir);
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    PathBuf::from("runs").join(format!("{stem}{suffix}"))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = jobs {
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => return pool.install(f),
                Err(e) => {
                    log::warn!("could not build a {n}-thread pool ({e}); using the default")
                }
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        if jobs.is_some() {
            log::warn!("--jobs has no effect in a build without the `parallel` feature");
        }
        f()
    }
}

/// Writes every artifact of one finished run into `dir`.
fn write_run_outputs(
    dir: &Path,
    cfg: &ScenarioConfig,
    seed: u64,
    result: &ScenarioResult,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    let rt = CliError::Runtime;
    output::write_json(&dir.join("config.json"), cfg).map_err(rt)?;
    output::write_trajectory_csv(&dir.join("trajectory.csv"), &result.trajectory).map_err(rt)?;
    output::write_steps_csv(&dir.join("steps.csv"), &result.steps).map_err(rt)?;
    let report = RunReport {
        name: cfg.name.clone(),
        seed,
        summary: result.summary.clone(),
    };
    output::write_json(&dir.join("summary.json"), &report).map_err(rt)?;
    if let Some(w) = &result.disturbance_w {
        output::write_json(&dir.join("w_set.json"), w).map_err(rt)?;
    }
    if let Some(e) = &result.invariant_set {
        output::write_json(&dir.join("e_set.json"), e).map_err(rt)?;
    }
    let path_svg = svg::plot_path(cfg, &result.trajectory, &result.steps).map_err(rt)?;
    fs::write(dir.join("path.svg"), path_svg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let ts_svg = svg::plot_timeseries(cfg, &result.trajectory).map_err(rt)?;
    fs::write(dir.join("timeseries.svg"), ts_svg)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    match svg::plot_steps(&result.steps) {
        Some(s) => fs::write(dir.join("steps.svg"), s)
            .map_err(|e| CliError::Runtime(e.to_string()))?,
        None => log::warn!("no step records; skipping steps.svg"),
    }
    if let Some(s) = svg::plot_errors(&result.steps, result.invariant_set.as_ref()) {
        fs::write(dir.join("errors.svg"), s).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn cmd_run(
    configs: Vec<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    let mut loaded = Vec::with_capacity(configs.len());
    for p in &configs {
        loaded.push((p.clone(), load_config(p)?));
    }
    let multi = loaded.len() > 1;
    let dirs: Vec<PathBuf> = loaded
        .iter()
        .map(|(p, cfg)| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            match (&out, multi) {
                (Some(base), true) => base.join(&stem),
                (Some(base), false) => base.clone(),
                (None, _) => default_out_dir(cfg, p, ""),
            }
        })
        .collect();
    let cfgs: Vec<ScenarioConfig> = loaded.iter().map(|(_, c)| c.clone()).collect();
    let results = with_pool(jobs, || run_configs(&cfgs, seed));

    let mut failures = Vec::new();
    for (((path, cfg), dir), res) in loaded.iter().zip(&dirs).zip(results) {
        match res {
            Ok(result) => {
                write_run_outputs(dir, cfg, effective_seed(cfg, seed), &result)?;
                println!(
                    "{}: {} steps, rms position error {:.4} m -> {}",
                    cfg.name,
                    result.summary.steps_total,
                    result.summary.rms_position_error,
                    dir.display()
                );
                if let Some(msg) = &result.summary.failure {
                    failures.push(format!(
                        "{}: {msg} (partial outputs in {})",
                        path.display(),
                        dir.display()
                    ));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", path.display())),
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(failures.join("; ")))
    }
}

fn cmd_estimate_w(
    config: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    margin: Option<f64>,
) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    if let Some(m) = margin {
        if !m.is_finite() || m < 0.0 {
            return Err(CliError::Config(format!(
                "margin must be finite and nonnegative, got {m}"
            )));
        }
        cfg.w_margin = m;
    }
    let seed_eff = effective_seed(&cfg, seed);
    let result = run_scenario(&cfg, Some(seed_eff)).map_err(|e| map_run_error(&e))?;
    let samples: Vec<DisturbanceSample> = result
        .steps
        .iter()
        .filter_map(|s| s.w)
        .map(|w| DisturbanceSample { w })
        .collect();
    let w_set = estimate_w(&samples, cfg.w_margin).map_err(|e| map_run_error(&e))?;

    let dir = out.unwrap_or_else(|| default_out_dir(&cfg, config, "-w"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    output::write_json(&dir.join("w_set.json"), &w_set).map_err(CliError::Runtime)?;
    let mut csv = String::from("k,t,plane,w0,w1,w2\n");
    for s in result.steps.iter().filter(|s| s.w.is_some()) {
        let w = s.w.unwrap();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.k,
            s.t,
            s.plane.as_str(),
            w[0],
            w[1],
            w[2]
        ));
    }
    fs::write(dir.join("w_samples.csv"), csv)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "{}: {} samples, margin {}, half-widths [{:.6}, {:.6}, {:.6}] -> {}",
        cfg.name,
        samples.len(),
        cfg.w_margin,
        w_set.generators.iter().map(|g| g[0].abs()).sum::<f64>(),
        w_set.generators.iter().map(|g| g[1].abs()).sum::<f64>(),
        w_set.generators.iter().map(|g| g[2].abs()).sum::<f64>(),
        dir.display()
    );
    if let Some(msg) = &result.summary.failure {
        return Err(CliError::Runtime(format!(
            "calibration run failed partway: {msg} (partial outputs in {})",
            dir.display()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct CertificateDirection {
    direction: [f64; 3],
    lhs: f64,
    rhs: f64,
    residual: f64,
}

#[derive(Serialize)]
struct Certificate {
    eps: f64,
    spectral_radius: f64,
    max_residual: f64,
    directions: Vec<CertificateDirection>,
}

/// The 26 unit directions with components in {-1, 0, 1}.
fn certificate_directions() -> Vec<[f64; 3]> {
    let mut dirs = Vec::with_capacity(26);
    for sx in [-1.0, 0.0, 1.0] {
        for sy in [-1.0, 0.0, 1.0] {
            for sz in [-1.0, 0.0, 1.0] {
                let n = f64::sqrt(sx * sx + sy * sy + sz * sz);
                if n > 0.0 {
                    dirs.push([sx / n, sy / n, sz / n]);
                }
            }
        }
    }
    dirs
}

fn cmd_rpi(
    w_file: &Path,
    out: Option<PathBuf>,
    config: Option<&Path>,
    eps: f64,
    q_diag: Option<Vec<f64>>,
    r: Option<f64>,
) -> Result<(), CliError> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(CliError::Config(format!("eps must be positive, got {eps}")));
    }
    let w: Zonotope = output::read_json(w_file).map_err(CliError::Config)?;
    let (params, mut weights) = match config {
        Some(p) => {
            let cfg = load_config(p)?;
            let params = make_params(cfg.hlip.z0, cfg.hlip.g, cfg.hlip.t_ssp, cfg.hlip.t_dsp)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let weights = LqrWeights {
                q: Matrix3::from_partial_diagonal(&cfg.lqr.q_diag),
                r: cfg.lqr.r,
            };
            (params, weights)
        }
        None => {
            let params = make_params(1.0, 9.81, 0.35, 0.05)
                .map_err(|e| CliError::Config(e.to_string()))?;
            (params, LqrWeights::default())
        }
    };
    if let Some(qd) = q_diag {
        weights.q = Matrix3::from_partial_diagonal(&qd);
    }
    if let Some(rv) = r {
        weights.r = rv;
    }
    let m = s2s_matrices(&params);
    let k = dlqr_gain(&m.a, &m.b, &weights).map_err(|e| CliError::Config(e.to_string()))?;
    let acl = m.a + m.b * k;
    let rho = spectral_radius(&acl);
    if rho >= 1.0 {
        return Err(CliError::Unstable(format!(
            "closed loop is unstable: spectral radius {rho:.6} >= 1"
        )));
    }
    let e_set = mrpi_outer(&acl, &w, eps).map_err(|e| map_run_error(&e))?;

    let acl_dyn = DMatrix::from_column_slice(3, 3, acl.as_slice());
    let mapped = linear_map(&acl_dyn, &e_set).map_err(|e| map_run_error(&e))?;
    let pushed = minkowski_sum(&mapped, &w).map_err(|e| map_run_error(&e))?;
    let mut directions = Vec::with_capacity(26);
    let mut max_residual = f64::NEG_INFINITY;
    for d in certificate_directions() {
        let lhs = support(&pushed, &d).map_err(|e| map_run_error(&e))?;
        let rhs = support(&e_set, &d).map_err(|e| map_run_error(&e))?;
        let residual = lhs - rhs;
        max_residual = max_residual.max(residual);
        directions.push(CertificateDirection { direction: d, lhs, rhs, residual });
    }
    if max_residual > eps {
        return Err(CliError::Runtime(format!(
            "invariance certificate failed: residual {max_residual:.3e} exceeds eps {eps:.3e}"
        )));
    }
    let cert = Certificate { eps, spectral_radius: rho, max_residual, directions };

    let dir = out.unwrap_or_else(|| PathBuf::from("rpi"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    output::write_json(&dir.join("e_set.json"), &e_set).map_err(CliError::Runtime)?;
    output::write_json(&dir.join("certificate.json"), &cert).map_err(CliError::Runtime)?;
    println!(
        "invariant set: {} generators, spectral radius {:.4}, max residual {:.3e} -> {}",
        e_set.generators.len(),
        rho,
        max_residual,
        dir.display()
    );
    Ok(())
}

fn cmd_plot(dir: &Path) -> Result<(), CliError> {
    let cfg: ScenarioConfig =
        output::read_json(&dir.join("config.json")).map_err(CliError::Config)?;
    let traj =
        output::read_trajectory_csv(&dir.join("trajectory.csv")).map_err(CliError::Config)?;
    let steps = output::read_steps_csv(&dir.join("steps.csv")).map_err(CliError::Config)?;
    let e_path = dir.join("e_set.json");
    let e_set: Option<Zonotope> = if e_path.exists() {
        Some(output::read_json(&e_path).map_err(CliError::Config)?)
    } else {
        None
    };

    let path_svg = svg::plot_path(&cfg, &traj, &steps).map_err(CliError::Config)?;
    fs::write(dir.join("path.svg"), path_svg)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let ts_svg = svg::plot_timeseries(&cfg, &traj).map_err(CliError::Config)?;
    fs::write(dir.join("timeseries.svg"), ts_svg)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    match svg::plot_steps(&steps) {
        Some(s) => {
            fs::write(dir.join("steps.svg"), s)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        None => {
            log::warn!("steps.csv has no rows; skipping steps.svg and errors.svg");
            eprintln!("warning: steps.csv has no rows; step plots omitted");
        }
    }
    if let Some(s) = svg::plot_errors(&steps, e_set.as_ref()) {
        fs::write(dir.join("errors.svg"), s)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    println!("plots written to {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    seed: u64,
    steps_total: usize,
    rms_position_error: f64,
    max_position_error: f64,
    steps_tested: usize,
    steps_in_set: usize,
    fraction_e_in_set: Option<f64>,
    fell: bool,
    failure: Option<String>,
}

#[derive(Serialize)]
struct SweepAggregate {
    mean_rms_position_error: f64,
    worst_rms_position_error: f64,
    worst_max_position_error: f64,
    pooled_steps_tested: usize,
    pooled_steps_in_set: usize,
    pooled_fraction_in_set: Option<f64>,
    falls: usize,
}

#[derive(Serialize)]
struct SweepReport {
    name: String,
    runs: u64,
    base_seed: u64,
    rows: Vec<SweepRow>,
    aggregate: SweepAggregate,
}

fn cmd_sweep(
    config: &Path,
    out: Option<PathBuf>,
    runs: u64,
    seed: Option<u64>,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    if runs == 0 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    let cfg = load_config(config)?;
    let base_seed = effective_seed(&cfg, seed);
    let seeds: Vec<u64> = (0..runs).map(|i| base_seed + i).collect();
    let results = with_pool(jobs, || run_scenarios(&cfg, &seeds));

    let mut rows = Vec::with_capacity(results.len());
    let mut failed = 0usize;
    for (s, res) in seeds.iter().zip(results) {
        match res {
            Ok(r) => {
                if r.summary.fell || r.summary.failure.is_some() {
                    failed += 1;
                }
                rows.push(SweepRow {
                    seed: *s,
                    steps_total: r.summary.steps_total,
                    rms_position_error: r.summary.rms_position_error,
                    max_position_error: r.summary.max_position_error,
                    steps_tested: r.summary.steps_tested,
                    steps_in_set: r.summary.steps_in_set,
                    fraction_e_in_set: r.summary.fraction_e_in_set,
                    fell: r.summary.fell,
                    failure: r.summary.failure.clone(),
                });
            }
            Err(e) => {
                failed += 1;
                rows.push(SweepRow {
                    seed: *s,
                    steps_total: 0,
                    rms_position_error: f64::NAN,
                    max_position_error: f64::NAN,
                    steps_tested: 0,
                    steps_in_set: 0,
                    fraction_e_in_set: None,
                    fell: false,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    let finished: Vec<&SweepRow> = rows.iter().filter(|r| r.failure.is_none()).collect();
    let mean_rms = if finished.is_empty() {
        f64::NAN
    } else {
        finished.iter().map(|r| r.rms_position_error).sum::<f64>() / finished.len() as f64
    };
    let worst_rms = finished
        .iter()
        .map(|r| r.rms_position_error)
        .fold(f64::NAN, f64::max);
    let worst_max = finished
        .iter()
        .map(|r| r.max_position_error)
        .fold(f64::NAN, f64::max);
    let tested: usize = rows.iter().map(|r| r.steps_tested).sum();
    let in_set: usize = rows.iter().map(|r| r.steps_in_set).sum();
    let report = SweepReport {
        name: cfg.name.clone(),
        runs,
        base_seed,
        aggregate: SweepAggregate {
            mean_rms_position_error: mean_rms,
            worst_rms_position_error: worst_rms,
            worst_max_position_error: worst_max,
            pooled_steps_tested: tested,
            pooled_steps_in_set: in_set,
            pooled_fraction_in_set: if tested > 0 {
                Some(in_set as f64 / tested as f64)
            } else {
                None
            },
            falls: rows.iter().filter(|r| r.fell).count(),
        },
        rows,
    };

    let dir = out.unwrap_or_else(|| default_out_dir(&cfg, config, "-sweep"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    output::write_json(&dir.join("sweep.json"), &report).map_err(CliError::Runtime)?;
    println!(
        "{}: {} runs from seed {}, mean rms {:.4} m, pooled in-set fraction {} -> {}",
        report.name,
        runs,
        base_seed,
        report.aggregate.mean_rms_position_error,
        report
            .aggregate
            .pooled_fraction_in_set
            .map(|f| format!("{f:.4}"))
            .unwrap_or_else(|| "n/a".into()),
        dir.display()
    );
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "{failed} of {runs} runs failed; details in {}",
            dir.join("sweep.json").display()
        )));
    }
    Ok(())
}
