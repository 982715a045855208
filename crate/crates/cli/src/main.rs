use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mirror_strat_cli::config::{ExperimentConfig, SolverChoice};
use mirror_strat_cli::{demo, experiments, output};
use mirror_strat_core::linalg;

#[derive(Parser)]
#[command(name = "mirror-strat", about = "Low-complexity regularization experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// TOML experiment configuration; defaults apply for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV/SVG/manifest outputs.
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count from the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the solver from the config.
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverChoice>,
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    match s {
        "fb" => Ok(SolverChoice::Fb),
        "dr" => Ok(SolverChoice::Dr),
        _ => Err(format!("unknown solver '{s}', expected fb or dr")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single generated instance and write its trace.
    Solve(CommonOpts),
    /// Compute the minimum-norm certificate of a single generated instance.
    Certificate(CommonOpts),
    /// Batch experiments over seeded trials.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCommand,
    },
    /// Small illustrative demos.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Histogram of the complexity excess delta over trials.
    Hist(CommonOpts),
    /// Per-iteration complexity paths with certificate overlays.
    Path(CommonOpts),
    /// Certified-uniqueness phase transition over a complexity grid.
    Transition {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated ground-truth complexities; defaults span the range.
        #[arg(long)]
        r0_grid: Option<String>,
        /// Comma-separated delta thresholds.
        #[arg(long, default_value = "0,1,2,4")]
        delta_grid: String,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Projection onto the unit box under perturbations of the data point.
    Projection {
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Comma-separated coordinates of the base point.
        #[arg(long, default_value = "2,1")]
        p0: String,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load_config(opts: &CommonOpts) -> Result<ExperimentConfig> {
    let mut cfg = match &opts.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = opts.trials {
        cfg.trials = trials;
    }
    if let Some(solver) = opts.solver {
        cfg.solver = solver;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow::anyhow!("bad grid entry '{t}': {e}")))
        .collect()
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow::anyhow!("bad coordinate '{t}': {e}")))
        .collect()
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(opts) => {
            let cfg = load_config(&opts)?;
            std::fs::create_dir_all(&opts.out_dir)?;
            let (problem, trace) = experiments::run_single_solve(&cfg)?;
            output::write_trace_csv(&trace, &opts.out_dir.join("trace.csv"))?;
            output::write_trace_svg(&trace, &opts.out_dir.join("trace.svg"))?;
            output::write_manifest(
                &cfg,
                serde_json::json!({
                    "lambda": problem.lambda,
                    "converged": trace.converged,
                    "iterations": trace.records.len(),
                }),
                &opts.out_dir.join("meta.json"),
            )?;
            let last = trace.records.last();
            println!(
                "solved: {} iterations, converged={}, final objective {}",
                trace.records.len(),
                trace.converged,
                last.map(|r| r.objective).unwrap_or(f64::NAN)
            );
        }
        Command::Certificate(opts) => {
            let cfg = load_config(&opts)?;
            let (problem, cert, unique) = experiments::run_single_certificate(&cfg)?;
            println!("lambda = {}", problem.lambda);
            println!("||q_bar|| = {}", linalg::norm2(&cert.q_bar));
            println!("feasibility residual = {:e}", cert.feasibility_residual);
            println!("iterations = {}", cert.solver_iterations);
            println!("dual stratum of u_bar: {}", cert.dual_stratum_of_u);
            println!("upper stratum: {}", cert.upper_stratum);
            println!("delta* = {}", cert.delta_star);
            println!("certified unique: {unique}");
        }
        Command::Experiment { which } => match which {
            ExperimentCommand::Hist(opts) => {
                let cfg = load_config(&opts)?;
                std::fs::create_dir_all(&opts.out_dir)?;
                let result = experiments::run_histogram(&cfg)?;
                output::write_histogram_csv(&result, &opts.out_dir.join("histogram.csv"))?;
                output::write_histogram_svg(&result, &opts.out_dir.join("histogram.svg"))?;
                let valid = result.records.iter().filter(|r| r.valid()).count();
                output::write_manifest(
                    &cfg,
                    serde_json::json!({ "valid_trials": valid }),
                    &opts.out_dir.join("meta.json"),
                )?;
                println!("histogram over {valid}/{} valid trials: {:?}", cfg.trials, result.histogram);
            }
            ExperimentCommand::Path(opts) => {
                let cfg = load_config(&opts)?;
                std::fs::create_dir_all(&opts.out_dir)?;
                let result = experiments::run_iteration_path(&cfg)?;
                output::write_paths_csv(&result, &opts.out_dir.join("paths.csv"))?;
                output::write_paths_svg(&result, &opts.out_dir.join("paths.svg"))?;
                output::write_manifest(
                    &cfg,
                    serde_json::json!({ "path_bounds": result.path_bounds }),
                    &opts.out_dir.join("meta.json"),
                )?;
                println!("recorded {} path points over {} trials", result.paths.len(), cfg.trials);
            }
            ExperimentCommand::Transition { common, r0_grid, delta_grid } => {
                let cfg = load_config(&common)?;
                std::fs::create_dir_all(&common.out_dir)?;
                let r0s = match r0_grid {
                    Some(s) => parse_grid(&s)?,
                    None => {
                        let max = cfg.r0_max()?;
                        // Roughly ten points spanning the feasible range.
                        let step = (max / 10).max(1);
                        (1..=max).step_by(step).collect()
                    }
                };
                let deltas = parse_grid(&delta_grid)?;
                let result = experiments::run_phase_transition(&cfg, &r0s, &deltas)?;
                output::write_phase_csv(&result, &common.out_dir.join("phase.csv"))?;
                output::write_phase_svg(&result, &common.out_dir.join("phase.svg"))?;
                output::write_manifest(
                    &cfg,
                    serde_json::json!({ "r0_grid": r0s, "delta_grid": deltas }),
                    &common.out_dir.join("meta.json"),
                )?;
                println!("phase table with {} rows written", result.phase.len());
            }
        },
        Command::Demo { which } => match which {
            DemoCommand::Projection { out_dir, p0, radius, samples, seed } => {
                let point = parse_point(&p0)?;
                let report = demo::projection_demo(&point, radius, samples, seed)?;
                std::fs::create_dir_all(&out_dir)?;
                std::fs::write(
                    out_dir.join("projection_demo.json"),
                    serde_json::to_string_pretty(&report)?,
                )?;
                println!("projection x(p0) = {:?}, certificate u(p0) = {:?}", report.x_hat, report.u_hat);
                println!("base stratum {}, upper stratum {}", report.base_stratum, report.upper_stratum);
                println!(
                    "{} distinct strata over {} samples, sandwich holds in {}",
                    report.observed.len(),
                    report.samples,
                    report.sandwich_passes
                );
                for (label, count) in &report.observed {
                    println!("  {label}: {count}");
                }
            }
        },
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
