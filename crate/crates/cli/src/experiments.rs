//! The three batch experiments: the complexity-excess histogram, per-iterate
//! complexity paths, and the certified-uniqueness phase transition.
//!
//! Trials run in parallel; records are keyed by trial index, so aggregation
//! is deterministic regardless of completion order.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use mirror_strat_core::certificates::{self, Certificate};
use mirror_strat_core::regularizers::{self, RegularizerKind};
use mirror_strat_core::solvers::{self, ProblemInstance, SolverParams};
use mirror_strat_core::strata::{self, Stratum};

use crate::config::{ExperimentConfig, SolverChoice};
use crate::instances;

/// Outcome of a single trial. `delta = r0_hat - r0_x0` when the solve
/// succeeded; certificate-derived fields are absent when the certificate
/// solver failed for that trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub r0_x0: usize,
    pub r0_hat: Option<usize>,
    pub delta: Option<i64>,
    pub delta_star: Option<usize>,
    pub certified_unique: Option<bool>,
    pub sandwich: Option<bool>,
    pub iterations: Option<usize>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn valid(&self) -> bool {
        self.error.is_none() && self.r0_hat.is_some()
    }
}

/// One point of the iteration-path experiment.
#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub trial: usize,
    pub k: usize,
    pub r0: usize,
    pub stratum: String,
}

/// One cell of the phase-transition table.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRow {
    pub r0: usize,
    pub delta: usize,
    pub rho: f64,
    pub n_certified: usize,
    pub n_trials: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    /// Integer-binned histogram of delta over valid trials.
    pub histogram: Vec<(i64, usize)>,
    pub paths: Vec<PathPoint>,
    /// Per-trial overlay bounds for path plots: (trial, r0_x0, dim(upper)).
    pub path_bounds: Vec<(usize, usize, Option<usize>)>,
    pub phase: Vec<PhaseRow>,
}

fn solver_params(config: &ExperimentConfig, problem: &ProblemInstance, max_iters: usize) -> SolverParams {
    let smax = problem.gram_spectral_norm();
    let mut params = SolverParams::new(
        config.gamma_scale * problem.lambda / smax,
        config.relaxation,
        max_iters,
        config.stop_tol,
    );
    params.classify = config.tolerances();
    params
}

fn certificate_for(
    config: &ExperimentConfig,
    problem: &ProblemInstance,
    x0: &[f64],
) -> Result<Certificate, String> {
    certificates::min_norm_certificate(
        &problem.phi,
        x0,
        &problem.regularizer,
        config.cert_max_iters,
        config.cert_tol,
        &config.tolerances(),
    )
    .map_err(|e| e.to_string())
}

fn sandwich_verdict(
    kind: &RegularizerKind,
    config: &ExperimentConfig,
    x0: &[f64],
    x_hat: &[f64],
    cert: &Certificate,
) -> Result<bool, String> {
    let tols = config.tolerances();
    let lower = regularizers::primal_stratum(kind, x0, &tols).map_err(|e| e.to_string())?;
    let mid = regularizers::primal_stratum(kind, x_hat, &tols).map_err(|e| e.to_string())?;
    strata::sandwich_holds(&lower, &mid, &cert.upper_stratum).map_err(|e| e.to_string())
}

/// Solve every trial to high accuracy and histogram the complexity excess
/// `delta = R0(x_hat) - R0(x0)`; certificates supply `delta*` and the
/// sandwich verdict per trial. Per-trial failures are recorded, not fatal.
pub fn run_histogram(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let kind = config.kind()?;
    let tols = config.tolerances();
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = instances::trial_seed(config.master_seed, t as u64);
            let mut rec = TrialRecord {
                trial: t,
                seed,
                r0_x0: 0,
                r0_hat: None,
                delta: None,
                delta_star: None,
                certified_unique: None,
                sandwich: None,
                iterations: None,
                error: None,
            };
            let problem = match instances::gen_instance(config, seed) {
                Ok(p) => p,
                Err(e) => {
                    rec.error = Some(e.to_string());
                    return rec;
                }
            };
            let x0 = problem.ground_truth.as_ref().unwrap().x0.clone();
            rec.r0_x0 = regularizers::complexity_index(&kind, &x0, &tols).unwrap_or(0);
            match solvers::reference_solve(&problem, config.stop_tol) {
                Ok(x_hat) => {
                    let r0_hat = regularizers::complexity_index(&kind, &x_hat, &tols)
                        .unwrap_or(rec.r0_x0);
                    rec.r0_hat = Some(r0_hat);
                    rec.delta = Some(r0_hat as i64 - rec.r0_x0 as i64);
                    match certificate_for(config, &problem, &x0) {
                        Ok(cert) => {
                            rec.delta_star = Some(cert.delta_star);
                            rec.certified_unique =
                                certificates::uniqueness_check(&problem.phi, &x0, &cert, &kind)
                                    .ok();
                            rec.sandwich =
                                sandwich_verdict(&kind, config, &x0, &x_hat, &cert).ok();
                            rec.iterations = Some(cert.solver_iterations);
                        }
                        Err(e) => rec.error = Some(e),
                    }
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();

    let mut histogram = std::collections::BTreeMap::new();
    for r in records.iter().filter(|r| r.valid()) {
        *histogram.entry(r.delta.unwrap()).or_insert(0usize) += 1;
    }
    Ok(ExperimentResult {
        records,
        histogram: histogram.into_iter().collect(),
        ..ExperimentResult::default()
    })
}

/// Run the configured solver for `path_iters` iterations per trial, recording
/// `R0(x_k)` and the stratum at every iterate, plus the certificate bounds
/// `R0(x0)` and `dim(upper)` for overlay.
pub fn run_iteration_path(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.path_iters == 0 {
        bail!("path_iters must be >= 1");
    }
    let kind = config.kind()?;
    let tols = config.tolerances();
    type PathOut = (TrialRecord, Vec<PathPoint>, (usize, usize, Option<usize>));
    let per_trial: Vec<PathOut> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = instances::trial_seed(config.master_seed, t as u64);
            let mut rec = TrialRecord {
                trial: t,
                seed,
                r0_x0: 0,
                r0_hat: None,
                delta: None,
                delta_star: None,
                certified_unique: None,
                sandwich: None,
                iterations: None,
                error: None,
            };
            let mut points = Vec::new();
            let problem = match instances::gen_instance(config, seed) {
                Ok(p) => p,
                Err(e) => {
                    rec.error = Some(e.to_string());
                    return (rec, points, (t, 0, None));
                }
            };
            let x0 = problem.ground_truth.as_ref().unwrap().x0.clone();
            rec.r0_x0 = regularizers::complexity_index(&kind, &x0, &tols).unwrap_or(0);
            let params = solver_params(config, &problem, config.path_iters);
            let hook = |r: &solvers::IterationRecord| {
                points.push(PathPoint {
                    trial: t,
                    k: r.k,
                    r0: r.complexity,
                    stratum: r.stratum.to_compact(),
                });
            };
            let solved = match config.solver {
                SolverChoice::Fb => solvers::fb_solve(&problem, &params, hook),
                SolverChoice::Dr => solvers::dr_solve(&problem, &params, hook),
            };
            match solved {
                Ok(trace) => {
                    let r0_hat = regularizers::complexity_index(&kind, &trace.final_iterate, &tols)
                        .unwrap_or(rec.r0_x0);
                    rec.r0_hat = Some(r0_hat);
                    rec.delta = Some(r0_hat as i64 - rec.r0_x0 as i64);
                    rec.iterations = Some(trace.records.len());
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            let upper_dim = match certificate_for(config, &problem, &x0) {
                Ok(cert) => {
                    rec.delta_star = Some(cert.delta_star);
                    Some(strata::dim(&cert.upper_stratum))
                }
                Err(_) => None,
            };
            let r0_x0 = rec.r0_x0;
            (rec, points, (t, r0_x0, upper_dim))
        })
        .collect();

    let mut result = ExperimentResult::default();
    for (rec, points, bound) in per_trial {
        result.records.push(rec);
        result.paths.extend(points);
        result.path_bounds.push(bound);
    }
    Ok(result)
}

/// Noiseless phase-transition map: for each ground-truth complexity in
/// `r0_grid`, the fraction of trials certified unique with `delta* <= delta`.
/// Certificate failures count as not-certified. The table is nondecreasing in
/// `delta` by construction.
pub fn run_phase_transition(
    config: &ExperimentConfig,
    r0_grid: &[usize],
    delta_grid: &[usize],
) -> Result<ExperimentResult> {
    config.validate()?;
    if r0_grid.is_empty() || delta_grid.is_empty() {
        bail!("phase-transition grids must be nonempty");
    }
    let max = config.r0_max()?;
    if r0_grid.iter().any(|&r| r == 0 || r > max) {
        bail!("r0 grid entry out of range 1..={max}");
    }
    let kind = config.kind()?;

    let cells: Vec<(usize, Vec<TrialRecord>)> = r0_grid
        .par_iter()
        .map(|&r0| {
            let cfg = ExperimentConfig { r0_target: r0, noise_std: 0.0, ..config.clone() };
            let records: Vec<TrialRecord> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    // Fold r0 into the seed stream so grid points differ.
                    let seed =
                        instances::trial_seed(cfg.master_seed ^ (r0 as u64) << 32, t as u64);
                    let mut rec = TrialRecord {
                        trial: t,
                        seed,
                        r0_x0: r0,
                        r0_hat: None,
                        delta: None,
                        delta_star: None,
                        certified_unique: None,
                        sandwich: None,
                        iterations: None,
                        error: None,
                    };
                    let problem = match instances::gen_instance(&cfg, seed) {
                        Ok(p) => p,
                        Err(e) => {
                            rec.error = Some(e.to_string());
                            return rec;
                        }
                    };
                    let x0 = &problem.ground_truth.as_ref().unwrap().x0;
                    match certificate_for(&cfg, &problem, x0) {
                        Ok(cert) => {
                            rec.delta_star = Some(cert.delta_star);
                            rec.certified_unique =
                                certificates::uniqueness_check(&problem.phi, x0, &cert, &kind)
                                    .ok();
                            rec.iterations = Some(cert.solver_iterations);
                        }
                        Err(e) => {
                            rec.certified_unique = Some(false);
                            rec.error = Some(e);
                        }
                    }
                    rec
                })
                .collect();
            (r0, records)
        })
        .collect();

    let mut result = ExperimentResult::default();
    for (r0, records) in cells {
        for &delta in delta_grid {
            let good = records
                .iter()
                .filter(|r| {
                    r.certified_unique == Some(true)
                        && r.delta_star.map(|d| d <= delta).unwrap_or(false)
                })
                .count();
            let certified = records.iter().filter(|r| r.certified_unique == Some(true)).count();
            result.phase.push(PhaseRow {
                r0,
                delta,
                rho: good as f64 / records.len() as f64,
                n_certified: certified,
                n_trials: records.len(),
            });
        }
        result.records.extend(records);
    }
    Ok(result)
}

/// Run a single trial with the configured solver and return the full trace
/// together with the instance; used by the `solve` subcommand.
pub fn run_single_solve(
    config: &ExperimentConfig,
) -> Result<(ProblemInstance, solvers::SolverTrace)> {
    config.validate()?;
    let seed = instances::trial_seed(config.master_seed, 0);
    let problem = instances::gen_instance(config, seed)?;
    let params = solver_params(config, &problem, config.max_iters);
    let trace = match config.solver {
        SolverChoice::Fb => solvers::fb_solve(&problem, &params, |_| {}),
        SolverChoice::Dr => solvers::dr_solve(&problem, &params, |_| {}),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((problem, trace))
}

/// Certificate for the ground truth of trial 0; used by the `certificate`
/// subcommand.
pub fn run_single_certificate(config: &ExperimentConfig) -> Result<(ProblemInstance, Certificate, bool)> {
    config.validate()?;
    let seed = instances::trial_seed(config.master_seed, 0);
    let problem = instances::gen_instance(config, seed)?;
    let x0 = problem.ground_truth.as_ref().unwrap().x0.clone();
    let cert = certificate_for(config, &problem, &x0).map_err(|e| anyhow::anyhow!(e))?;
    let unique = certificates::uniqueness_check(&problem.phi, &x0, &cert, &problem.regularizer)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((problem, cert, unique))
}

/// Re-derivable stratum strings for audits.
pub fn stratum_label(s: &Stratum) -> String {
    s.to_compact()
}
