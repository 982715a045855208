//! Forward-Backward and Douglas-Rachford iterations for the regularized
//! least-squares problem `min_x R(x) + 1/(2 lambda) ||y - Phi x||^2`, with
//! per-iteration stratum tracking and a high-accuracy reference mode.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{self, CholeskyFactor, DenseMatrix, LinalgError};
use crate::regularizers::{self, RegularizerError, RegularizerKind, Tolerances};
use crate::strata::Stratum;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// Step size outside the admissible interval for the scheme.
    StepOutOfRange { gamma: f64, max: f64 },
    /// Relaxation parameter outside the admissible interval.
    RelaxationOutOfRange { tau: f64 },
    /// Iteration budget exhausted; carries the achieved residual.
    BudgetExhausted { residual: f64 },
    /// Problem data is inconsistent.
    BadProblem(String),
    Regularizer(RegularizerError),
    Linalg(LinalgError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::StepOutOfRange { gamma, max } => {
                write!(f, "step size {gamma} outside (0, {max})")
            }
            SolverError::RelaxationOutOfRange { tau } => write!(f, "relaxation {tau} out of range"),
            SolverError::BudgetExhausted { residual } => {
                write!(f, "iteration budget exhausted, residual {residual:e}")
            }
            SolverError::BadProblem(msg) => write!(f, "bad problem: {msg}"),
            SolverError::Regularizer(e) => write!(f, "{e}"),
            SolverError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl From<RegularizerError> for SolverError {
    fn from(e: RegularizerError) -> Self {
        SolverError::Regularizer(e)
    }
}

impl From<LinalgError> for SolverError {
    fn from(e: LinalgError) -> Self {
        SolverError::Linalg(e)
    }
}

/// Known ground truth behind an instance: `y = Phi x0 + w`.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub w: Vec<f64>,
}

/// One regularized inverse problem `P(lambda, y)`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    /// Forward operator, P x N.
    pub phi: DenseMatrix,
    /// Observations, length P.
    pub y: Vec<f64>,
    /// Regularization weight, > 0.
    pub lambda: f64,
    pub regularizer: RegularizerKind,
    pub ground_truth: Option<GroundTruth>,
}

impl ProblemInstance {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.y.len() != self.phi.rows() {
            return Err(SolverError::BadProblem(String::from("y length != rows of phi")));
        }
        if self.regularizer.dimension() != self.phi.cols() {
            return Err(SolverError::BadProblem(String::from("regularizer dimension != cols of phi")));
        }
        if !(self.lambda > 0.0) {
            return Err(SolverError::BadProblem(String::from("lambda must be positive")));
        }
        if let Some(gt) = &self.ground_truth {
            let y0 = self.phi.matvec(&gt.x0);
            let r1 = linalg::norm2(&linalg::sub(&y0, &gt.y0));
            let yw = linalg::add(&gt.y0, &gt.w);
            let r2 = linalg::norm2(&linalg::sub(&yw, &self.y));
            if r1 > 1e-12 * linalg::norm2(&gt.y0).max(1.0) || r2 > 1e-12 * linalg::norm2(&self.y).max(1.0) {
                return Err(SolverError::BadProblem(String::from("ground truth inconsistent with data")));
            }
        }
        Ok(())
    }

    /// `sigma_max(Phi^T Phi)`.
    pub fn gram_spectral_norm(&self) -> f64 {
        linalg::spectral_norm_sq(&self.phi, 1e-10)
    }
}

/// Step, relaxation and stopping parameters shared by both schemes.
#[derive(Debug, Clone)]
pub struct SolverParams {
    /// Step size. FB requires `gamma in (0, 2 lambda / sigma_max(Phi^T Phi))`;
    /// DR accepts any positive value.
    pub gamma: f64,
    /// Relaxation: `(0, 1]` for FB, `(0, 2)` for DR.
    pub tau: f64,
    pub max_iters: usize,
    /// Fixed-point residual threshold.
    pub stop_tol: f64,
    /// Thresholds used to classify iterate strata in the trace.
    pub classify: Tolerances,
}

impl SolverParams {
    pub fn new(gamma: f64, tau: f64, max_iters: usize, stop_tol: f64) -> Self {
        SolverParams { gamma, tau, max_iters, stop_tol, classify: Tolerances::default() }
    }
}

/// Per-iteration record in a solver trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    pub objective: f64,
    /// Complexity index `R_0(x_k)`.
    pub complexity: usize,
    pub stratum: Stratum,
    /// Fixed-point residual.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub final_iterate: Vec<f64>,
    pub converged: bool,
}

/// `E(x) = R(x) + 1/(2 lambda) ||y - Phi x||^2`.
pub fn objective(problem: &ProblemInstance, x: &[f64]) -> Result<f64, SolverError> {
    let r = regularizers::eval(&problem.regularizer, x)?;
    let res = linalg::sub(&problem.y, &problem.phi.matvec(x));
    Ok(r + linalg::dot(&res, &res) / (2.0 * problem.lambda))
}

fn record_for(
    problem: &ProblemInstance,
    params: &SolverParams,
    k: usize,
    x: &[f64],
    residual: f64,
) -> Result<IterationRecord, SolverError> {
    let stratum = regularizers::primal_stratum(&problem.regularizer, x, &params.classify)?;
    Ok(IterationRecord {
        k,
        objective: objective(problem, x)?,
        complexity: crate::strata::dim(&stratum),
        stratum,
        residual,
    })
}

/// Relaxed Forward-Backward iteration
/// `x+ = (1 - tau) x + tau prox_{gamma R}(x - gamma grad f(x))`
/// started from zero, where `grad f(x) = Phi^T (Phi x - y) / lambda`.
pub fn fb_solve(
    problem: &ProblemInstance,
    params: &SolverParams,
    mut hook: impl FnMut(&IterationRecord),
) -> Result<SolverTrace, SolverError> {
    problem.validate()?;
    let smax = problem.gram_spectral_norm();
    let gamma_max = 2.0 * problem.lambda / smax;
    if !(params.gamma > 0.0 && params.gamma < gamma_max) {
        return Err(SolverError::StepOutOfRange { gamma: params.gamma, max: gamma_max });
    }
    if !(params.tau > 0.0 && params.tau <= 1.0) {
        return Err(SolverError::RelaxationOutOfRange { tau: params.tau });
    }
    let n = problem.phi.cols();
    let mut x = vec![0.0; n];
    let mut records = Vec::new();
    let mut converged = false;
    for k in 1..=params.max_iters {
        let grad = linalg::scale(
            &problem.phi.matvec_t(&linalg::sub(&problem.phi.matvec(&x), &problem.y)),
            1.0 / problem.lambda,
        );
        let forward = linalg::axpy(&x, -params.gamma, &grad);
        let p = regularizers::prox(&problem.regularizer, params.gamma, &forward)?;
        let residual = linalg::norm2(&linalg::sub(&x, &p));
        x = if params.tau == 1.0 {
            p
        } else {
            linalg::add(&linalg::scale(&x, 1.0 - params.tau), &linalg::scale(&p, params.tau))
        };
        let rec = record_for(problem, params, k, &x, residual)?;
        hook(&rec);
        records.push(rec);
        if residual <= params.stop_tol {
            converged = true;
            break;
        }
    }
    Ok(SolverTrace { records, final_iterate: x, converged })
}

enum DrOrder {
    /// `f` = data term, `g` = regularizer (traced iterate is `prox_{gamma R}`).
    DataFirst,
    /// Roles swapped.
    RegularizerFirst,
}

/// Douglas-Rachford with `f` the quadratic data term and `g = R`.
pub fn dr_solve(
    problem: &ProblemInstance,
    params: &SolverParams,
    hook: impl FnMut(&IterationRecord),
) -> Result<SolverTrace, SolverError> {
    dr_solve_inner(problem, params, DrOrder::DataFirst, hook)
}

/// Douglas-Rachford with the roles of the data term and the regularizer
/// reversed. Converges to the same minimizers.
pub fn dr_solve_reversed(
    problem: &ProblemInstance,
    params: &SolverParams,
    hook: impl FnMut(&IterationRecord),
) -> Result<SolverTrace, SolverError> {
    dr_solve_inner(problem, params, DrOrder::RegularizerFirst, hook)
}

fn dr_solve_inner(
    problem: &ProblemInstance,
    params: &SolverParams,
    order: DrOrder,
    mut hook: impl FnMut(&IterationRecord),
) -> Result<SolverTrace, SolverError> {
    problem.validate()?;
    if !(params.gamma > 0.0) {
        return Err(SolverError::StepOutOfRange { gamma: params.gamma, max: f64::INFINITY });
    }
    if !(params.tau > 0.0 && params.tau < 2.0) {
        return Err(SolverError::RelaxationOutOfRange { tau: params.tau });
    }
    let n = problem.phi.cols();
    // prox of the data term solves (I + (gamma/lambda) Phi^T Phi) x = rhs;
    // gamma and lambda are constant, so factor once.
    let scale_f = params.gamma / problem.lambda;
    let a = problem.phi.gram().scale(scale_f).add(&DenseMatrix::identity(n));
    let chol = CholeskyFactor::new(&a)?;
    let phity = linalg::scale(&problem.phi.matvec_t(&problem.y), scale_f);
    let prox_data = |r: &[f64]| -> Vec<f64> { chol.solve(&linalg::add(r, &phity)) };
    let prox_reg =
        |r: &[f64]| -> Result<Vec<f64>, SolverError> { Ok(regularizers::prox(&problem.regularizer, params.gamma, r)?) };

    let mut z = vec![0.0; n];
    let mut x = match order {
        DrOrder::DataFirst => prox_reg(&z)?,
        DrOrder::RegularizerFirst => prox_data(&z),
    };
    let mut records = Vec::new();
    let mut converged = false;
    for k in 1..=params.max_iters {
        let reflected = linalg::sub(&linalg::scale(&x, 2.0), &z);
        let v = match order {
            DrOrder::DataFirst => prox_data(&reflected),
            DrOrder::RegularizerFirst => prox_reg(&reflected)?,
        };
        let step = linalg::sub(&v, &x);
        z = linalg::axpy(&z, params.tau, &step);
        x = match order {
            DrOrder::DataFirst => prox_reg(&z)?,
            DrOrder::RegularizerFirst => prox_data(&z),
        };
        let residual = linalg::norm2(&step);
        let rec = record_for(problem, params, k, &x, residual)?;
        hook(&rec);
        records.push(rec);
        if residual <= params.stop_tol {
            converged = true;
            break;
        }
    }
    Ok(SolverTrace { records, final_iterate: x, converged })
}

/// Iteration cap for the high-accuracy reference mode.
const REFERENCE_MAX_ITERS: usize = 500_000;

/// High-accuracy solve: unrelaxed FB with the step `1.8 lambda / sigma_max`
/// run to the requested fixed-point residual.
pub fn reference_solve(problem: &ProblemInstance, tol: f64) -> Result<Vec<f64>, SolverError> {
    assert!(tol > 0.0);
    let smax = problem.gram_spectral_norm();
    let params = SolverParams::new(1.8 * problem.lambda / smax, 1.0, REFERENCE_MAX_ITERS, tol);
    let trace = fb_solve(problem, &params, |_| {})?;
    if !trace.converged {
        let residual = trace.records.last().map(|r| r.residual).unwrap_or(f64::INFINITY);
        return Err(SolverError::BudgetExhausted { residual });
    }
    Ok(trace.final_iterate)
}

/// Value of the Fenchel-Rockafellar dual
/// `<q, y> - lambda/2 ||q||^2 - R*(Phi^T q)`; `-inf` when `Phi^T q` lies
/// outside the domain of `R*` (beyond a small slack).
pub fn dual_objective(problem: &ProblemInstance, q: &[f64]) -> Result<f64, SolverError> {
    let u = problem.phi.matvec_t(q);
    let conj = conjugate_value(&problem.regularizer, &u)?;
    if !conj.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(linalg::dot(q, &problem.y) - 0.5 * problem.lambda * linalg::dot(q, q) - conj)
}

/// Divide `q` by the dual-norm excess of `Phi^T q` so the scaled vector is
/// dual feasible; the identity when already feasible.
pub fn feasible_dual_scale(kind: &RegularizerKind, u: &[f64]) -> Result<f64, SolverError> {
    let norm = match kind {
        RegularizerKind::L1 { .. } => u.iter().fold(0.0_f64, |m, &v| m.max(libm::fabs(v))),
        RegularizerKind::GroupL12 { blocks } => blocks
            .iter()
            .map(|b| linalg::norm2(&b.iter().map(|&i| u[i]).collect::<Vec<_>>()))
            .fold(0.0_f64, f64::max),
        RegularizerKind::Nuclear { side } => {
            let m = DenseMatrix::new(*side, *side, u.to_vec());
            let sv = linalg::singular_values(&m).map_err(SolverError::Linalg)?;
            sv.first().copied().unwrap_or(0.0)
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            // Conjugate is the l1 norm with full domain.
            return Ok(1.0);
        }
    };
    Ok(if norm > 1.0 { 1.0 / norm } else { 1.0 })
}

const DUAL_DOMAIN_SLACK: f64 = 1e-9;

fn conjugate_value(kind: &RegularizerKind, u: &[f64]) -> Result<f64, SolverError> {
    match kind {
        RegularizerKind::LInfBallIndicator { .. } => Ok(u.iter().map(|v| libm::fabs(*v)).sum()),
        _ => {
            let s = feasible_dual_scale(kind, u)?;
            if s < 1.0 - DUAL_DOMAIN_SLACK {
                Ok(f64::INFINITY)
            } else {
                Ok(0.0)
            }
        }
    }
}
