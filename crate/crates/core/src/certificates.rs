//! Minimum-norm dual certificates for the noiseless problem, the saturation
//! descriptor of the lifted certificate, the complexity-excess bound, and a
//! sufficient uniqueness check.
//!
//! The certificate solves `min ||q|| s.t. Phi^T q in dR(x0)` with an
//! accelerated primal-dual scheme that only needs matrix-vector products and
//! the Euclidean projection onto `dR(x0)`; the objective is 1-strongly
//! convex, so the steps follow the accelerated over-relaxation schedule.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath::sqrt;
use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::regularizers::{self, RegularizerError, RegularizerKind, Tolerances};
use crate::strata::{self, DualStratum, Stratum, StratumError};

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateError {
    /// Residual still above tolerance after the iteration budget: either x0
    /// does not solve the noiseless problem or the budget is too small.
    InfeasibleOrNotConverged { residual: f64 },
    Regularizer(RegularizerError),
    Stratum(StratumError),
    Linalg(LinalgError),
}

impl fmt::Display for CertificateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertificateError::InfeasibleOrNotConverged { residual } => {
                write!(f, "certificate infeasible or not converged (residual {residual:e})")
            }
            CertificateError::Regularizer(e) => write!(f, "{e}"),
            CertificateError::Stratum(e) => write!(f, "{e}"),
            CertificateError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl From<RegularizerError> for CertificateError {
    fn from(e: RegularizerError) -> Self {
        CertificateError::Regularizer(e)
    }
}

impl From<StratumError> for CertificateError {
    fn from(e: StratumError) -> Self {
        CertificateError::Stratum(e)
    }
}

impl From<LinalgError> for CertificateError {
    fn from(e: LinalgError) -> Self {
        CertificateError::Linalg(e)
    }
}

/// Minimum-norm dual certificate and the strata it determines.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// The least-norm dual vector, length P.
    pub q_bar: Vec<f64>,
    /// Its lift `Phi^T q_bar`, length N.
    pub u_bar: Vec<f64>,
    /// Saturation descriptor of `u_bar`.
    pub dual_stratum_of_u: DualStratum,
    /// The certificate-determined upper stratum `J_{R*}(M*_{u_bar})`.
    pub upper_stratum: Stratum,
    /// `dim(upper) - dim(M_{x0})`, the predicted maximum complexity excess.
    pub delta_star: usize,
    /// Distance of `u_bar` to `dR(x0)`.
    pub feasibility_residual: f64,
    pub solver_iterations: usize,
    /// Thresholds used to classify the saturations, kept for auditability.
    pub tolerances: Tolerances,
}

/// Default iteration budget for the certificate solver.
pub const DEFAULT_MAX_ITERS: usize = 50_000;
/// Default feasibility/optimality tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Solve `min { ||q|| : Phi^T q in dR(x0) }` and classify the resulting
/// strata with the given thresholds.
pub fn min_norm_certificate(
    phi: &DenseMatrix,
    x0: &[f64],
    kind: &RegularizerKind,
    max_iters: usize,
    tol: f64,
    classify: &Tolerances,
) -> Result<Certificate, CertificateError> {
    let p = phi.rows();
    let norm_phi_sq = linalg::spectral_norm_sq(phi, 1e-12).max(f64::MIN_POSITIVE);
    let norm_phi = sqrt(norm_phi_sq);

    let project = |v: &[f64]| regularizers::project_subdifferential(kind, x0, v, classify);

    // Accelerated PDHG on min_q 1/2||q||^2 + i_C(Phi^T q): the quadratic is
    // 1-strongly convex, so tau shrinks and sigma grows by the same theta.
    let mut q = vec![0.0; p];
    let mut q_relaxed = q.clone();
    let mut xi = vec![0.0; kind.dimension()];
    let mut tau = 1.0 / norm_phi;
    let mut sigma = 1.0 / norm_phi;

    let mut iterations = max_iters;
    let mut residual = f64::INFINITY;
    let mut q_at_last_check = q.clone();
    for k in 1..=max_iters {
        // Dual ascent step on the constraint multiplier.
        let s = linalg::axpy(&xi, sigma, &phi.matvec_t(&q_relaxed));
        let proj = project(&linalg::scale(&s, 1.0 / sigma))?;
        xi = linalg::axpy(&s, -sigma, &proj);
        // Primal step: prox of tau/2 ||q||^2.
        let q_new = linalg::scale(&linalg::axpy(&q, -tau, &phi.matvec(&xi)), 1.0 / (1.0 + tau));
        let theta = 1.0 / sqrt(1.0 + 2.0 * tau);
        q_relaxed = linalg::axpy(&q_new, theta, &linalg::sub(&q_new, &q));
        q = q_new;
        tau *= theta;
        sigma /= theta;

        // The multiplier xi converges much more slowly than the iterate, so
        // the stopping test pairs feasibility of the lift with the drift of q
        // between checks rather than a KKT residual involving xi.
        if k % 50 == 0 || k == max_iters {
            let u = phi.matvec_t(&q);
            let feas = linalg::norm2(&linalg::sub(&u, &project(&u)?));
            let drift = linalg::norm2(&linalg::sub(&q, &q_at_last_check));
            q_at_last_check = q.clone();
            residual = feas.max(drift / (1.0 + linalg::norm2(&q)));
            if residual <= tol {
                iterations = k;
                break;
            }
        }
    }

    let u_bar = phi.matvec_t(&q);
    let feasibility_residual = linalg::norm2(&linalg::sub(&u_bar, &project(&u_bar)?));
    if !(residual <= tol) {
        return Err(CertificateError::InfeasibleOrNotConverged { residual });
    }

    let dual_stratum_of_u = regularizers::dual_stratum(kind, &u_bar, classify)?;
    let upper_stratum = regularizers::mirror_map_conj(kind, &dual_stratum_of_u)?;
    let primal = regularizers::primal_stratum(kind, x0, classify)?;
    let delta_star = strata::delta_star(&primal, &dual_stratum_of_u, kind)?;

    Ok(Certificate {
        q_bar: q,
        u_bar,
        dual_stratum_of_u,
        upper_stratum,
        delta_star,
        feasibility_residual,
        solver_iterations: iterations,
        tolerances: *classify,
    })
}

/// Threshold on the smallest restricted singular value below which the
/// extended model is not certified injective.
const INJECTIVITY_TOL: f64 = 1e-8;

/// Sufficient uniqueness check for the noiseless problem: the certificate is
/// feasible and `Phi` restricted to the extended model of the upper stratum
/// is injective. `false` means "not certified unique", not "non-unique".
pub fn uniqueness_check(
    phi: &DenseMatrix,
    _x0: &[f64],
    cert: &Certificate,
    kind: &RegularizerKind,
) -> Result<bool, CertificateError> {
    let p = phi.rows();
    let columns: Vec<Vec<f64>> = match (&cert.dual_stratum_of_u, kind) {
        (DualStratum::SaturationPattern(pat), RegularizerKind::L1 { .. }) => pat
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(j, _)| (0..p).map(|i| phi.get(i, j)).collect())
            .collect(),
        (DualStratum::BlockSaturation(bits), RegularizerKind::GroupL12 { blocks }) => bits
            .iter()
            .zip(blocks)
            .filter(|(&on, _)| on)
            .flat_map(|(_, b)| b.iter().map(|&j| (0..p).map(|i| phi.get(i, j)).collect::<Vec<_>>()))
            .collect(),
        (DualStratum::SaturationCount { count, side }, RegularizerKind::Nuclear { .. }) => {
            let n = *side;
            let i = *count;
            if i == 0 {
                return Ok(true);
            }
            // Orthonormal basis of the tangent space of rank-i matrices at
            // the saturated model of u_bar: span{ u_a v_b^T : a < i or b < i }.
            let f = linalg::svd(&DenseMatrix::new(n, n, cert.u_bar.clone()))?;
            let mut cols = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if a >= i && b >= i {
                        continue;
                    }
                    let mut basis = vec![0.0; n * n];
                    for r in 0..n {
                        let ua = f.left_factors.get(r, a);
                        for c in 0..n {
                            basis[r * n + c] = ua * f.right_factors.get(c, b);
                        }
                    }
                    cols.push(phi.matvec(&basis));
                }
            }
            cols
        }
        (DualStratum::OrthantPattern(pat), RegularizerKind::LInfBallIndicator { .. }) => {
            // Extended model of the box indicator: the non-saturated (free)
            // coordinates of the upper face.
            pat.iter()
                .enumerate()
                .filter(|(_, &s)| s == 0)
                .map(|(j, _)| (0..p).map(|i| phi.get(i, j)).collect())
                .collect()
        }
        _ => return Err(CertificateError::Stratum(StratumError::KindMismatch)),
    };

    let d = columns.len();
    if d == 0 {
        return Ok(true);
    }
    if d > p {
        return Ok(false);
    }
    let mut restricted = DenseMatrix::zeros(p, d);
    for (j, col) in columns.iter().enumerate() {
        for i in 0..p {
            restricted.set(i, j, col[i]);
        }
    }
    let sv = linalg::singular_values(&restricted)?;
    Ok(sv.last().copied().unwrap_or(0.0) > INJECTIVITY_TOL)
}
