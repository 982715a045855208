//! Mirror-stratifiable regularizers: evaluation, proximal maps, stratum
//! extraction, the mirror maps pairing primal and dual strata, and Euclidean
//! projection onto the subdifferential.
//!
//! Four regularizers are supported: the l1 norm, the group l1,2 norm, the
//! nuclear norm on square matrices (stored flattened row-major), and the
//! indicator of the linf unit ball.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath::abs;
use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::strata::{DualStratum, Stratum, StratumError};

#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerError {
    DimensionMismatch { expected: usize, got: usize },
    /// A dual vector violates the domain of the conjugate subdifferential by
    /// more than the saturation tolerance.
    InfeasibleDual { excess: f64 },
    Linalg(LinalgError),
}

impl fmt::Display for RegularizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularizerError::DimensionMismatch { expected, got } => {
                write!(f, "vector length {got} does not match regularizer dimension {expected}")
            }
            RegularizerError::InfeasibleDual { excess } => {
                write!(f, "dual vector violates its domain by {excess:e}")
            }
            RegularizerError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl From<LinalgError> for RegularizerError {
    fn from(e: LinalgError) -> Self {
        RegularizerError::Linalg(e)
    }
}

/// The regularizer `R`, together with its dimension data.
#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerKind {
    /// `||x||_1` on `R^dim`.
    L1 { dim: usize },
    /// Group l1,2 norm for a partition of `{0, .., N-1}` into blocks.
    GroupL12 { blocks: Vec<Vec<usize>> },
    /// Nuclear norm on `side x side` matrices flattened row-major.
    Nuclear { side: usize },
    /// Indicator of `[-1, 1]^dim`.
    LInfBallIndicator { dim: usize },
}

impl RegularizerKind {
    /// Ambient dimension of the primal variable.
    pub fn dimension(&self) -> usize {
        match self {
            RegularizerKind::L1 { dim } | RegularizerKind::LInfBallIndicator { dim } => *dim,
            RegularizerKind::GroupL12 { blocks } => blocks.iter().map(Vec::len).sum(),
            RegularizerKind::Nuclear { side } => side * side,
        }
    }

    /// Uniform partition of `{0, .., n-1}` into `k` contiguous blocks.
    pub fn group_uniform(n: usize, k: usize) -> Self {
        assert!(k >= 1 && n % k == 0, "block count must divide the dimension");
        let bs = n / k;
        let blocks = (0..k).map(|b| (b * bs..(b + 1) * bs).collect()).collect();
        RegularizerKind::GroupL12 { blocks }
    }

    /// True if the blocks are nonempty, disjoint and cover `{0, .., N-1}`.
    pub fn blocks_are_partition(&self) -> bool {
        match self {
            RegularizerKind::GroupL12 { blocks } => {
                let n = self.dimension();
                let mut seen = vec![false; n];
                for b in blocks {
                    if b.is_empty() {
                        return false;
                    }
                    for &i in b {
                        if i >= n || seen[i] {
                            return false;
                        }
                        seen[i] = true;
                    }
                }
                seen.into_iter().all(|s| s)
            }
            _ => true,
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<(), RegularizerError> {
        let expected = self.dimension();
        if x.len() != expected {
            Err(RegularizerError::DimensionMismatch { expected, got: x.len() })
        } else {
            Ok(())
        }
    }
}

/// Finite-precision thresholds for stratum membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entries / singular values below this count as zero.
    pub primal_zero_tol: f64,
    /// Dual entries / singular values within this of 1 count as saturated.
    pub dual_saturation_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { primal_zero_tol: 1e-8, dual_saturation_tol: 1e-6 }
    }
}

fn as_square(x: &[f64], side: usize) -> DenseMatrix {
    DenseMatrix::new(side, side, x.to_vec())
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `R(x)`; `+inf` only for the indicator outside its ball.
pub fn eval(kind: &RegularizerKind, x: &[f64]) -> Result<f64, RegularizerError> {
    kind.check_len(x)?;
    match kind {
        RegularizerKind::L1 { .. } => Ok(x.iter().map(|v| abs(*v)).sum()),
        RegularizerKind::GroupL12 { blocks } => {
            Ok(blocks.iter().map(|b| linalg::norm2(&gather(x, b))).sum())
        }
        RegularizerKind::Nuclear { side } => {
            let f = linalg::svd(&as_square(x, *side))?;
            Ok(f.singular_values.iter().sum())
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            if x.iter().all(|v| abs(*v) <= 1.0) {
                Ok(0.0)
            } else {
                Ok(f64::INFINITY)
            }
        }
    }
}

fn gather(x: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| x[i]).collect()
}

fn soft_threshold(v: f64, mu: f64) -> f64 {
    sign(v) * (abs(v) - mu).max(0.0)
}

/// `prox_{mu R}(x)`.
pub fn prox(kind: &RegularizerKind, mu: f64, x: &[f64]) -> Result<Vec<f64>, RegularizerError> {
    assert!(mu > 0.0, "prox parameter must be positive");
    kind.check_len(x)?;
    match kind {
        RegularizerKind::L1 { .. } => Ok(x.iter().map(|&v| soft_threshold(v, mu)).collect()),
        RegularizerKind::GroupL12 { blocks } => {
            let mut out = vec![0.0; x.len()];
            for b in blocks {
                let nrm = linalg::norm2(&gather(x, b));
                if nrm > mu {
                    let f = 1.0 - mu / nrm;
                    for &i in b {
                        out[i] = x[i] * f;
                    }
                }
            }
            Ok(out)
        }
        RegularizerKind::Nuclear { side } => {
            let f = linalg::svd(&as_square(x, *side))?;
            let thresholded: Vec<f64> = f.singular_values.iter().map(|&s| (s - mu).max(0.0)).collect();
            let n = *side;
            let mut out = vec![0.0; n * n];
            for k in 0..n {
                let sk = thresholded[k];
                if sk > 0.0 {
                    for i in 0..n {
                        let ui = f.left_factors.get(i, k) * sk;
                        for j in 0..n {
                            out[i * n + j] += ui * f.right_factors.get(j, k);
                        }
                    }
                }
            }
            Ok(out)
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            Ok(x.iter().map(|&v| v.clamp(-1.0, 1.0)).collect())
        }
    }
}

/// `prox_{mu R*}(x)`, by the Moreau identity
/// `prox_{mu R*}(x) = x - mu prox_{R/mu}(x/mu)`.
pub fn prox_conjugate(kind: &RegularizerKind, mu: f64, x: &[f64]) -> Result<Vec<f64>, RegularizerError> {
    assert!(mu > 0.0, "prox parameter must be positive");
    let scaled: Vec<f64> = x.iter().map(|v| v / mu).collect();
    let p = prox(kind, 1.0 / mu, &scaled)?;
    Ok(x.iter().zip(&p).map(|(v, pv)| v - mu * pv).collect())
}

/// The complexity index `R_0(x)`: support size, active-block count, rank, or
/// saturation count for the linf-ball indicator.
pub fn complexity_index(kind: &RegularizerKind, x: &[f64], tol: &Tolerances) -> Result<usize, RegularizerError> {
    Ok(crate::strata::dim(&primal_stratum(kind, x, tol)?))
}

/// Discrete descriptor of the stratum containing `x`.
pub fn primal_stratum(kind: &RegularizerKind, x: &[f64], tol: &Tolerances) -> Result<Stratum, RegularizerError> {
    kind.check_len(x)?;
    match kind {
        RegularizerKind::L1 { .. } => Ok(Stratum::SignPattern(
            x.iter()
                .map(|&v| if abs(v) <= tol.primal_zero_tol { 0 } else { sign(v) as i8 })
                .collect(),
        )),
        RegularizerKind::GroupL12 { blocks } => Ok(Stratum::BlockSupport(
            blocks.iter().map(|b| linalg::norm2(&gather(x, b)) > tol.primal_zero_tol).collect(),
        )),
        RegularizerKind::Nuclear { side } => {
            let f = linalg::svd(&as_square(x, *side))?;
            let r = f.singular_values.iter().filter(|&&s| s > tol.primal_zero_tol).count();
            Ok(Stratum::Rank { r, side: *side })
        }
        RegularizerKind::LInfBallIndicator { .. } => Ok(Stratum::FacePattern(
            x.iter()
                .map(|&v| {
                    if v >= 1.0 - tol.dual_saturation_tol {
                        1
                    } else if v <= -1.0 + tol.dual_saturation_tol {
                        -1
                    } else {
                        0
                    }
                })
                .collect(),
        )),
    }
}

/// Descriptor of the dual stratum containing `u in dom(dR*)`.
pub fn dual_stratum(kind: &RegularizerKind, u: &[f64], tol: &Tolerances) -> Result<DualStratum, RegularizerError> {
    kind.check_len(u)?;
    let sat = tol.dual_saturation_tol;
    match kind {
        RegularizerKind::L1 { .. } => {
            let worst = u.iter().map(|&v| abs(v) - 1.0).fold(0.0_f64, f64::max);
            if worst > sat {
                return Err(RegularizerError::InfeasibleDual { excess: worst });
            }
            Ok(DualStratum::SaturationPattern(
                u.iter()
                    .map(|&v| {
                        if v >= 1.0 - sat {
                            1
                        } else if v <= -1.0 + sat {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect(),
            ))
        }
        RegularizerKind::GroupL12 { blocks } => {
            let mut bits = Vec::with_capacity(blocks.len());
            for b in blocks {
                let nrm = linalg::norm2(&gather(u, b));
                if nrm - 1.0 > sat {
                    return Err(RegularizerError::InfeasibleDual { excess: nrm - 1.0 });
                }
                bits.push(nrm >= 1.0 - sat);
            }
            Ok(DualStratum::BlockSaturation(bits))
        }
        RegularizerKind::Nuclear { side } => {
            let f = linalg::svd(&as_square(u, *side))?;
            let smax = f.singular_values.first().copied().unwrap_or(0.0);
            if smax - 1.0 > sat {
                return Err(RegularizerError::InfeasibleDual { excess: smax - 1.0 });
            }
            let count = f.singular_values.iter().filter(|&&s| s >= 1.0 - sat).count();
            Ok(DualStratum::SaturationCount { count, side: *side })
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            // The conjugate of the indicator is the l1 norm, whose
            // subdifferential has full domain; the dual strata are the sign
            // orthants of u.
            Ok(DualStratum::OrthantPattern(
                u.iter()
                    .map(|&v| if abs(v) <= tol.primal_zero_tol { 0 } else { sign(v) as i8 })
                    .collect(),
            ))
        }
    }
}

/// The correspondence `J_R` on strata: translates a primal descriptor to the
/// paired dual one.
pub fn mirror_map(kind: &RegularizerKind, s: &Stratum) -> Result<DualStratum, StratumError> {
    match (kind, s) {
        (RegularizerKind::L1 { dim }, Stratum::SignPattern(p)) if p.len() == *dim => {
            Ok(DualStratum::SaturationPattern(p.clone()))
        }
        (RegularizerKind::GroupL12 { blocks }, Stratum::BlockSupport(b)) if b.len() == blocks.len() => {
            Ok(DualStratum::BlockSaturation(b.clone()))
        }
        (RegularizerKind::Nuclear { side }, Stratum::Rank { r, side: sr }) if side == sr => {
            Ok(DualStratum::SaturationCount { count: *r, side: *side })
        }
        (RegularizerKind::LInfBallIndicator { dim }, Stratum::FacePattern(p)) if p.len() == *dim => {
            Ok(DualStratum::OrthantPattern(p.clone()))
        }
        _ => Err(StratumError::KindMismatch),
    }
}

/// The inverse correspondence `J_{R*}` on strata.
pub fn mirror_map_conj(kind: &RegularizerKind, d: &DualStratum) -> Result<Stratum, StratumError> {
    match (kind, d) {
        (RegularizerKind::L1 { dim }, DualStratum::SaturationPattern(p)) if p.len() == *dim => {
            Ok(Stratum::SignPattern(p.clone()))
        }
        (RegularizerKind::GroupL12 { blocks }, DualStratum::BlockSaturation(b)) if b.len() == blocks.len() => {
            Ok(Stratum::BlockSupport(b.clone()))
        }
        (RegularizerKind::Nuclear { side }, DualStratum::SaturationCount { count, side: sr }) if side == sr => {
            Ok(Stratum::Rank { r: *count, side: *side })
        }
        (RegularizerKind::LInfBallIndicator { dim }, DualStratum::OrthantPattern(p)) if p.len() == *dim => {
            Ok(Stratum::FacePattern(p.clone()))
        }
        _ => Err(StratumError::KindMismatch),
    }
}

/// Euclidean projection of `v` onto the subdifferential `dR(x0)`.
pub fn project_subdifferential(
    kind: &RegularizerKind,
    x0: &[f64],
    v: &[f64],
    tol: &Tolerances,
) -> Result<Vec<f64>, RegularizerError> {
    kind.check_len(x0)?;
    kind.check_len(v)?;
    match kind {
        RegularizerKind::L1 { .. } => Ok(x0
            .iter()
            .zip(v)
            .map(|(&x, &w)| if abs(x) > tol.primal_zero_tol { sign(x) } else { w.clamp(-1.0, 1.0) })
            .collect()),
        RegularizerKind::GroupL12 { blocks } => {
            let mut out = vec![0.0; v.len()];
            for b in blocks {
                let xb = gather(x0, b);
                let nrm = linalg::norm2(&xb);
                if nrm > tol.primal_zero_tol {
                    for (&i, &xi) in b.iter().zip(&xb) {
                        out[i] = xi / nrm;
                    }
                } else {
                    let vb = gather(v, b);
                    let vn = linalg::norm2(&vb);
                    let f = if vn > 1.0 { 1.0 / vn } else { 1.0 };
                    for (&i, &vi) in b.iter().zip(&vb) {
                        out[i] = vi * f;
                    }
                }
            }
            Ok(out)
        }
        RegularizerKind::Nuclear { side } => {
            let n = *side;
            let f = linalg::svd(&as_square(x0, n))?;
            let r = f.singular_values.iter().filter(|&&s| s > tol.primal_zero_tol).count();
            // Fixed part U_r V_r^T on the model subspace.
            let mut out = vec![0.0; n * n];
            for k in 0..r {
                for i in 0..n {
                    let ui = f.left_factors.get(i, k);
                    for j in 0..n {
                        out[i * n + j] += ui * f.right_factors.get(j, k);
                    }
                }
            }
            // Complement block: project v onto the complement subspaces, then
            // clip its singular values to at most one. Exact because the
            // operator-norm ball restricted there is unitarily invariant.
            let vm = as_square(v, n);
            let ur = DenseMatrix::from_fn(n, r.max(1).min(n), |i, k| {
                if k < r {
                    f.left_factors.get(i, k)
                } else {
                    0.0
                }
            });
            let vr = DenseMatrix::from_fn(n, r.max(1).min(n), |i, k| {
                if k < r {
                    f.right_factors.get(i, k)
                } else {
                    0.0
                }
            });
            // P_perp M P'_perp = (I - Ur Ur^T) M (I - Vr Vr^T).
            let ut_m = ur.transpose().matmul(&vm);
            let proj_left = vm.add(&ur.matmul(&ut_m).scale(-1.0));
            let pl_vr = proj_left.matmul(&vr);
            let b = proj_left.add(&pl_vr.matmul(&vr.transpose()).scale(-1.0));
            let bf = linalg::svd(&b)?;
            for k in 0..n {
                let s = bf.singular_values[k].min(1.0);
                if s > 0.0 {
                    for i in 0..n {
                        let ui = bf.left_factors.get(i, k) * s;
                        for j in 0..n {
                            out[i * n + j] += ui * bf.right_factors.get(j, k);
                        }
                    }
                }
            }
            Ok(out)
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            // Normal cone of the box at x0.
            Ok(x0
                .iter()
                .zip(v)
                .map(|(&x, &w)| {
                    if x >= 1.0 - tol.dual_saturation_tol {
                        w.max(0.0)
                    } else if x <= -1.0 + tol.dual_saturation_tol {
                        w.min(0.0)
                    } else {
                        0.0
                    }
                })
                .collect())
        }
    }
}
