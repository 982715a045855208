//! Dense linear algebra and deterministic random generation.
//!
//! Everything here is self-contained: a row-major dense matrix, a one-sided
//! Jacobi SVD, a Cholesky solver for SPD systems, power iteration for the
//! largest eigenvalue of a Gram matrix, and a seeded xoshiro256++ generator
//! with a polar-method normal sampler. All operations are pure functions of
//! their inputs, so identical seeds give bit-identical results across runs
//! and platforms.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath::{abs, ln, sqrt};

/// Maximum number of Jacobi sweeps before giving up.
const JACOBI_MAX_SWEEPS: usize = 30;
/// Relative off-diagonal tolerance for Jacobi convergence.
const JACOBI_TOL: f64 = 1e-12;
/// Iteration cap for power iteration.
const POWER_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Shapes of the operands do not agree.
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
    /// Jacobi sweeps exhausted; carries the worst relative off-diagonal residual.
    SvdNotConverged { residual: f64 },
    /// Cholesky hit a nonpositive pivot: the matrix is not positive definite.
    NotPositiveDefinite { pivot: f64 },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {:?}, got {:?}", expected, got)
            }
            LinalgError::SvdNotConverged { residual } => {
                write!(f, "SVD did not converge, off-diagonal residual {residual:e}")
            }
            LinalgError::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot:e})")
            }
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "entry count must equal rows * cols");
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = dot(self.row(i), x);
        }
        out
    }

    /// `A^T x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "matvec_t dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += a * xi;
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik != 0.0 {
                    for j in 0..other.cols {
                        out.data[i * out.cols + j] += aik * other.get(k, j);
                    }
                }
            }
        }
        out
    }

    /// Gram matrix `A^T A`.
    pub fn gram(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                let ri = row[i];
                if ri != 0.0 {
                    for j in i..self.cols {
                        out.data[i * self.cols + j] += ri * row[j];
                    }
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                out.data[i * self.cols + j] = out.data[j * self.cols + i];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix::new(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        )
    }
}

// Small vector helpers shared across the crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Full SVD `M = U diag(sigma) V^T` of a square matrix.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    /// n x n orthogonal.
    pub left_factors: DenseMatrix,
    /// Nonnegative, nonincreasing.
    pub singular_values: Vec<f64>,
    /// n x n orthogonal.
    pub right_factors: DenseMatrix,
}

impl SvdFactorization {
    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.singular_values.len();
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.left_factors.get(i, k) * self.singular_values[k] * self.right_factors.get(j, k))
                .sum()
        })
    }
}

/// One-sided Jacobi sweeps on the columns of `w`, accumulating the rotations
/// into `v`. On success the columns of `w` are mutually orthogonal.
fn jacobi_orthogonalize(w: &mut DenseMatrix, v: &mut DenseMatrix) -> Result<(), LinalgError> {
    let n = w.cols();
    // Columns whose norm is negligible against the matrix scale are
    // numerically zero; rotating them against each other only churns
    // rounding noise and keeps the relative off-diagonal test near one.
    let scale2: f64 = w.as_slice().iter().map(|x| x * x).sum();
    let tiny = scale2 * (f64::EPSILON * f64::EPSILON);
    let mut worst = 0.0_f64;
    for _ in 0..JACOBI_MAX_SWEEPS {
        worst = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for r in 0..w.rows() {
                    let wp = w.get(r, p);
                    let wq = w.get(r, q);
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                let denom = sqrt(app * aqq);
                if denom == 0.0 || app <= tiny || aqq <= tiny {
                    continue;
                }
                let rel = abs(apq) / denom;
                worst = worst.max(rel);
                if rel <= JACOBI_TOL {
                    continue;
                }
                // Jacobi rotation annihilating the (p, q) Gram entry.
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..w.rows() {
                    let wp = w.get(r, p);
                    let wq = w.get(r, q);
                    w.set(r, p, c * wp - s * wq);
                    w.set(r, q, s * wp + c * wq);
                }
                for r in 0..v.rows() {
                    let vp = v.get(r, p);
                    let vq = v.get(r, q);
                    v.set(r, p, c * vp - s * vq);
                    v.set(r, q, s * vp + c * vq);
                }
            }
        }
        if worst <= JACOBI_TOL {
            return Ok(());
        }
    }
    Err(LinalgError::SvdNotConverged { residual: worst })
}

/// Full SVD of a square matrix via one-sided Jacobi.
pub fn svd(m: &DenseMatrix) -> Result<SvdFactorization, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: (m.rows(), m.rows()),
            got: (m.rows(), m.cols()),
        });
    }
    let n = m.rows();
    let mut w = m.clone();
    let mut v = DenseMatrix::identity(n);
    jacobi_orthogonalize(&mut w, &mut v)?;

    // Column norms are the singular values; normalized columns form U.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| sqrt((0..n).map(|r| w.get(r, j) * w.get(r, j)).sum())).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let scale_ref = norms[order[0]].max(1.0);
    let mut u = DenseMatrix::zeros(n, n);
    let mut vv = DenseMatrix::zeros(n, n);
    let mut sigma = vec![0.0; n];
    for (k, &j) in order.iter().enumerate() {
        sigma[k] = norms[j];
        for r in 0..n {
            vv.set(r, k, v.get(r, j));
        }
        if norms[j] > scale_ref * 1e-14 {
            for r in 0..n {
                u.set(r, k, w.get(r, j) / norms[j]);
            }
        }
    }
    // Complete U to an orthogonal basis for (near-)zero singular values.
    let rank = sigma.iter().take_while(|&&s| s > scale_ref * 1e-14).count();
    let mut next = rank;
    let mut cand = 0;
    while next < n {
        debug_assert!(cand < n, "failed to complete orthogonal basis");
        // Candidate e_cand, orthogonalized against the current columns.
        let mut col = vec![0.0; n];
        col[cand] = 1.0;
        cand += 1;
        for _ in 0..2 {
            for k in 0..next {
                let proj: f64 = (0..n).map(|r| col[r] * u.get(r, k)).sum();
                for r in 0..n {
                    col[r] -= proj * u.get(r, k);
                }
            }
        }
        let nrm = norm2(&col);
        if nrm > 1e-8 {
            for r in 0..n {
                u.set(r, next, col[r] / nrm);
            }
            next += 1;
        }
    }

    Ok(SvdFactorization { left_factors: u, singular_values: sigma, right_factors: vv })
}

/// Singular values (nonincreasing) of a rectangular matrix with
/// `rows >= cols`; wide matrices are transposed first.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let tall;
    let mref = if m.rows() >= m.cols() {
        m
    } else {
        tall = m.transpose();
        &tall
    };
    let mut w = mref.clone();
    let mut v = DenseMatrix::identity(mref.cols());
    jacobi_orthogonalize(&mut w, &mut v)?;
    let mut sv: Vec<f64> = (0..w.cols())
        .map(|j| sqrt((0..w.rows()).map(|r| w.get(r, j) * w.get(r, j)).sum()))
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Largest eigenvalue of `M^T M` (the squared spectral norm of `M`) by power
/// iteration, started from the normalized all-ones vector.
pub fn spectral_norm_sq(m: &DenseMatrix, tol: f64) -> f64 {
    let n = m.cols();
    let mut v = vec![1.0 / sqrt(n as f64); n];
    let mut lambda = 0.0_f64;
    for _ in 0..POWER_MAX_ITERS {
        let av = m.matvec(&v);
        let atav = m.matvec_t(&av);
        let nrm = norm2(&atav);
        if nrm == 0.0 {
            return 0.0;
        }
        let new_lambda = dot(&atav, &v);
        v = scale(&atav, 1.0 / nrm);
        if abs(new_lambda - lambda) <= tol * abs(new_lambda) {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda
}

/// Solve `A x = b` for symmetric positive definite `A` via Cholesky.
pub fn solve_spd(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let chol = CholeskyFactor::new(a)?;
    Ok(chol.solve(b))
}

/// Lower-triangular Cholesky factor, reusable across many right-hand sides.
pub struct CholeskyFactor {
    n: usize,
    l: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self, LinalgError> {
        if a.rows() != a.cols() {
            return Err(LinalgError::DimensionMismatch {
                expected: (a.rows(), a.rows()),
                got: (a.rows(), a.cols()),
            });
        }
        let n = a.rows();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(LinalgError::NotPositiveDefinite { pivot: s });
                    }
                    l[i * n + i] = sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(CholeskyFactor { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

/// xoshiro256++ with splitmix64 seeding. Chosen for cross-platform,
/// bit-reproducible streams from a single 64-bit seed.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
    spare_normal: Option<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [splitmix64(&mut sm), splitmix64(&mut sm), splitmix64(&mut sm), splitmix64(&mut sm)];
        Rng { state, spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by rejection, free of modulo bias.
    pub fn next_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    /// Standard normal draw via the Marsaglia polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        loop {
            let a = 2.0 * self.next_f64() - 1.0;
            let b = 2.0 * self.next_f64() - 1.0;
            let s = a * a + b * b;
            if s > 0.0 && s < 1.0 {
                let f = sqrt(-2.0 * ln(s) / s);
                self.spare_normal = Some(b * f);
                return a * f;
            }
        }
    }
}

/// Matrix with independent standard normal entries, a pure function of
/// `(rows, cols, seed)`.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    assert!(rows >= 1 && cols >= 1);
    let mut rng = Rng::new(seed);
    let data = (0..rows * cols).map(|_| rng.normal()).collect();
    DenseMatrix::new(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, m: usize, seed: u64) -> DenseMatrix {
        gaussian_matrix(n, m, seed)
    }

    #[test]
    fn gaussian_matrix_is_deterministic() {
        let a = gaussian_matrix(2, 2, 7);
        let b = gaussian_matrix(2, 2, 7);
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_matrix_moments() {
        let m = gaussian_matrix(1000, 1, 3);
        let mean: f64 = m.as_slice().iter().sum::<f64>() / 1000.0;
        let var: f64 = m.as_slice().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 999.0;
        assert!(mean.abs() < 0.15, "mean {mean}");
        assert!((0.8..1.2).contains(&var), "var {var}");
    }

    #[test]
    fn gaussian_matrix_shape_and_finite() {
        let m = gaussian_matrix(3, 5, 11);
        assert_eq!((m.rows(), m.cols()), (3, 5));
        assert!(m.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn svd_identity() {
        let f = svd(&DenseMatrix::identity(3)).unwrap();
        for s in &f.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_diagonal_with_sign() {
        let m = DenseMatrix::new(2, 2, vec![3.0, 0.0, 0.0, -2.0]);
        let f = svd(&m).unwrap();
        assert!((f.singular_values[0] - 3.0).abs() < 1e-12);
        assert!((f.singular_values[1] - 2.0).abs() < 1e-12);
    }

    fn check_factorization(m: &DenseMatrix) {
        let f = svd(m).unwrap();
        let n = m.rows();
        // Reconstruction.
        let rec = f.reconstruct();
        let mut err = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                err += (rec.get(i, j) - m.get(i, j)) * (rec.get(i, j) - m.get(i, j));
            }
        }
        let err = err.sqrt();
        assert!(err <= 1e-8 * m.frobenius_norm().max(1.0), "reconstruction error {err}");
        // Orthogonality.
        for u in [&f.left_factors, &f.right_factors] {
            let g = u.gram();
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g.get(i, j) - expect).abs() < 1e-10, "gram deviation at ({i},{j})");
                }
            }
        }
        // Ordering and sign.
        for w in f.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(f.singular_values.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn svd_random_reconstruction() {
        for seed in 0..10 {
            check_factorization(&random_matrix(5, 5, 100 + seed));
        }
    }

    #[test]
    fn svd_rank_deficient() {
        // Rank-1 outer product.
        let m = DenseMatrix::from_fn(4, 4, |i, j| ((i + 1) as f64) * ((j + 1) as f64));
        check_factorization(&m);
        let f = svd(&m).unwrap();
        assert!(f.singular_values[1].abs() < 1e-10);
    }

    #[test]
    fn svd_matches_transpose() {
        let m = random_matrix(6, 6, 42);
        let f = svd(&m).unwrap();
        let ft = svd(&m.transpose()).unwrap();
        for (a, b) in f.singular_values.iter().zip(&ft.singular_values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn svd_rejects_rectangular() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(svd(&m), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn spectral_norm_diag() {
        let m = DenseMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 1.0]);
        assert!((spectral_norm_sq(&m, 1e-12) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_zero() {
        let m = DenseMatrix::zeros(3, 3);
        assert_eq!(spectral_norm_sq(&m, 1e-12), 0.0);
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let m = random_matrix(10, 20, 5);
        let sv = singular_values(&m).unwrap();
        let expect = sv[0] * sv[0];
        let got = spectral_norm_sq(&m, 1e-10);
        assert!((got - expect).abs() <= 1e-6 * expect, "got {got}, expect {expect}");
    }

    #[test]
    fn spectral_norm_bounded_by_frobenius() {
        for seed in 0..5 {
            let m = random_matrix(6, 4, 50 + seed);
            let fro2 = m.frobenius_norm() * m.frobenius_norm();
            assert!(spectral_norm_sq(&m, 1e-10) <= fro2 * (1.0 + 1e-9));
        }
        // Equality on a rank-one outer product.
        let m = DenseMatrix::from_fn(5, 3, |i, j| ((i + 1) as f64) * ((2 * j + 1) as f64));
        let fro2 = m.frobenius_norm() * m.frobenius_norm();
        let s = spectral_norm_sq(&m, 1e-12);
        assert!((s - fro2).abs() <= 1e-8 * fro2);
    }

    #[test]
    fn solve_spd_identity_and_scaled() {
        let b = vec![1.0, -2.0, 3.0];
        let x = solve_spd(&DenseMatrix::identity(3), &b).unwrap();
        for (a, e) in x.iter().zip(&b) {
            assert!((a - e).abs() < 1e-14);
        }
        let x = solve_spd(&DenseMatrix::identity(3).scale(2.0), &b).unwrap();
        for (a, e) in x.iter().zip(&b) {
            assert!((a - e / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn solve_spd_random_residual() {
        let g = random_matrix(8, 8, 9);
        // A = G^T G + I is SPD.
        let a = g.gram().add(&DenseMatrix::identity(8));
        let b: Vec<f64> = (0..8).map(|i| (i as f64) - 3.5).collect();
        let x = solve_spd(&a, &b).unwrap();
        let r = sub(&a.matvec(&x), &b);
        assert!(norm2(&r) <= 1e-10 * norm2(&b).max(1.0));
    }

    #[test]
    fn solve_spd_rejects_indefinite() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(solve_spd(&a, &[1.0, 1.0]), Err(LinalgError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn rng_uniform_below_is_in_range() {
        let mut rng = Rng::new(1);
        for _ in 0..1000 {
            assert!(rng.next_below(7) < 7);
        }
    }
}
