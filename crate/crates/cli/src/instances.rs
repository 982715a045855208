//! Random problem generation: `y = Phi x0 + w` with a Gaussian design and a
//! ground truth of prescribed complexity.

use anyhow::{anyhow, bail, Result};

use mirror_strat_core::linalg::{self, DenseMatrix, Rng};
use mirror_strat_core::regularizers::RegularizerKind;
use mirror_strat_core::solvers::{GroundTruth, ProblemInstance};

use crate::config::ExperimentConfig;

/// Derive an independent per-trial seed from the master seed, so trials can
/// run in parallel with no shared RNG state. SplitMix64 finalizer over the
/// pair (master_seed, index).
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Ground truth with `r0_target` active components, per regularizer:
/// uniformly chosen support with random unit entries for l1, unit-norm random
/// block contents for the group norm, and a rank-r matrix with unit nonzero
/// singular values for the nuclear norm.
pub fn gen_x0(config: &ExperimentConfig, rng: &mut Rng) -> Result<Vec<f64>> {
    let kind = config.kind()?;
    let r = config.r0_target;
    match &kind {
        RegularizerKind::L1 { dim } => {
            let mut idx: Vec<usize> = (0..*dim).collect();
            for i in 0..r {
                let j = i + rng.next_below(*dim - i);
                idx.swap(i, j);
            }
            let mut x0 = vec![0.0; *dim];
            for &i in &idx[..r] {
                x0[i] = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
            }
            Ok(x0)
        }
        RegularizerKind::GroupL12 { blocks } => {
            let nb = blocks.len();
            let mut idx: Vec<usize> = (0..nb).collect();
            for i in 0..r {
                let j = i + rng.next_below(nb - i);
                idx.swap(i, j);
            }
            let mut x0 = vec![0.0; kind.dimension()];
            for &b in &idx[..r] {
                let vals: Vec<f64> = blocks[b].iter().map(|_| rng.normal()).collect();
                let norm = linalg::norm2(&vals).max(f64::MIN_POSITIVE);
                for (&i, v) in blocks[b].iter().zip(&vals) {
                    x0[i] = v / norm;
                }
            }
            Ok(x0)
        }
        RegularizerKind::Nuclear { side } => {
            let n = *side;
            // Product of two n x r Gaussian factors, singular values reset to
            // one: x0 = U_r V_r^T of the product.
            let a = DenseMatrix::from_fn(n, r, |_, _| rng.normal());
            let b = DenseMatrix::from_fn(r, n, |_, _| rng.normal());
            let prod = a.matmul(&b);
            let f = linalg::svd(&prod).map_err(|e| anyhow!("{e}"))?;
            let mut x0 = vec![0.0; n * n];
            for row in 0..n {
                for col in 0..n {
                    let mut s = 0.0;
                    for k in 0..r {
                        s += f.left_factors.get(row, k) * f.right_factors.get(col, k);
                    }
                    x0[row * n + col] = s;
                }
            }
            Ok(x0)
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            bail!("the ball indicator has no regression experiments; use the projection demo")
        }
    }
}

/// Build one problem instance for the given trial seed. The noise draw also
/// fixes lambda when the proportional rule is active.
pub fn gen_instance(config: &ExperimentConfig, seed: u64) -> Result<ProblemInstance> {
    config.validate()?;
    let kind = config.kind()?;
    let n = kind.dimension();
    let mut rng = Rng::new(seed);
    let phi = DenseMatrix::from_fn(config.p, n, |_, _| rng.normal());
    let x0 = gen_x0(config, &mut rng)?;
    let w: Vec<f64> = (0..config.p).map(|_| config.noise_std * rng.normal()).collect();
    let y0 = phi.matvec(&x0);
    let y = linalg::add(&y0, &w);
    let lambda = config.lambda_select(&w);
    let instance = ProblemInstance {
        phi,
        y,
        lambda,
        regularizer: kind,
        ground_truth: Some(GroundTruth { x0, y0, w }),
    };
    instance.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(instance)
}
