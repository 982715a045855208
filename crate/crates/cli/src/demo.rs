//! Projection-onto-the-box demo: perturb the data point, track which face of
//! the ball the projection lands on, and audit the stratum sandwich
//! `M_{x(p0)} <= M_{x(p)} <= J_{R*}(M*_{u(p0)})`.

use anyhow::{bail, Result};
use serde::Serialize;

use mirror_strat_core::linalg::{self, Rng};
use mirror_strat_core::regularizers::{self, RegularizerKind, Tolerances};
use mirror_strat_core::strata;

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub p0: Vec<f64>,
    /// `x(p0) = clip(p0)`, the projection of the base point.
    pub x_hat: Vec<f64>,
    /// `u(p0) = p0 - x(p0)`, the dual certificate of the base problem.
    pub u_hat: Vec<f64>,
    pub base_stratum: String,
    pub upper_stratum: String,
    /// Distinct projection strata observed, with counts, ordered by label.
    pub observed: Vec<(String, usize)>,
    pub sandwich_passes: usize,
    pub samples: usize,
}

fn clip(p: &[f64]) -> Vec<f64> {
    p.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
}

/// Project `samples` uniform perturbations of `p0` (per-coordinate radius
/// `radius`) onto the unit box and report the strata their projections
/// occupy.
pub fn projection_demo(
    p0: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<DemoReport> {
    if !(radius > 0.0) {
        bail!("perturbation radius must be positive");
    }
    if samples == 0 {
        bail!("need at least one sample");
    }
    let dim = p0.len();
    let kind = RegularizerKind::LInfBallIndicator { dim };
    let tols = Tolerances::default();

    let x_hat = clip(p0);
    let u_hat = linalg::sub(p0, &x_hat);
    let base = regularizers::primal_stratum(&kind, &x_hat, &tols).map_err(|e| anyhow::anyhow!("{e}"))?;
    let dual = regularizers::dual_stratum(&kind, &u_hat, &tols).map_err(|e| anyhow::anyhow!("{e}"))?;
    let upper = regularizers::mirror_map_conj(&kind, &dual).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut rng = Rng::new(seed);
    let mut counts: std::collections::BTreeMap<String, usize> = Default::default();
    let mut passes = 0usize;
    for _ in 0..samples {
        let p: Vec<f64> = p0
            .iter()
            .map(|v| v + radius * (2.0 * rng.next_f64() - 1.0))
            .collect();
        let x = clip(&p);
        let stratum = regularizers::primal_stratum(&kind, &x, &tols).map_err(|e| anyhow::anyhow!("{e}"))?;
        if strata::sandwich_holds(&base, &stratum, &upper).map_err(|e| anyhow::anyhow!("{e}"))? {
            passes += 1;
        }
        *counts.entry(stratum.to_compact()).or_insert(0) += 1;
    }

    Ok(DemoReport {
        p0: p0.to_vec(),
        x_hat,
        u_hat,
        base_stratum: base.to_compact(),
        upper_stratum: upper.to_compact(),
        observed: counts.into_iter().collect(),
        sandwich_passes: passes,
        samples,
    })
}
