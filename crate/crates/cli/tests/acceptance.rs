//! Acceptance suite. Each test covers one numbered criterion and prints a
//! single pass line; tolerances and budgets are pinned in the assertions.
//!
//! The independent oracles live in this file: a grid-refinement brute-force
//! prox minimizer (criterion 1) and an exhaustive active-set QP solver for
//! the minimum-norm certificate (criterion 6).

use std::time::Instant;

use mirror_strat_cli::config::{ExperimentConfig, RegularizerChoice};
use mirror_strat_cli::{demo, experiments, instances};
use mirror_strat_core::certificates;
use mirror_strat_core::linalg::{self, DenseMatrix, Rng};
use mirror_strat_core::regularizers::{self, RegularizerKind, Tolerances};
use mirror_strat_core::solvers::{self, SolverParams};

fn random_vec(rng: &mut Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.normal()).collect()
}

fn prox_objective(kind: &RegularizerKind, mu: f64, x: &[f64], z: &[f64]) -> f64 {
    let d: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    0.5 * d + mu * regularizers::eval(kind, z).unwrap()
}

/// A subgradient of `mu R` at `z`, or `Err(j)` with a violated coordinate
/// when `z` is outside the domain (ball indicator only).
fn reg_subgradient(kind: &RegularizerKind, mu: f64, z: &[f64]) -> Result<Vec<f64>, usize> {
    match kind {
        RegularizerKind::L1 { .. } => {
            Ok(z.iter().map(|v| if *v != 0.0 { mu * v.signum() } else { 0.0 }).collect())
        }
        RegularizerKind::GroupL12 { blocks } => {
            let mut g = vec![0.0; z.len()];
            for block in blocks {
                let norm = linalg::norm2(&block.iter().map(|&i| z[i]).collect::<Vec<_>>());
                if norm > 0.0 {
                    for &i in block {
                        g[i] = mu * z[i] / norm;
                    }
                }
            }
            Ok(g)
        }
        RegularizerKind::Nuclear { side } => {
            let s = *side;
            let f = linalg::svd(&DenseMatrix::new(s, s, z.to_vec())).unwrap();
            let mut g = vec![0.0; s * s];
            for k in 0..s {
                if f.singular_values[k] > 0.0 {
                    for r in 0..s {
                        for c in 0..s {
                            g[r * s + c] += mu * f.left_factors.get(r, k) * f.right_factors.get(c, k);
                        }
                    }
                }
            }
            Ok(g)
        }
        RegularizerKind::LInfBallIndicator { .. } => {
            let mut worst = (0usize, 1.0f64);
            for (i, v) in z.iter().enumerate() {
                if v.abs() > worst.1 {
                    worst = (i, v.abs());
                }
            }
            if worst.1 > 1.0 {
                Err(worst.0)
            } else {
                Ok(vec![0.0; z.len()])
            }
        }
    }
}

/// Independent minimizer of `1/2 ||z - x||^2 + mu R(z)`. A full product
/// grid, iteratively recentered and shrunk, localizes the optimum; pure
/// grid refinement stalls at nonsmooth kinks (the incumbent can sit at an
/// objective gap too small for any coarse grid point to beat while still
/// being ~1e-2 away), so an ellipsoid method then drives the gap below
/// 1e-10. The quadratic makes the objective 1-strongly convex, hence the
/// returned point is within sqrt(2e-10) of the exact minimizer.
fn grid_prox_oracle(kind: &RegularizerKind, mu: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let steps = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut center = vec![0.0; n];
    let mut best = prox_objective(kind, mu, x, &center);
    let mut span = x.iter().fold(1.0_f64, |m, v| m.max(v.abs())) + mu + 1.0;
    let mut z = vec![0.0; n];
    for _ in 0..40 {
        let base = center.clone();
        let mut argbest = center.clone();
        for cell in 0..5usize.pow(n as u32) {
            let mut c = cell;
            for i in 0..n {
                z[i] = base[i] + steps[c % 5] * span;
                c /= 5;
            }
            let v = prox_objective(kind, mu, x, &z);
            if v < best {
                best = v;
                argbest.copy_from_slice(&z);
            }
        }
        center = argbest;
        span *= 0.6;
    }

    // Ellipsoid polish. The objective is nonnegative, so by strong
    // convexity the minimizer lies within sqrt(2 * best) of the incumbent.
    let radius = (2.0 * best).sqrt() + 1e-3;
    let mut p = DenseMatrix::from_fn(n, n, |i, j| if i == j { radius * radius } else { 0.0 });
    let mut c = center.clone();
    let mut best_pt = center;
    let scale = (n * n) as f64 / ((n * n) as f64 - 1.0);
    for _ in 0..3000 {
        let g = match reg_subgradient(kind, mu, &c) {
            Ok(mut g) => {
                let v = prox_objective(kind, mu, x, &c);
                if v < best {
                    best = v;
                    best_pt = c.clone();
                }
                for i in 0..n {
                    g[i] += c[i] - x[i];
                }
                g
            }
            // Outside the indicator's domain: feasibility cut.
            Err(j) => {
                let mut g = vec![0.0; n];
                g[j] = c[j].signum();
                g
            }
        };
        let pg = p.matvec(&g);
        let gpg: f64 = g.iter().zip(&pg).map(|(a, b)| a * b).sum();
        if !(gpg > 1e-300) {
            break;
        }
        let root = gpg.sqrt();
        for i in 0..n {
            c[i] -= pg[i] / (root * (n as f64 + 1.0));
        }
        for i in 0..n {
            for j in 0..n {
                let updated = scale
                    * (p.get(i, j) - 2.0 / (n as f64 + 1.0) * pg[i] * pg[j] / gpg);
                p.set(i, j, updated);
            }
        }
    }
    best_pt
}

#[test]
fn criterion_01_prox_matches_grid_oracle() {
    let start = Instant::now();
    let kinds = [
        RegularizerKind::L1 { dim: 3 },
        RegularizerKind::GroupL12 { blocks: vec![vec![0, 1], vec![2]] },
        RegularizerKind::Nuclear { side: 2 },
        RegularizerKind::LInfBallIndicator { dim: 3 },
    ];
    let mut rng = Rng::new(0xACCE01);
    for kind in &kinds {
        let n = kind.dimension();
        for _ in 0..100 {
            let x = random_vec(&mut rng, n, 1.5);
            let mu = 0.1 + 1.9 * rng.next_f64();
            let p = regularizers::prox(kind, mu, &x).unwrap();
            let oracle = grid_prox_oracle(kind, mu, &x);
            let err = p
                .iter()
                .zip(&oracle)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-3, "{kind:?}: prox/oracle deviation {err}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "criterion 1 runtime {elapsed:?}");
    println!("ACCEPTANCE 1 PASS: prox matches grid oracle (4 kinds x 100 cases, {elapsed:?})");
}

#[test]
fn criterion_02_moreau_identity() {
    let kinds = [
        RegularizerKind::L1 { dim: 8 },
        RegularizerKind::group_uniform(9, 3),
        RegularizerKind::Nuclear { side: 3 },
        RegularizerKind::LInfBallIndicator { dim: 8 },
    ];
    let mut rng = Rng::new(0xACCE02);
    for kind in &kinds {
        let n = kind.dimension();
        for _ in 0..1000 {
            let x = random_vec(&mut rng, n, 2.0);
            let a = regularizers::prox(kind, 1.0, &x).unwrap();
            let b = regularizers::prox_conjugate(kind, 1.0, &x).unwrap();
            for i in 0..n {
                assert!(
                    (a[i] + b[i] - x[i]).abs() <= 1e-12,
                    "{kind:?}: Moreau identity violated at {i}"
                );
            }
        }
    }
    println!("ACCEPTANCE 2 PASS: Moreau identity to 1e-12 (4 kinds x 1000 vectors)");
}

#[test]
fn criterion_03_svd_accuracy() {
    let mut rng = Rng::new(0xACCE03);
    for case in 0..100 {
        let n = 1 + (case % 20);
        let m = DenseMatrix::from_fn(n, n, |_, _| rng.normal());
        let f = linalg::svd(&m).unwrap();
        let rec = f.reconstruct();
        let mut num = 0.0_f64;
        for (a, b) in rec.as_slice().iter().zip(m.as_slice()) {
            num += (a - b) * (a - b);
        }
        let denom = m.frobenius_norm().max(1e-300);
        assert!(num.sqrt() / denom <= 1e-8, "reconstruction residual too large (n={n})");
        for (name, q) in [("U", &f.left_factors), ("V", &f.right_factors)] {
            let g = q.gram();
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (g.get(i, j) - target).abs() <= 1e-10,
                        "{name} not orthogonal at ({i},{j}), n={n}"
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE 3 PASS: SVD reconstruction <=1e-8 and orthogonality <=1e-10 on 100 matrices");
}

fn small_l1_instance(seed: u64) -> solvers::ProblemInstance {
    let cfg = ExperimentConfig {
        n: 40,
        p: 20,
        r0_target: 5,
        master_seed: seed,
        ..ExperimentConfig::default()
    };
    instances::gen_instance(&cfg, instances::trial_seed(seed, 0)).unwrap()
}

#[test]
fn criterion_04_fb_dr_cross_agreement() {
    for seed in 0..50u64 {
        let problem = small_l1_instance(1000 + seed);
        let smax = problem.gram_spectral_norm();
        let fb_params = SolverParams::new(1.8 * problem.lambda / smax, 1.0, 200_000, 1e-10);
        let fb = solvers::fb_solve(&problem, &fb_params, |_| {}).unwrap();
        let dr_params = SolverParams::new(problem.lambda / smax, 1.0, 200_000, 1e-10);
        let dr = solvers::dr_solve(&problem, &dr_params, |_| {}).unwrap();
        let f_fb = solvers::objective(&problem, &fb.final_iterate).unwrap();
        let f_dr = solvers::objective(&problem, &dr.final_iterate).unwrap();
        assert!(
            (f_fb - f_dr).abs() <= 1e-6 * f_fb.abs().max(1.0),
            "seed {seed}: FB/DR objectives differ ({f_fb} vs {f_dr})"
        );
        for w in fb.records.windows(2) {
            assert!(
                w[1].objective <= w[0].objective + 1e-12,
                "seed {seed}: FB objective increased at k={}",
                w[1].k
            );
        }
        for w in dr.records.windows(2) {
            assert!(
                w[1].residual <= w[0].residual + 1e-12,
                "seed {seed}: DR fixed-point residual increased at k={}",
                w[1].k
            );
        }
    }
    println!("ACCEPTANCE 4 PASS: FB/DR objectives agree to 1e-6 with monotone FB objective and DR residual (50 instances)");
}

#[test]
fn criterion_05_duality_gap() {
    for seed in 0..50u64 {
        let problem = small_l1_instance(1000 + seed);
        let x = solvers::reference_solve(&problem, 1e-11).unwrap();
        let primal = solvers::objective(&problem, &x).unwrap();
        let r = linalg::sub(&problem.y, &problem.phi.matvec(&x));
        let q = linalg::scale(&r, 1.0 / problem.lambda);
        let u = problem.phi.matvec_t(&q);
        let s = solvers::feasible_dual_scale(&problem.regularizer, &u).unwrap();
        let dual = solvers::dual_objective(&problem, &linalg::scale(&q, s)).unwrap();
        let gap = primal - dual;
        assert!(
            (-1e-9..=1e-6).contains(&gap),
            "seed {seed}: duality gap {gap} out of range"
        );
    }
    println!("ACCEPTANCE 5 PASS: duality gap <=1e-6 on 50 reference solves");
}

/// Exhaustive active-set oracle for `min ||q|| s.t. Phi^T q in dR(x0)` with
/// the l1 norm: every feasible candidate is the equality-constrained
/// minimum-norm point of some saturation pattern, and the optimum's own
/// pattern is among them, so the smallest feasible candidate is exact.
fn qp_certificate_oracle(phi: &DenseMatrix, x0: &[f64]) -> Option<(Vec<f64>, f64)> {
    let p = phi.rows();
    let n = phi.cols();
    let supp: Vec<usize> = (0..n).filter(|&i| x0[i] != 0.0).collect();
    let off: Vec<usize> = (0..n).filter(|&i| x0[i] == 0.0).collect();
    let m = off.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << m) {
        let active: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| off[b]).collect();
        if supp.len() + active.len() > p {
            continue;
        }
        for signbits in 0u32..(1 << active.len()) {
            let mut cols = supp.clone();
            let mut rhs: Vec<f64> = supp.iter().map(|&i| x0[i].signum()).collect();
            for (j, &i) in active.iter().enumerate() {
                cols.push(i);
                rhs.push(if signbits >> j & 1 == 1 { -1.0 } else { 1.0 });
            }
            let k = cols.len();
            let mut b = DenseMatrix::zeros(p, k);
            for (jj, &c) in cols.iter().enumerate() {
                for r in 0..p {
                    b.set(r, jj, phi.get(r, c));
                }
            }
            let gram = b.transpose().matmul(&b);
            let sol = match linalg::solve_spd(&gram, &rhs) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let q = b.matvec(&sol);
            let u = phi.matvec_t(&q);
            if u.iter().all(|v| v.abs() <= 1.0 + 1e-9) {
                let norm = linalg::norm2(&q);
                if best.as_ref().map(|(_, bn)| norm < *bn).unwrap_or(true) {
                    best = Some((q, norm));
                }
            }
        }
    }
    best
}

#[test]
fn criterion_06_certificate_matches_qp_oracle() {
    let tols = Tolerances::default();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 20 {
        seed += 1;
        assert!(seed < 200, "could not draw 20 admissible tiny instances");
        let cfg = ExperimentConfig {
            n: 12,
            p: 8,
            r0_target: 2,
            master_seed: 7000 + seed,
            ..ExperimentConfig::default()
        };
        let inst = instances::gen_instance(&cfg, instances::trial_seed(cfg.master_seed, 0)).unwrap();
        let x0 = inst.ground_truth.as_ref().unwrap().x0.clone();
        let kind = RegularizerKind::L1 { dim: 12 };
        // Skip instances where x0 is not a noiseless solution (the
        // certificate problem is infeasible there by construction).
        let Some((_, oracle_norm)) = qp_certificate_oracle(&inst.phi, &x0) else {
            assert!(
                certificates::min_norm_certificate(&inst.phi, &x0, &kind, 50_000, 1e-7, &tols)
                    .is_err(),
                "solver claimed a certificate the oracle proves infeasible (seed {seed})"
            );
            continue;
        };
        let cert =
            certificates::min_norm_certificate(&inst.phi, &x0, &kind, 200_000, 1e-7, &tols)
                .unwrap();
        let norm = linalg::norm2(&cert.q_bar);
        assert!(
            (norm - oracle_norm).abs() <= 1e-4 * oracle_norm.max(1e-8),
            "seed {seed}: ||q_bar|| {norm} vs oracle {oracle_norm}"
        );
        assert!(
            cert.feasibility_residual <= 1e-7,
            "seed {seed}: feasibility residual {}",
            cert.feasibility_residual
        );
        checked += 1;
    }
    println!("ACCEPTANCE 6 PASS: certificate norm matches active-set QP oracle to 1e-4 on 20 tiny instances");
}

#[test]
fn criterion_07_l1_enlarged_identification() {
    let start = Instant::now();
    let cfg = ExperimentConfig { trials: 100, master_seed: 1, ..ExperimentConfig::default() };
    let result = experiments::run_histogram(&cfg).unwrap();
    let certified: Vec<_> = result
        .records
        .iter()
        .filter(|r| r.valid() && r.certified_unique == Some(true))
        .collect();
    assert!(certified.len() >= 50, "too few certified trials: {}", certified.len());
    let sandwich_ok = certified.iter().filter(|r| r.sandwich == Some(true)).count();
    let rate = sandwich_ok as f64 / certified.len() as f64;
    let positive_mass = result.records.iter().filter(|r| r.delta.map_or(false, |d| d > 0)).count();
    let bounded = certified
        .iter()
        .filter(|r| match (r.delta, r.delta_star) {
            (Some(d), Some(ds)) => d >= 0 && d <= ds as i64,
            _ => false,
        })
        .count();
    let elapsed = start.elapsed();
    assert!(rate >= 0.9, "sandwich rate {rate} below 0.9 ({sandwich_ok}/{})", certified.len());
    assert!(positive_mass > 0, "no trials with delta > 0");
    assert!(
        bounded as f64 / certified.len() as f64 >= 0.9,
        "delta <= delta* rate too low ({bounded}/{})",
        certified.len()
    );
    assert!(elapsed.as_secs() < 300, "criterion 7 runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 7 PASS: l1 sandwich {sandwich_ok}/{} certified, delta>0 in {positive_mass}/100, {elapsed:?}",
        certified.len()
    );
}

#[test]
fn criterion_08_nuclear_reproduction() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        regularizer: RegularizerChoice::Nuclear,
        n: 400,
        side: 20,
        p: 300,
        r0_target: 4,
        lambda: 10.0,
        trials: 50,
        master_seed: 1,
        ..ExperimentConfig::default()
    };
    let result = experiments::run_histogram(&cfg).unwrap();
    let valid: Vec<_> = result.records.iter().filter(|r| r.valid()).collect();
    assert!(valid.len() >= 48, "too many failed trials: {}", 50 - valid.len());
    let nonneg = valid.iter().filter(|r| r.delta.map_or(false, |d| d >= 0)).count();
    assert!(
        nonneg as f64 / valid.len() as f64 >= 0.95,
        "delta >= 0 rate too low ({nonneg}/{})",
        valid.len()
    );
    let certified: Vec<_> = valid.iter().filter(|r| r.certified_unique == Some(true)).collect();
    assert!(!certified.is_empty());
    let rank_ok = certified
        .iter()
        .filter(|r| match (r.r0_hat, r.delta_star) {
            (Some(rank), Some(ds)) => rank <= 4 + ds,
            _ => false,
        })
        .count();
    let elapsed = start.elapsed();
    assert!(
        rank_ok as f64 / certified.len() as f64 >= 0.9,
        "rank bound rate too low ({rank_ok}/{})",
        certified.len()
    );
    assert!(elapsed.as_secs() < 600, "criterion 8 runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 8 PASS: nuclear delta>=0 in {nonneg}/{}, rank<=4+delta* in {rank_ok}/{}, {elapsed:?}",
        valid.len(),
        certified.len()
    );
}

#[test]
fn criterion_09_phase_transition() {
    // The 0.9/0.7/0.1 endpoint thresholds were frozen after re-validating
    // the transition location on 100-trial runs across several seeds.
    let cfg = ExperimentConfig { trials: 100, master_seed: 1, ..ExperimentConfig::default() };
    let result = experiments::run_phase_transition(&cfg, &[3, 5, 40], &[0, 1, 2, 4, 8]).unwrap();
    // Exact monotonicity in delta for every r0 in the emitted table.
    for r0 in [3usize, 5, 40] {
        let rhos: Vec<f64> =
            result.phase.iter().filter(|r| r.r0 == r0).map(|r| r.rho).collect();
        assert_eq!(rhos.len(), 5);
        for w in rhos.windows(2) {
            assert!(w[1] >= w[0], "rho not monotone in delta at r0={r0}: {rhos:?}");
        }
    }
    let rho_at = |r0: usize, d: usize| {
        result.phase.iter().find(|r| r.r0 == r0 && r.delta == d).unwrap().rho
    };
    assert!(rho_at(3, 0) >= 0.9, "rho(3,0) = {}", rho_at(3, 0));
    assert!(rho_at(5, 0) >= 0.7, "rho(5,0) = {}", rho_at(5, 0));
    assert!(rho_at(40, 0) <= 0.1, "rho(40,0) = {}", rho_at(40, 0));
    println!(
        "ACCEPTANCE 9 PASS: rho monotone; rho(3,0)={}, rho(5,0)={}, rho(40,0)={}",
        rho_at(3, 0),
        rho_at(5, 0),
        rho_at(40, 0)
    );
}

#[test]
fn criterion_10_projection_demo() {
    let start = Instant::now();
    let degenerate = demo::projection_demo(&[2.0, 1.0], 0.2, 1000, 3).unwrap();
    assert_eq!(
        degenerate.observed.len(),
        2,
        "degenerate point: expected two strata, got {:?}",
        degenerate.observed
    );
    assert_eq!(degenerate.sandwich_passes, 1000, "sandwich failed on degenerate point");
    let stable = demo::projection_demo(&[2.0, 0.5], 0.2, 1000, 3).unwrap();
    assert_eq!(
        stable.observed.len(),
        1,
        "non-degenerate point: expected one stratum, got {:?}",
        stable.observed
    );
    assert_eq!(stable.sandwich_passes, 1000);
    let elapsed = start.elapsed();
    assert!(elapsed.as_millis() < 1000, "criterion 10 runtime {elapsed:?}");
    println!("ACCEPTANCE 10 PASS: projection demo strata 2/1 with full sandwich, {elapsed:?}");
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(&config_path, "trials = 10\nmaster_seed = 99\n").unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_mirror-strat"))
            .args(["experiment", "hist", "--config"])
            .arg(&config_path)
            .arg("--out-dir")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("histogram.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "histogram.csv differs between identical runs");
    println!("ACCEPTANCE 11 PASS: identical runs produce byte-identical histogram.csv");
}
