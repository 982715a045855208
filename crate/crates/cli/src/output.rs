//! CSV, SVG and manifest writers. CSV is the source of truth; the SVG charts
//! are a convenience rendered from the same data. All formatting is
//! deterministic so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use mirror_strat_core::solvers::SolverTrace;

use crate::config::ExperimentConfig;
use crate::experiments::ExperimentResult;

pub fn write_histogram_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut s = String::from("delta,count\n");
    for (delta, count) in &result.histogram {
        writeln!(s, "{delta},{count}")?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_paths_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut s = String::from("trial,k,r0,stratum\n");
    for p in &result.paths {
        writeln!(s, "{},{},{},{}", p.trial, p.k, p.r0, p.stratum)?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_phase_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut s = String::from("r0,delta,rho,n_certified,n_trials\n");
    for row in &result.phase {
        writeln!(s, "{},{},{},{},{}", row.r0, row.delta, row.rho, row.n_certified, row.n_trials)?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_trace_csv(trace: &SolverTrace, path: &Path) -> Result<()> {
    let mut s = String::from("k,objective,r0,stratum,residual\n");
    for r in &trace.records {
        writeln!(s, "{},{},{},{},{}", r.k, r.objective, r.complexity, r.stratum.to_compact(), r.residual)?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Run manifest: the full configuration, seed derivation note, tolerances and
/// software version, so results can be audited and reproduced.
pub fn write_manifest(config: &ExperimentConfig, extra: impl Serialize, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Manifest<'a, E: Serialize> {
        version: &'static str,
        seed_derivation: &'static str,
        config: &'a ExperimentConfig,
        extra: E,
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        seed_derivation: "splitmix64 finalizer over (master_seed, trial_index)",
        config,
        extra,
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 48.0;

fn svg_open(s: &mut String, title: &str) {
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n",
        SVG_W / 2.0
    );
}

fn svg_axes(s: &mut String) {
    let _ = write!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{0}\" stroke=\"black\"/>\n",
        SVG_H - MARGIN,
        SVG_W - MARGIN
    );
}

/// Bar chart of the delta histogram.
pub fn write_histogram_svg(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut s = String::new();
    svg_open(&mut s, "complexity excess delta");
    svg_axes(&mut s);
    if !result.histogram.is_empty() {
        let max_count = result.histogram.iter().map(|&(_, c)| c).max().unwrap_or(1) as f64;
        let nbins = result.histogram.len() as f64;
        let plot_w = SVG_W - 2.0 * MARGIN;
        let plot_h = SVG_H - 2.0 * MARGIN;
        let bar_w = (plot_w / nbins).min(60.0);
        for (i, (delta, count)) in result.histogram.iter().enumerate() {
            let h = plot_h * (*count as f64) / max_count;
            let x = MARGIN + (i as f64 + 0.15) * (plot_w / nbins);
            let y = SVG_H - MARGIN - h;
            let _ = write!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"steelblue\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{delta}</text>\n",
                bar_w * 0.7,
                x + bar_w * 0.35,
                SVG_H - MARGIN + 16.0
            );
        }
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

/// Step plot of R0(x_k) per trial.
pub fn write_paths_svg(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut s = String::new();
    svg_open(&mut s, "complexity index along the iterates");
    svg_axes(&mut s);
    let max_k = result.paths.iter().map(|p| p.k).max().unwrap_or(1) as f64;
    let max_r0 = result.paths.iter().map(|p| p.r0).max().unwrap_or(1).max(1) as f64;
    let plot_w = SVG_W - 2.0 * MARGIN;
    let plot_h = SVG_H - 2.0 * MARGIN;
    let trials: std::collections::BTreeSet<usize> = result.paths.iter().map(|p| p.trial).collect();
    for trial in trials {
        let mut d = String::new();
        for p in result.paths.iter().filter(|p| p.trial == trial) {
            let x = MARGIN + plot_w * (p.k as f64) / max_k;
            let y = SVG_H - MARGIN - plot_h * (p.r0 as f64) / max_r0;
            let _ = write!(d, "{}{x:.2},{y:.2} ", if d.is_empty() { "M" } else { "L" });
        }
        let _ = write!(s, "<path d=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.5\"/>\n", d.trim_end());
    }
    // Overlay certificate bounds as horizontal dashed lines.
    for &(_, r0_x0, upper) in &result.path_bounds {
        let y0 = SVG_H - MARGIN - plot_h * (r0_x0 as f64) / max_r0;
        let _ = write!(
            s,
            "<line x1=\"{MARGIN}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"green\" stroke-dasharray=\"4 3\"/>\n",
            SVG_W - MARGIN
        );
        if let Some(u) = upper {
            let yu = SVG_H - MARGIN - plot_h * (u as f64) / max_r0;
            let _ = write!(
                s,
                "<line x1=\"{MARGIN}\" y1=\"{yu:.2}\" x2=\"{:.2}\" y2=\"{yu:.2}\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n",
                SVG_W - MARGIN
            );
        }
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

/// One line per delta level of the rho table, as a function of r0.
pub fn write_phase_svg(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut s = String::new();
    svg_open(&mut s, "certified-uniqueness phase transition");
    svg_axes(&mut s);
    let max_r0 = result.phase.iter().map(|r| r.r0).max().unwrap_or(1) as f64;
    let plot_w = SVG_W - 2.0 * MARGIN;
    let plot_h = SVG_H - 2.0 * MARGIN;
    let deltas: std::collections::BTreeSet<usize> = result.phase.iter().map(|r| r.delta).collect();
    let palette = ["steelblue", "darkorange", "seagreen", "crimson", "purple", "gray"];
    for (i, delta) in deltas.iter().enumerate() {
        let mut d = String::new();
        for row in result.phase.iter().filter(|r| r.delta == *delta) {
            let x = MARGIN + plot_w * (row.r0 as f64) / max_r0;
            let y = SVG_H - MARGIN - plot_h * row.rho;
            let _ = write!(d, "{}{x:.2},{y:.2} ", if d.is_empty() { "M" } else { "L" });
        }
        let color = palette[i % palette.len()];
        let _ = write!(s, "<path d=\"{}\" fill=\"none\" stroke=\"{color}\"/>\n", d.trim_end());
        let _ = write!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">delta &#8804; {delta}</text>\n",
            SVG_W - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

/// Objective and residual along a single solve, log-scaled residual.
pub fn write_trace_svg(trace: &SolverTrace, path: &Path) -> Result<()> {
    let mut s = String::new();
    svg_open(&mut s, "solver trace: complexity index");
    svg_axes(&mut s);
    let max_k = trace.records.iter().map(|r| r.k).max().unwrap_or(1) as f64;
    let max_r0 = trace.records.iter().map(|r| r.complexity).max().unwrap_or(1).max(1) as f64;
    let plot_w = SVG_W - 2.0 * MARGIN;
    let plot_h = SVG_H - 2.0 * MARGIN;
    let mut d = String::new();
    for r in &trace.records {
        let x = MARGIN + plot_w * (r.k as f64) / max_k;
        let y = SVG_H - MARGIN - plot_h * (r.complexity as f64) / max_r0;
        let _ = write!(d, "{}{x:.2},{y:.2} ", if d.is_empty() { "M" } else { "L" });
    }
    let _ = write!(s, "<path d=\"{}\" fill=\"none\" stroke=\"steelblue\"/>\n", d.trim_end());
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}
