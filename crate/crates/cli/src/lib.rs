//! Experiment harness around the no_std core: problem generation, lambda
//! calibration, the three batch experiments, the projection demo, and the
//! CSV/SVG/manifest writers used by the `mirror-strat` binary.

pub mod config;
pub mod demo;
pub mod experiments;
pub mod instances;
pub mod output;
