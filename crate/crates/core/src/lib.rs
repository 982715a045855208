//! Mirror-stratifiable regularizers, proximal splitting solvers with
//! per-iteration stratum tracking, and minimum-norm dual certificates.
//!
//! The crate is `no_std` (with `alloc`); all IO, experiment drivers and file
//! formats live in the companion `mirror-strat-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod fmath;

pub mod certificates;
pub mod linalg;
pub mod regularizers;
pub mod solvers;
pub mod strata;

pub use linalg::{DenseMatrix, Rng, SvdFactorization};
pub use regularizers::{RegularizerKind, Tolerances};
pub use strata::{DualStratum, Stratum};
