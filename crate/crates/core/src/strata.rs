//! Stratum descriptors, the partial order on strata, stratum dimensions,
//! the sandwich predicate and the complexity-excess bound.
//!
//! Strata are encoded discretely: sign patterns for the l1 norm, block
//! supports for the group norm, ranks for the nuclear norm and saturation
//! (face) patterns for the linf-ball indicator. The dual order is expressed
//! through the primal order on mirror images, so a single `leq` suffices.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::regularizers::{mirror_map_conj, RegularizerKind};

#[derive(Debug, Clone, PartialEq)]
pub enum StratumError {
    /// Operands come from different stratifications (variant or size).
    VariantMismatch,
    /// The primal stratum is not below the certificate's upper stratum.
    InconsistentCertificate,
    /// A descriptor does not match the regularizer it is paired with.
    KindMismatch,
}

impl fmt::Display for StratumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StratumError::VariantMismatch => write!(f, "stratum variants do not match"),
            StratumError::InconsistentCertificate => {
                write!(f, "primal stratum is not below the certificate upper stratum")
            }
            StratumError::KindMismatch => write!(f, "stratum does not match the regularizer kind"),
        }
    }
}

/// Primal stratum descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stratum {
    /// Sign orthant signature for the l1 norm, entries in {-1, 0, +1}.
    SignPattern(Vec<i8>),
    /// Active blocks of the group l1,2 norm.
    BlockSupport(Vec<bool>),
    /// Rank stratum of the nuclear norm on n x n matrices.
    Rank { r: usize, side: usize },
    /// Face of the linf ball: +-1 where the coordinate is saturated, 0 where
    /// it is interior. The order is reversed with respect to sign patterns:
    /// a more saturated face lies in the closure of a less saturated one.
    FacePattern(Vec<i8>),
}

/// Dual stratum descriptor, paired with `Stratum` by the mirror maps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DualStratum {
    /// Saturation signature of a box-constrained dual vector (l1).
    SaturationPattern(Vec<i8>),
    /// Per-block saturation of the dual group-norm ball.
    BlockSaturation(Vec<bool>),
    /// Number of unit singular values of the dual matrix (nuclear).
    SaturationCount { count: usize, side: usize },
    /// Sign orthant of the dual vector of the linf-ball indicator.
    OrthantPattern(Vec<i8>),
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::SignPattern(s) | Stratum::FacePattern(s) => write_ternary(f, s),
            Stratum::BlockSupport(b) => write_bits(f, b),
            Stratum::Rank { r, .. } => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for DualStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualStratum::SaturationPattern(s) | DualStratum::OrthantPattern(s) => write_ternary(f, s),
            DualStratum::BlockSaturation(b) => write_bits(f, b),
            DualStratum::SaturationCount { count, .. } => write!(f, "{count}"),
        }
    }
}

fn write_ternary(f: &mut fmt::Formatter<'_>, s: &[i8]) -> fmt::Result {
    for &v in s {
        let c = match v {
            1 => '+',
            -1 => '-',
            _ => '0',
        };
        write!(f, "{c}")?;
    }
    Ok(())
}

fn write_bits(f: &mut fmt::Formatter<'_>, b: &[bool]) -> fmt::Result {
    for &v in b {
        write!(f, "{}", if v { '1' } else { '0' })?;
    }
    Ok(())
}

impl Stratum {
    /// Compact text form used in CSV traces.
    pub fn to_compact(&self) -> String {
        use alloc::string::ToString;
        self.to_string()
    }
}

/// Partial order on strata: `s <= t` iff the stratum `s` lies in the closure
/// of `t`.
pub fn leq(s: &Stratum, t: &Stratum) -> Result<bool, StratumError> {
    match (s, t) {
        (Stratum::SignPattern(a), Stratum::SignPattern(b)) => {
            if a.len() != b.len() {
                return Err(StratumError::VariantMismatch);
            }
            Ok(a.iter().zip(b).all(|(&x, &y)| x == 0 || x == y))
        }
        (Stratum::BlockSupport(a), Stratum::BlockSupport(b)) => {
            if a.len() != b.len() {
                return Err(StratumError::VariantMismatch);
            }
            Ok(a.iter().zip(b).all(|(&x, &y)| !x || y))
        }
        (Stratum::Rank { r: ra, side: na }, Stratum::Rank { r: rb, side: nb }) => {
            if na != nb {
                return Err(StratumError::VariantMismatch);
            }
            Ok(ra <= rb)
        }
        (Stratum::FacePattern(a), Stratum::FacePattern(b)) => {
            if a.len() != b.len() {
                return Err(StratumError::VariantMismatch);
            }
            // Reversed containment: every saturation of t must appear in s.
            Ok(a.iter().zip(b).all(|(&x, &y)| y == 0 || x == y))
        }
        _ => Err(StratumError::VariantMismatch),
    }
}

/// Stratum dimension in the sense of the complexity index: nonzero count,
/// active-block count, rank, or saturation count for linf-ball faces.
pub fn dim(s: &Stratum) -> usize {
    match s {
        Stratum::SignPattern(a) | Stratum::FacePattern(a) => a.iter().filter(|&&v| v != 0).count(),
        Stratum::BlockSupport(b) => b.iter().filter(|&&v| v).count(),
        Stratum::Rank { r, .. } => *r,
    }
}

/// `lower <= mid <= upper`.
pub fn sandwich_holds(lower: &Stratum, mid: &Stratum, upper: &Stratum) -> Result<bool, StratumError> {
    Ok(leq(lower, mid)? && leq(mid, upper)?)
}

/// Complexity-index excess bound: the dimension gap between the upper
/// stratum determined by a dual certificate and the primal stratum.
pub fn delta_star(
    primal: &Stratum,
    dual_upper: &DualStratum,
    kind: &RegularizerKind,
) -> Result<usize, StratumError> {
    let upper = mirror_map_conj(kind, dual_upper)?;
    if !leq(primal, &upper)? {
        return Err(StratumError::InconsistentCertificate);
    }
    Ok(dim(&upper) - dim(primal))
}
