//! Levenshtein-family alignment scoring through two interchangeable engines:
//! an exact dynamic-programming reference and a clock-cycle-accurate
//! simulation of a delay-element lattice that computes the same distances as
//! signal propagation times. A SNAP-style hash-index aligner, a read
//! simulator, and a batch device interface sit on top of the engines.
//!
//! The two engines are kept order-equivalent: for any candidate set, sorting
//! by decoded lattice keys gives the same result as sorting by the exact
//! distances, which is what makes the lattice usable inside the aligner's
//! argmin loop.

pub mod aligner;
pub mod device;
pub mod fastx;
pub mod lattice;
pub mod oracle;
pub mod penalty;
pub mod seq;

pub use penalty::{DelayPenalties, EncodingParams, GapPenalties};
pub use seq::PackedSequence;

/// Which output tap of the distance computation is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Semi-global: query fully consumed, best reference prefix span
    /// (minimum over the last row).
    Sw,
    /// Global: bottom-right cell.
    Nw,
    /// Global with a hard timeout encoding a maximum permissible distance.
    Lv,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Sw => write!(f, "sw"),
            Mode::Nw => write!(f, "nw"),
            Mode::Lv => write!(f, "lv"),
        }
    }
}
