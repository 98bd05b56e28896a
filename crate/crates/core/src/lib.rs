//! Permutation codes, their channels and decoders.
//!
//! Two channel families are modelled: a power-line channel where a
//! permutation is sent as a sequence of frequencies (seen by the receiver as
//! a binary matrix) and a flash-memory rank-modulation channel where the
//! permutation is the ranking of cell charges. Codewords are decoded either
//! by minimum-distance search or by a multi-head MLP trained on simulated
//! channel outputs.

pub mod codes;
pub mod error;
pub mod harness;
pub mod md;
pub mod neural;
pub mod perm;
pub mod plc;
pub mod rm;
pub mod rng;

pub use codes::{CodeFamily, CodeKind, Codebook};
pub use error::{Error, Result};
pub use perm::{BitMatrix, Parity, PermMatrix, Permutation};
