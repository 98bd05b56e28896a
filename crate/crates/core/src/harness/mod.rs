//! Datasets, training, BLER evaluation, sweeps and audits.

mod audit;
mod config;
mod dataset;
mod eval;
mod gradcheck;
mod sweep;
mod train;

pub use audit::{code_audit, proposition_audit, AuditFailure, CodeAudit, PropositionReport};
pub use config::{ChannelConfig, CodeConfig, GridConfig, SweepConfig, SweptParam, TrainFile};
pub use dataset::{generate_dataset, Dataset};
pub use eval::{evaluate_bler, evaluate_bler_with, BlerRecord, Decoder, SHARD_TRIALS};
pub use gradcheck::{gradient_check, GradcheckReport};
pub use sweep::{records_to_csv, run_sweep, CSV_HEADER};
pub use train::{train, train_on, EpochStats, TrainConfig, TrainOutcome};

use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::neural::{InputKind, MlpSpec};
use crate::perm::Permutation;
use crate::plc::{self, ChannelMatrix, PlcParams};
use crate::rm::{self, RmParams};

/// A fully parameterized channel.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Plc(PlcParams),
    Rm(RmParams),
}

/// What a decoder sees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Received {
    Matrix(ChannelMatrix),
    Ranking(Permutation),
}

impl Received {
    /// Raw neural-network input: matrix bits row-major, or the symbols.
    pub fn nn_input(&self) -> &[u8] {
        match self {
            Received::Matrix(m) => m.bits.as_slice(),
            Received::Ranking(p) => p.symbols(),
        }
    }
}

impl Channel {
    pub fn tag(&self) -> &'static str {
        match self {
            Channel::Plc(_) => "plc",
            Channel::Rm(_) => "rm",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Channel::Plc(p) => p.validate(n),
            Channel::Rm(r) => {
                r.validate()?;
                if r.n() != n {
                    return Err(Error::InvalidParams(format!(
                        "{} charge levels for codes of length {n}",
                        r.n()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, p: &Permutation, rng: &mut R) -> Result<Received> {
        match self {
            Channel::Plc(params) => Ok(Received::Matrix(plc::transmit(p, params, rng)?)),
            Channel::Rm(params) => Ok(Received::Ranking(rm::transmit(p, params, rng)?)),
        }
    }

    /// Clean channel output of `p`.
    pub fn noiseless(&self) -> Channel {
        match self {
            Channel::Plc(p) => Channel::Plc(PlcParams {
                p_bg: 0.0,
                p_im: 0.0,
                p_pfd: 0.0,
                p_i: 0.0,
                p_d: 0.0,
                ..*p
            }),
            Channel::Rm(r) => Channel::Rm(RmParams {
                sigma1: 0.0,
                p_large: 0.0,
                ..r.clone()
            }),
        }
    }

    /// Checks that a model built for `spec` can read this channel's output.
    pub fn check_model(&self, spec: &MlpSpec) -> Result<()> {
        match (self, spec.input) {
            (Channel::Plc(p), InputKind::BinaryMatrix { c_max, .. }) if p.c_max == c_max => Ok(()),
            (Channel::Rm(_), InputKind::SymbolSequence { .. }) => Ok(()),
            _ => Err(Error::Config(format!(
                "model input {:?} does not match the {} channel",
                spec.input,
                self.tag()
            ))),
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
