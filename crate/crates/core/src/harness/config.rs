//! TOML experiment files for sweeps and training runs.
//!
//! ```toml
//! seed = 1
//! trials = 100000
//! decoders = ["md_erasure", "md_plain"]
//! # model = "models/c6e.pmnd"      # required when "mlp" is listed
//!
//! [code]
//! family = "tenengolts_even"
//! n = 6
//!
//! [channel]
//! kind = "plc"
//! p_im = 0.001
//! p_pfd = 0.001
//!
//! [sweep]
//! parameter = "p_bg"
//! values = [0.005, 0.01]
//! ```
//!
//! Rank-modulation channels use `kind = "rm"` with `sigma1`, `p`, and either
//! an absolute `sigma2` or `sigma2_gap_multiple` (sigma2 as a multiple of the
//! smallest gap between charge levels). `levels` defaults to the standard
//! arithmetic sets for n = 9 and n = 12.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::Channel;
use crate::codes::{CodeFamily, CodeKind, Codebook};
use crate::error::{Error, Result};
use crate::neural::{InputKind, MlpSpec};
use crate::plc::PlcParams;
use crate::rm::{default_levels, RmParams};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub family: String,
    pub n: usize,
}

impl CodeConfig {
    pub fn family(&self) -> Result<CodeFamily> {
        CodeFamily::new(CodeKind::from_str(&self.family)?, self.n)
    }

    pub fn codebook(&self) -> Result<Codebook> {
        self.family()?.enumerate()
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    Plc {
        #[serde(default)]
        p_bg: f64,
        #[serde(default)]
        p_im: f64,
        #[serde(default)]
        p_pfd: f64,
        #[serde(default)]
        p_i: f64,
        #[serde(default)]
        p_d: f64,
        /// Defaults to 1 when insertions are possible, else 0.
        l_max: Option<usize>,
        /// Defaults to `n` without insertions/deletions, else `n + 3`.
        c_max: Option<usize>,
    },
    Rm {
        #[serde(default)]
        sigma1: f64,
        sigma2: Option<f64>,
        sigma2_gap_multiple: Option<f64>,
        #[serde(default)]
        p: f64,
        levels: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    PBg,
    PIm,
    PPfd,
    PI,
    PD,
    /// Sets `p_i` and `p_d` together.
    #[serde(rename = "p_i_d")]
    PId,
    Sigma1,
    Sigma2,
    /// Probability of the large charge disturbance.
    P,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub parameter: SweptParam,
    pub values: Vec<f64>,
}

impl ChannelConfig {
    /// Channel for codes of length `n`, with `param = value` applied.
    pub fn build(&self, n: usize, set: Option<(SweptParam, f64)>) -> Result<Channel> {
        let channel = match self.clone() {
            ChannelConfig::Plc {
                mut p_bg,
                mut p_im,
                mut p_pfd,
                mut p_i,
                mut p_d,
                l_max,
                c_max,
            } => {
                match set {
                    None => {}
                    Some((SweptParam::PBg, v)) => p_bg = v,
                    Some((SweptParam::PIm, v)) => p_im = v,
                    Some((SweptParam::PPfd, v)) => p_pfd = v,
                    Some((SweptParam::PI, v)) => p_i = v,
                    Some((SweptParam::PD, v)) => p_d = v,
                    Some((SweptParam::PId, v)) => {
                        p_i = v;
                        p_d = v;
                    }
                    Some((other, _)) => {
                        return Err(Error::Config(format!(
                            "{other:?} is not a PLC channel parameter"
                        )))
                    }
                }
                let l_max = l_max.unwrap_or(usize::from(p_i > 0.0));
                let c_max = c_max.unwrap_or(if p_i == 0.0 && p_d == 0.0 { n } else { n + 3 });
                Channel::Plc(PlcParams {
                    p_bg,
                    p_im,
                    p_pfd,
                    p_i,
                    p_d,
                    l_max,
                    c_max,
                })
            }
            ChannelConfig::Rm {
                mut sigma1,
                mut sigma2,
                sigma2_gap_multiple,
                mut p,
                levels,
            } => {
                match set {
                    None => {}
                    Some((SweptParam::Sigma1, v)) => sigma1 = v,
                    Some((SweptParam::Sigma2, v)) => sigma2 = Some(v),
                    Some((SweptParam::P, v)) => p = v,
                    Some((other, _)) => {
                        return Err(Error::Config(format!(
                            "{other:?} is not a rank-modulation channel parameter"
                        )))
                    }
                }
                let levels = match levels {
                    Some(l) => l,
                    None => default_levels(n)?,
                };
                let gap = levels
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                let sigma2 = match (sigma2, sigma2_gap_multiple) {
                    (Some(s), _) => s,
                    (None, Some(k)) => k * gap,
                    (None, None) => {
                        return Err(Error::Config(
                            "rm channel needs sigma2 or sigma2_gap_multiple".into(),
                        ))
                    }
                };
                Channel::Rm(RmParams::new(sigma1, sigma2, p, levels)?)
            }
        };
        channel.validate(n)?;
        Ok(channel)
    }
}

fn default_batch() -> usize {
    200
}

fn default_lr() -> f64 {
    0.001
}

fn default_validation() -> f64 {
    0.1
}

fn default_dropout() -> f64 {
    crate::neural::PAPER_DROPOUT
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub trials: u64,
    pub decoders: Vec<String>,
    pub model: Option<PathBuf>,
    pub code: CodeConfig,
    pub channel: ChannelConfig,
    pub sweep: GridConfig,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// A training run: code, base channel, the noise grid mixed into the
/// training set, and the architecture.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub seed: u64,
    pub delta: usize,
    pub max_epochs: usize,
    pub hidden: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_validation")]
    pub validation_fraction: f64,
    #[serde(default = "default_dropout")]
    pub dropout: f64,
    pub embed_dim: Option<usize>,
    pub code: CodeConfig,
    pub channel: ChannelConfig,
    pub grid: GridConfig,
}

impl TrainFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn noise_grid(&self) -> Result<Vec<Channel>> {
        if self.grid.values.is_empty() {
            return Err(Error::Config("empty noise grid".into()));
        }
        self.grid
            .values
            .iter()
            .map(|&v| self.channel.build(self.code.n, Some((self.grid.parameter, v))))
            .collect()
    }

    pub fn spec(&self) -> Result<MlpSpec> {
        let n = self.code.n;
        let grid = self.noise_grid()?;
        let input = match &grid[0] {
            Channel::Plc(p) => InputKind::BinaryMatrix { n, c_max: p.c_max },
            Channel::Rm(_) => InputKind::SymbolSequence {
                n,
                embed_dim: self.embed_dim.unwrap_or(n),
            },
        };
        let spec = MlpSpec {
            input,
            hidden: self.hidden,
            dropout: self.dropout,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn train_config(&self) -> Result<super::TrainConfig> {
        Ok(super::TrainConfig {
            delta: self.delta,
            batch_size: self.batch_size,
            lr: self.lr,
            max_epochs: self.max_epochs,
            seed: self.seed,
            noise_grid: self.noise_grid()?,
            validation_fraction: self.validation_fraction,
        })
    }
}
