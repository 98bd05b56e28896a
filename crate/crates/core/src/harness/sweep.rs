use std::fmt::Write as _;
use std::path::Path;

use super::config::SweepConfig;
use super::eval::{evaluate_bler, BlerRecord, Decoder};
use super::{write_atomically, Channel};
use crate::error::{Error, Result};
use crate::neural::load_model;

pub const CSV_HEADER: &str =
    "code,n,channel,p_bg,p_im,p_pfd,p_i,p_d,sigma1,sigma2,p_large,decoder,trials,block_errors,bler,seed";

/// Evaluates every decoder at every grid value, in grid order. Grid point
/// `i` is simulated with seed `seed + i`, shared by all decoders so they see
/// the same channel realizations.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<BlerRecord>> {
    if config.sweep.values.is_empty() {
        return Err(Error::Config("empty sweep grid".into()));
    }
    if config.decoders.is_empty() {
        return Err(Error::Config("no decoders listed".into()));
    }
    let cb = config.code.codebook()?;
    let model = if config.decoders.iter().any(|d| d == "mlp") {
        let path = config
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("decoder 'mlp' needs a model path".into()))?;
        Some(load_model(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("model {}: {io}", path.display())),
            e => e,
        })?)
    } else {
        None
    };
    let decoders: Vec<Decoder<'_>> = config
        .decoders
        .iter()
        .map(|name| match name.as_str() {
            "mlp" => Ok(Decoder::Mlp(model.as_ref().expect("loaded above"))),
            "md_plain" => Ok(Decoder::MdPlain),
            "md_erasure" => Ok(Decoder::MdErasure),
            "ulam" => Ok(Decoder::UlamNearest),
            other => Err(Error::Config(format!("unknown decoder '{other}'"))),
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(config.sweep.values.len() * decoders.len());
    for (i, &v) in config.sweep.values.iter().enumerate() {
        let channel = config
            .channel
            .build(cb.n(), Some((config.sweep.parameter, v)))?;
        let seed = config.seed.wrapping_add(i as u64);
        for d in &decoders {
            records.push(evaluate_bler(*d, &cb, &channel, config.trials, seed)?);
        }
    }
    Ok(records)
}

fn opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        write!(out, "{v}").unwrap();
    }
    out.push(',');
}

/// CSV text with a header row; fields of the other channel kind are empty.
pub fn records_to_csv(records: &[BlerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        write!(out, "{},{},{},", r.code, r.n, r.channel.tag()).unwrap();
        let (plc, rm) = match &r.channel {
            Channel::Plc(p) => (Some(p), None),
            Channel::Rm(q) => (None, Some(q)),
        };
        opt(&mut out, plc.map(|p| p.p_bg));
        opt(&mut out, plc.map(|p| p.p_im));
        opt(&mut out, plc.map(|p| p.p_pfd));
        opt(&mut out, plc.map(|p| p.p_i));
        opt(&mut out, plc.map(|p| p.p_d));
        opt(&mut out, rm.map(|q| q.sigma1));
        opt(&mut out, rm.map(|q| q.sigma2));
        opt(&mut out, rm.map(|q| q.p_large));
        writeln!(
            out,
            "{},{},{},{},{}",
            r.decoder, r.trials, r.block_errors, r.bler, r.seed
        )
        .unwrap();
    }
    out
}

pub(crate) fn write_csv(records: &[BlerRecord], path: &Path) -> Result<()> {
    write_atomically(path, records_to_csv(records).as_bytes())
}

impl SweepConfig {
    /// Runs the sweep and writes the CSV atomically.
    pub fn run_to_csv(&self, path: &Path) -> Result<Vec<BlerRecord>> {
        let records = run_sweep(self)?;
        write_csv(&records, path)?;
        Ok(records)
    }
}
