use rayon::prelude::*;

use super::{Channel, Received};
use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::md;
use crate::neural::{predict, ModelWeights};
use crate::perm::Permutation;
use crate::rng;

/// Trials per Monte Carlo shard. Shard `i` always uses substream `i`, so
/// the outcome does not depend on how shards are spread over threads.
pub const SHARD_TRIALS: usize = 2000;

const EVAL_TAG: u64 = 0xB1E4;

#[derive(Clone, Copy, Debug)]
pub enum Decoder<'a> {
    Mlp(&'a ModelWeights),
    MdPlain,
    MdErasure,
    UlamNearest,
}

impl Decoder<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Mlp(_) => "mlp",
            Decoder::MdPlain => "md_plain",
            Decoder::MdErasure => "md_erasure",
            Decoder::UlamNearest => "ulam",
        }
    }

    fn check(&self, cb: &Codebook, channel: &Channel) -> Result<()> {
        match (self, channel) {
            (Decoder::Mlp(w), ch) => {
                ch.check_model(w.spec())?;
                if w.spec().n() != cb.n() {
                    return Err(Error::Config(format!(
                        "model is for n = {}, codebook has n = {}",
                        w.spec().n(),
                        cb.n()
                    )));
                }
                Ok(())
            }
            (Decoder::MdPlain | Decoder::MdErasure, Channel::Plc(p)) if p.is_synchronized(cb.n()) => {
                Ok(())
            }
            (Decoder::UlamNearest, Channel::Rm(_)) => Ok(()),
            (d, ch) => Err(Error::Config(format!(
                "decoder {} cannot read the {} channel with these parameters",
                d.name(),
                ch.tag()
            ))),
        }
    }

    pub fn decode(&self, received: &Received, cb: &Codebook) -> Result<Vec<u8>> {
        let symbols = match (self, received) {
            (Decoder::Mlp(w), r) => predict(w, r.nn_input())?,
            (Decoder::MdPlain, Received::Matrix(m)) => {
                md::md_decode_plain(&m.bits, cb)?.codeword.symbols().to_vec()
            }
            (Decoder::MdErasure, Received::Matrix(m)) => {
                md::md_decode_erasure(&m.bits, cb)?.codeword.symbols().to_vec()
            }
            (Decoder::UlamNearest, Received::Ranking(w)) => {
                md::ulam_nearest(w, cb)?.codeword.symbols().to_vec()
            }
            (d, _) => return Err(Error::Config(format!("decoder {} got the wrong input", d.name()))),
        };
        Ok(symbols)
    }
}

/// One evaluated point of a noise sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BlerRecord {
    pub code: String,
    pub n: usize,
    pub channel: Channel,
    pub decoder: String,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub seed: u64,
}

impl BlerRecord {
    /// Binomial standard deviation of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.bler * (1.0 - self.bler) / self.trials as f64).sqrt()
    }
}

/// Monte Carlo BLER with an arbitrary decoding rule. `decode` receives the
/// transmitted codeword (for reference decoders) and the channel output, and
/// returns the decided symbol vector; any coordinate mismatch is a block
/// error.
pub fn evaluate_bler_with<F>(
    cb: &Codebook,
    channel: &Channel,
    trials: u64,
    seed: u64,
    decode: F,
) -> Result<u64>
where
    F: Fn(&Permutation, &Received) -> Result<Vec<u8>> + Sync,
{
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    if cb.is_empty() {
        return Err(Error::InvalidCodebook("empty codebook".into()));
    }
    channel.validate(cb.n())?;
    let key = rng::mix(seed, EVAL_TAG);
    let shards = trials.div_ceil(SHARD_TRIALS as u64);
    let errors: Result<Vec<u64>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut stream = rng::substream(key, shard);
            let start = shard * SHARD_TRIALS as u64;
            let count = (trials - start).min(SHARD_TRIALS as u64);
            let mut errors = 0u64;
            for _ in 0..count {
                let (_, c) = cb.sample(&mut stream);
                let out = channel.transmit(c, &mut stream)?;
                let decided = decode(c, &out)?;
                if decided.as_slice() != c.symbols() {
                    errors += 1;
                }
            }
            Ok(errors)
        })
        .collect();
    Ok(errors?.into_iter().sum())
}

/// BLER of one of the built-in decoders.
pub fn evaluate_bler(
    decoder: Decoder<'_>,
    cb: &Codebook,
    channel: &Channel,
    trials: u64,
    seed: u64,
) -> Result<BlerRecord> {
    decoder.check(cb, channel)?;
    let block_errors = evaluate_bler_with(cb, channel, trials, seed, |_, r| decoder.decode(r, cb))?;
    Ok(BlerRecord {
        code: cb.family().map_or_else(|| cb.tag(), |f| f.label()),
        n: cb.n(),
        channel: channel.clone(),
        decoder: decoder.name().to_string(),
        trials,
        block_errors,
        bler: block_errors as f64 / trials as f64,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::CodeFamily;
    use crate::neural::{init_weights, MlpSpec};
    use crate::plc::PlcParams;
    use crate::rm::RmParams;

    fn ce6() -> Codebook {
        CodeFamily::tenengolts_even(6).unwrap().enumerate().unwrap()
    }

    #[test]
    fn genie_decoder_never_errs() {
        let cb = ce6();
        let ch = Channel::Plc(PlcParams::sync(6, 0.2, 0.1, 0.1));
        let errors = evaluate_bler_with(&cb, &ch, 5000, 1, |c, _| Ok(c.symbols().to_vec())).unwrap();
        assert_eq!(errors, 0);
    }

    #[test]
    fn constant_decoder_errs_at_one_minus_one_over_m() {
        let cb = ce6();
        let ch = Channel::Plc(PlcParams::clean(6));
        let first = cb.get(0).symbols().to_vec();
        let trials = 100_000u64;
        let errors = evaluate_bler_with(&cb, &ch, trials, 2, |_, _| Ok(first.clone())).unwrap();
        let p = 1.0 - 1.0 / 56.0;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        let bler = errors as f64 / trials as f64;
        assert!((bler - p).abs() < 3.0 * sd, "{bler} vs {p}");
    }

    #[test]
    fn noiseless_md_is_perfect() {
        let cb = ce6();
        let ch = Channel::Plc(PlcParams::clean(6));
        for d in [Decoder::MdPlain, Decoder::MdErasure] {
            let r = evaluate_bler(d, &cb, &ch, 3000, 3).unwrap();
            assert_eq!(r.block_errors, 0);
            assert_eq!(r.bler, 0.0);
        }
        let il = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
        let clean = Channel::Rm(RmParams::with_default_levels(9, 0.0, 1.0, 0.0).unwrap());
        assert_eq!(evaluate_bler(Decoder::UlamNearest, &il, &clean, 3000, 3).unwrap().bler, 0.0);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let cb = ce6();
        let ch = Channel::Plc(PlcParams::sync(6, 0.04, 0.01, 0.01));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| evaluate_bler(Decoder::MdErasure, &cb, &ch, 9_001, 4).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(3));
        assert!(a.block_errors > 0);
    }

    #[test]
    fn decoder_channel_mismatch() {
        let cb = ce6();
        let unsync = Channel::Plc(PlcParams {
            l_max: 1,
            c_max: 9,
            ..PlcParams::clean(6)
        });
        assert!(evaluate_bler(Decoder::MdPlain, &cb, &unsync, 10, 0).is_err());
        let w = init_weights(&MlpSpec::binary_matrix(6, 6, 4), 0).unwrap();
        assert!(evaluate_bler(Decoder::Mlp(&w), &cb, &unsync, 10, 0).is_err());
        assert!(evaluate_bler(Decoder::UlamNearest, &cb, &unsync, 10, 0).is_err());
        assert!(evaluate_bler(Decoder::MdPlain, &cb, &Channel::Plc(PlcParams::clean(6)), 0, 0).is_err());
    }

    #[test]
    fn untrained_network_output_counts_as_errors() {
        // zero weights predict the all-ones vector, which is never a codeword
        let cb = ce6();
        let w = crate::neural::ModelWeights::zeros(MlpSpec::binary_matrix(6, 6, 4)).unwrap();
        let r = evaluate_bler(Decoder::Mlp(&w), &cb, &Channel::Plc(PlcParams::clean(6)), 500, 0).unwrap();
        assert_eq!(r.block_errors, 500);
    }
}
