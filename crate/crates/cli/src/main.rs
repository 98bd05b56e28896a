use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use permlab::harness::{
    code_audit, evaluate_bler, gradient_check, proposition_audit, records_to_csv, train,
    write_atomically, BlerRecord, Channel, ChannelConfig, CodeConfig, Decoder, SweepConfig,
    TrainFile,
};
use permlab::neural::{load_model, save_model};
use permlab::plc::transmit as plc_transmit;
use permlab::rm::{encode_charges, perturb, read_ranking};
use permlab::rng;

#[derive(Parser)]
#[command(name = "permlab", version, about = "Permutation-code decoding lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Code enumeration and distance audits
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Power-line channel simulation
    #[command(subcommand)]
    Plc(PlcCmd),
    /// Rank-modulation channel simulation
    #[command(subcommand)]
    Rm(RmCmd),
    /// Minimum-distance decoders
    #[command(subcommand)]
    Md(MdCmd),
    /// Neural decoder training and evaluation
    #[command(subcommand)]
    Nn(NnCmd),
    /// Run a BLER sweep described by a config file and write CSV
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the trial count in the config
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Compare backprop gradients with finite differences
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Exhaustive erasure-decoding audit over bounded error patterns
    PropositionAudit {
        #[command(flatten)]
        code: CodeArgs,
        /// Largest e1 + e2 + e3 (default: minimum distance - 1)
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Subcommand)]
enum CodesCmd {
    /// Print or save the codebook
    Enum {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size and minimum Hamming/Ulam distances
    Audit {
        #[command(flatten)]
        code: CodeArgs,
    },
}

#[derive(Subcommand)]
enum PlcCmd {
    /// Send random codewords and print the received matrices
    Sim {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        channel: PlcArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
}

#[derive(Subcommand)]
enum RmCmd {
    /// Program random codewords and print charges and read rankings
    Sim {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        channel: RmArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
}

#[derive(Subcommand)]
enum MdCmd {
    /// BLER of a minimum-distance decoder at one channel point
    Eval {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// md_erasure, md_plain or ulam
        #[arg(long, default_value = "md_erasure")]
        decoder: String,
    },
}

#[derive(Subcommand)]
enum NnCmd {
    /// Train a model from a config file
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// BLER of a saved model at one channel point
    Eval {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// tenengolts, tenengolts_even or interleaved
    #[arg(long, default_value = "tenengolts_even")]
    family: String,
    #[arg(long)]
    n: usize,
}

impl CodeArgs {
    fn config(&self) -> CodeConfig {
        CodeConfig {
            family: self.family.clone(),
            n: self.n,
        }
    }
}

#[derive(Args, Clone)]
struct PlcArgs {
    #[arg(long, default_value_t = 0.0)]
    p_bg: f64,
    #[arg(long, default_value_t = 0.0)]
    p_im: f64,
    #[arg(long, default_value_t = 0.0)]
    p_pfd: f64,
    #[arg(long, default_value_t = 0.0)]
    p_i: f64,
    #[arg(long, default_value_t = 0.0)]
    p_d: f64,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    c_max: Option<usize>,
}

impl PlcArgs {
    fn config(&self) -> ChannelConfig {
        ChannelConfig::Plc {
            p_bg: self.p_bg,
            p_im: self.p_im,
            p_pfd: self.p_pfd,
            p_i: self.p_i,
            p_d: self.p_d,
            l_max: self.l_max,
            c_max: self.c_max,
        }
    }
}

#[derive(Args, Clone)]
struct RmArgs {
    #[arg(long, default_value_t = 0.0)]
    sigma1: f64,
    #[arg(long)]
    sigma2: Option<f64>,
    /// sigma2 as a multiple of the smallest charge-level gap
    #[arg(long, default_value_t = 2.0)]
    sigma2_gap_multiple: f64,
    /// Probability of the large disturbance
    #[arg(long, default_value_t = 0.0)]
    p: f64,
}

impl RmArgs {
    fn config(&self) -> ChannelConfig {
        ChannelConfig::Rm {
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            sigma2_gap_multiple: Some(self.sigma2_gap_multiple),
            p: self.p,
            levels: None,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// plc or rm
    #[arg(long, default_value = "plc")]
    channel: String,
    #[command(flatten)]
    plc: PlcArgs,
    #[command(flatten)]
    rm: RmArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Also write the record as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvalArgs {
    fn channel(&self, n: usize) -> anyhow::Result<Channel> {
        let cfg = match self.channel.as_str() {
            "plc" => self.plc.config(),
            "rm" => self.rm.config(),
            other => bail!(permlab::Error::Config(format!("unknown channel '{other}'"))),
        };
        Ok(cfg.build(n, None)?)
    }

    fn finish(&self, record: BlerRecord) -> anyhow::Result<()> {
        print_record(&record);
        if let Some(path) = &self.out {
            write_atomically(path, records_to_csv(&[record]).as_bytes())?;
        }
        Ok(())
    }
}

fn print_record(r: &BlerRecord) {
    println!(
        "{} {} {} trials={} errors={} bler={:.6} (+/- {:.6})",
        r.code,
        r.channel.tag(),
        r.decoder,
        r.trials,
        r.block_errors,
        r.bler,
        r.std_error()
    );
}

/// Audit outcome: success or an audit that ran but found failures.
enum Outcome {
    Done,
    AuditFailed,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Codes(CodesCmd::Enum { code, out }) => {
            let cb = code.config().codebook()?;
            match out {
                Some(path) => {
                    cb.save_text(&path)?;
                    eprintln!("wrote {} codewords to {}", cb.len(), path.display());
                }
                None => print!("{}", cb.to_text()),
            }
        }
        Command::Codes(CodesCmd::Audit { code }) => {
            let a = code_audit(&code.config().codebook()?)?;
            let show = |d: Option<usize>| d.map_or("-".to_string(), |d| d.to_string());
            println!(
                "{} n={} size={} min_hamming={} min_ulam={}",
                a.label,
                a.n,
                a.size,
                show(a.min_hamming),
                show(a.min_ulam)
            );
        }
        Command::Plc(PlcCmd::Sim {
            code,
            channel,
            seed,
            trials,
        }) => {
            let cb = code.config().codebook()?;
            let Channel::Plc(params) = channel.config().build(cb.n(), None)? else {
                unreachable!()
            };
            let mut stream = rng::stream(seed);
            for _ in 0..trials {
                let (_, c) = cb.sample(&mut stream);
                let m = plc_transmit(c, &params, &mut stream)?;
                println!("sent {c}  occupied={}", m.occupied);
                print!("{}", m.bits);
            }
        }
        Command::Rm(RmCmd::Sim {
            code,
            channel,
            seed,
            trials,
        }) => {
            let cb = code.config().codebook()?;
            let Channel::Rm(params) = channel.config().build(cb.n(), None)? else {
                unreachable!()
            };
            let mut stream = rng::stream(seed);
            let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
            for _ in 0..trials {
                let (_, c) = cb.sample(&mut stream);
                let charges = encode_charges(c, &params.levels)?;
                let noisy = perturb(&charges, &params, &mut stream);
                println!("sent {c}");
                println!("  charges {}", fmt(&charges));
                println!("  read    {}", fmt(&noisy));
                println!("  ranking {}", read_ranking(&noisy)?);
            }
        }
        Command::Md(MdCmd::Eval {
            code,
            eval,
            decoder,
        }) => {
            let cb = code.config().codebook()?;
            let channel = eval.channel(cb.n())?;
            let decoder = match decoder.as_str() {
                "md_erasure" => Decoder::MdErasure,
                "md_plain" => Decoder::MdPlain,
                "ulam" => Decoder::UlamNearest,
                other => bail!(permlab::Error::Config(format!("unknown decoder '{other}'"))),
            };
            let record = evaluate_bler(decoder, &cb, &channel, eval.trials, eval.seed)?;
            eval.finish(record)?;
        }
        Command::Nn(NnCmd::Train { config, out, seed }) => {
            let mut file = TrainFile::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            if let Some(seed) = seed {
                file.seed = seed;
            }
            let spec = file.spec()?;
            let cb = file.code.codebook()?;
            let outcome = train(&spec, &cb, &file.train_config()?)?;
            for e in &outcome.trace {
                println!(
                    "epoch {:>3}  loss {:.5}  validation BLER {:.5}",
                    e.epoch, e.train_loss, e.validation_bler
                );
            }
            save_model(&outcome.weights, &out)?;
            println!(
                "kept epoch {} ({} training / {} validation samples, {} parameters) -> {}",
                outcome.best_epoch,
                outcome.train_samples,
                outcome.validation_samples,
                spec.param_count(),
                out.display()
            );
        }
        Command::Nn(NnCmd::Eval { code, eval, model }) => {
            let cb = code.config().codebook()?;
            let weights = load_model(&model).with_context(|| format!("loading {}", model.display()))?;
            let channel = eval.channel(cb.n())?;
            let record = evaluate_bler(Decoder::Mlp(&weights), &cb, &channel, eval.trials, eval.seed)?;
            eval.finish(record)?;
        }
        Command::Sweep {
            config,
            out,
            seed,
            trials,
        } => {
            let mut cfg = SweepConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            for r in cfg.run_to_csv(&out)? {
                print_record(&r);
            }
        }
        Command::Gradcheck {
            configs,
            seed,
            tolerance,
        } => {
            let r = gradient_check(configs, seed)?;
            println!(
                "{} configurations, {} parameters, max relative error {:.3e} (in {})",
                r.configs, r.params_checked, r.max_rel_error, r.worst_tensor
            );
            if !r.passed(tolerance) {
                return Ok(Outcome::AuditFailed);
            }
        }
        Command::PropositionAudit { code, budget } => {
            let cb = code.config().codebook()?;
            let r = proposition_audit(&cb, budget)?;
            println!(
                "{} codewords x {} patterns (budget {}, min distance {}): {} failures",
                r.codewords,
                r.patterns_per_codeword,
                r.budget,
                r.min_distance.map_or("-".into(), |d| d.to_string()),
                r.failures
            );
            for f in &r.examples {
                println!(
                    "  codeword #{} {:?} -> {}{}",
                    f.codeword,
                    f.pattern,
                    f.decoded,
                    if f.tie { " (tie)" } else { "" }
                );
            }
            if !r.passed() {
                return Ok(Outcome::AuditFailed);
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::AuditFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
