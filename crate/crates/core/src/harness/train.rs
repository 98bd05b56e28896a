use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::dataset::{generate_dataset, Dataset};
use super::Channel;
use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::neural::model::predict_with;
use crate::neural::{init_weights, AdamState, Gradient, MlpSpec, ModelWeights, Workspace};
use crate::rng;

const SPLIT_TAG: u64 = 0x5B11;
const INIT_TAG: u64 = 0x1417;
const SHUFFLE_TAG: u64 = 0x5F1E;
const DROPOUT_TAG: u64 = 0xD40F;

/// Samples per gradient work unit. Fixed so that gradient sums are
/// reduced in the same order for any thread count.
const GRAD_CHUNK: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Passes of each codeword through the channel grid.
    pub delta: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub noise_grid: Vec<Channel>,
    /// Share of the training set held out to pick the best epoch.
    pub validation_fraction: f64,
}

impl TrainConfig {
    pub fn new(delta: usize, max_epochs: usize, seed: u64, noise_grid: Vec<Channel>) -> Self {
        TrainConfig {
            delta,
            batch_size: 200,
            lr: AdamState::DEFAULT_LR,
            max_epochs,
            seed,
            noise_grid,
            validation_fraction: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.delta == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::Config(
                "delta, batch_size and max_epochs must be positive".into(),
            ));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 0.5) {
            return Err(Error::Config(format!(
                "validation_fraction {} not in (0, 0.5)",
                self.validation_fraction
            )));
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean summed cross-entropy over the training samples of the epoch.
    pub train_loss: f64,
    pub validation_bler: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub weights: ModelWeights,
    pub trace: Vec<EpochStats>,
    /// 1-based epoch whose weights were returned.
    pub best_epoch: usize,
    pub train_samples: usize,
    pub validation_samples: usize,
}

/// Generates the dataset from `config.noise_grid` and trains on it.
pub fn train(spec: &MlpSpec, cb: &Codebook, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    for ch in &config.noise_grid {
        ch.check_model(spec)?;
    }
    let data = generate_dataset(cb, &config.noise_grid, config.delta, config.seed)?;
    train_on(spec, &data, config)
}

/// Adam over shuffled mini-batches; keeps the weights of the epoch with the
/// lowest validation BLER (earliest on ties).
pub fn train_on(spec: &MlpSpec, data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    spec.validate()?;
    if data.len() < 2 {
        return Err(Error::Config("training needs at least two samples".into()));
    }
    if data.input_len() != spec.input_len() {
        return Err(Error::Shape(format!(
            "dataset inputs have {} entries, model expects {}",
            data.input_len(),
            spec.input_len()
        )));
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng::stream(rng::mix(config.seed, SPLIT_TAG)));
    let held_out = ((data.len() as f64 * config.validation_fraction).round() as usize)
        .clamp(1, data.len() - 1);
    let (validation, train_set) = order.split_at(held_out);
    let validation = validation.to_vec();
    let mut train_set = train_set.to_vec();

    let mut weights = init_weights(spec, rng::mix(config.seed, INIT_TAG))?;
    let mut adam = AdamState::new(&weights, config.lr);
    let mut best: Option<(f64, usize, ModelWeights)> = None;
    let mut trace = Vec::with_capacity(config.max_epochs);
    let mut batch_counter = 0u64;

    for epoch in 1..=config.max_epochs {
        train_set.shuffle(&mut rng::stream(rng::mix(config.seed, SHUFFLE_TAG ^ epoch as u64)));
        let dropout_key = rng::mix(config.seed, DROPOUT_TAG);
        let mut loss_sum = 0.0;
        for batch in train_set.chunks(config.batch_size) {
            let parts: Vec<(f64, Vec<f64>)> = batch
                .par_chunks(GRAD_CHUNK)
                .enumerate()
                .map(|(c, chunk)| {
                    let mut stream = rng::substream(dropout_key, batch_counter * 1024 + c as u64);
                    let mut ws = Workspace::new(spec);
                    let mut grad = vec![0.0; weights.params().len()];
                    let mut loss = 0.0;
                    for &s in chunk {
                        loss += weights.accumulate(
                            data.input(s),
                            data.target(s),
                            &mut ws,
                            Some(&mut stream),
                            &mut grad,
                        );
                    }
                    (loss, grad)
                })
                .collect();
            let mut total = Gradient {
                values: vec![0.0; weights.params().len()],
            };
            for (loss, grad) in parts {
                loss_sum += loss;
                for (t, g) in total.values.iter_mut().zip(&grad) {
                    *t += g;
                }
            }
            total.scale(1.0 / batch.len() as f64);
            adam.update(&mut weights, &total)?;
            batch_counter += 1;
        }

        let validation_bler = block_error_rate(&weights, data, &validation);
        trace.push(EpochStats {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            validation_bler,
        });
        if best.as_ref().is_none_or(|(b, _, _)| validation_bler < *b) {
            best = Some((validation_bler, epoch, weights.clone()));
        }
    }

    let (_, best_epoch, weights) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        weights,
        trace,
        best_epoch,
        train_samples: train_set.len(),
        validation_samples: validation.len(),
    })
}

/// Fraction of the listed samples whose prediction differs from the target.
pub(crate) fn block_error_rate(w: &ModelWeights, data: &Dataset, samples: &[usize]) -> f64 {
    let errors: usize = samples
        .par_chunks(256)
        .map(|chunk| {
            let mut ws = Workspace::new(w.spec());
            chunk
                .iter()
                .filter(|&&s| predict_with(w, data.input(s), &mut ws) != data.target(s))
                .count()
        })
        .sum();
    errors as f64 / samples.len() as f64
}
