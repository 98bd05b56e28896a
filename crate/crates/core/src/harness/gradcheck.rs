use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::neural::{init_weights, MlpSpec, ModelWeights, Workspace};
use crate::perm::Permutation;
use crate::rng;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Denominator floor for the relative error, so that gradients that vanish
/// up to rounding are not divided by zero.
const REL_FLOOR: f64 = 1e-5;

/// Pre-activations closer than this to the ReLU kink trigger a resample.
const KINK_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    pub configs: usize,
    pub params_checked: usize,
    pub max_rel_error: f64,
    /// Tensor holding the worst entry.
    pub worst_tensor: String,
}

impl GradcheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

struct Case {
    weights: ModelWeights,
    input: Vec<u8>,
    target: Permutation,
    mask: Vec<f64>,
}

fn random_case<R: Rng>(r: &mut R) -> Result<Case> {
    let n = r.random_range(3..=5usize);
    let hidden = r.random_range(3..=6usize);
    let dropout = [0.0, 0.1, 0.3][r.random_range(0..3)];
    let base = if r.random::<bool>() {
        MlpSpec::binary_matrix(n, r.random_range(n..=n + 3), hidden)
    } else {
        MlpSpec::symbol_sequence(n, hidden)
    };
    let spec = base.with_dropout(dropout);
    let mut weights = init_weights(&spec, r.random())?;
    let biases: Vec<_> = weights
        .tensors()
        .iter()
        .filter(|t| t.name.ends_with(".b"))
        .map(|t| t.range())
        .collect();
    for range in biases {
        for v in &mut weights.params_mut()[range] {
            *v = r.random_range(-0.5..0.5);
        }
    }
    let mut symbols: Vec<u8> = (1..=n as u8).collect();
    symbols.shuffle(r);
    let target = Permutation::new(symbols)?;
    let input = if matches!(spec.input, crate::neural::InputKind::BinaryMatrix { .. }) {
        (0..spec.input_len()).map(|_| u8::from(r.random::<f64>() < 0.3)).collect()
    } else {
        let mut s: Vec<u8> = (1..=n as u8).collect();
        s.shuffle(r);
        s
    };
    let keep = 1.0 / (1.0 - dropout);
    let mask = (0..hidden)
        .map(|_| if r.random::<f64>() < dropout { 0.0 } else { keep })
        .collect();
    Ok(Case {
        weights,
        input,
        target,
        mask,
    })
}

fn near_kink(case: &Case) -> Result<bool> {
    let mut ws = Workspace::new(case.weights.spec());
    case.weights.forward_with_mask(&case.input, &case.mask, &mut ws)?;
    let close = ws.pre_activations().any(|z| z.abs() < KINK_MARGIN);
    Ok(close)
}

/// Compares backpropagated gradients with central differences on `configs`
/// random small networks, every parameter, under a fixed dropout mask.
pub fn gradient_check(configs: usize, seed: u64) -> Result<GradcheckReport> {
    if configs == 0 {
        return Err(Error::Config("at least one configuration".into()));
    }
    let mut r = rng::stream(seed);
    let mut report = GradcheckReport {
        configs,
        params_checked: 0,
        max_rel_error: 0.0,
        worst_tensor: String::new(),
    };
    for _ in 0..configs {
        let mut case = random_case(&mut r)?;
        while near_kink(&case)? {
            case = random_case(&mut r)?;
        }
        let (_, grad) = case
            .weights
            .backward_with_mask(&case.input, &case.target, &case.mask)?;
        let tensors = case.weights.tensors().to_vec();
        for t in &tensors {
            for i in t.range() {
                let orig = case.weights.params()[i];
                case.weights.params_mut()[i] = orig + FD_STEP;
                let up = case.weights.loss_with_mask(&case.input, &case.target, &case.mask)?;
                case.weights.params_mut()[i] = orig - FD_STEP;
                let down = case.weights.loss_with_mask(&case.input, &case.target, &case.mask)?;
                case.weights.params_mut()[i] = orig;
                let numeric = (up - down) / (2.0 * FD_STEP);
                let err = relative_error(grad.values[i], numeric);
                if err > report.max_rel_error {
                    report.max_rel_error = err;
                    report.worst_tensor = t.name.clone();
                }
                report.params_checked += 1;
            }
        }
    }
    Ok(report)
}
