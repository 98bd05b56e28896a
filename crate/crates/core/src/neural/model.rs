use rand::Rng;

use super::{InputKind, Layout, MlpSpec, TensorInfo};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::{self, Stream};

/// Floor applied to probabilities inside the cross-entropy logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights {
    spec: MlpSpec,
    layout: Layout,
    params: Vec<f64>,
}

impl PartialEq for Layout {
    fn eq(&self, other: &Self) -> bool {
        self.tensors == other.tensors
    }
}

impl ModelWeights {
    pub fn zeros(spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let layout = spec.layout();
        let params = vec![0.0; layout.total];
        Ok(ModelWeights {
            spec,
            layout,
            params,
        })
    }

    pub fn from_params(spec: MlpSpec, params: Vec<f64>) -> Result<Self> {
        let mut w = Self::zeros(spec)?;
        if params.len() != w.params.len() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                w.params.len(),
                params.len()
            )));
        }
        w.params = params;
        Ok(w)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn tensors(&self) -> &[TensorInfo] {
        &self.layout.tensors
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.tensors()
            .iter()
            .find(|t| t.name == name)
            .map(|t| &self.params[t.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.tensors().iter().find(|t| t.name == name)?.range();
        Some(&mut self.params[range])
    }

    /// Walks the named tensors and counts their entries.
    pub fn count_by_walk(&self) -> usize {
        self.tensors()
            .iter()
            .map(|t| self.params[t.range()].len())
            .sum()
    }
}

/// Gradient with the same layout as the weights it was taken against.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
}

impl Gradient {
    pub fn zeros_like(w: &ModelWeights) -> Self {
        Gradient {
            values: vec![0.0; w.params.len()],
        }
    }

    pub fn tensor<'a>(&'a self, w: &ModelWeights, name: &str) -> Option<&'a [f64]> {
        w.tensors()
            .iter()
            .find(|t| t.name == name)
            .map(|t| &self.values[t.range()])
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }
}

/// Glorot-uniform dense and head weights, zero biases, embedding uniform
/// in ±0.05. Tensors are filled in layout order from one seeded stream.
pub fn init_weights(spec: &MlpSpec, seed: u64) -> Result<ModelWeights> {
    let mut w = ModelWeights::zeros(*spec)?;
    let mut rng = rng::stream(seed);
    let layout = w.layout.clone();
    if let Some((offset, dim)) = layout.embedding {
        for v in &mut w.params[offset..offset + spec.n() * dim] {
            *v = rng.random_range(-0.05..0.05);
        }
    }
    for d in layout.dense.iter().chain(&layout.heads) {
        let limit = (6.0 / (d.inputs + d.outputs) as f64).sqrt();
        for v in &mut w.params[d.w..d.w + d.inputs * d.outputs] {
            *v = rng.random_range(-limit..limit);
        }
    }
    Ok(w)
}

pub enum Mode<'a> {
    Eval,
    /// Inverted dropout with masks drawn from the stream.
    Train(&'a mut Stream),
}

/// Per-head probabilities, `n` heads of width `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heads {
    n: usize,
    probs: Vec<f64>,
}

impl Heads {
    pub fn from_probs(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} probabilities, got {}",
                n * n,
                probs.len()
            )));
        }
        Ok(Heads { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Head `k`, 0-based.
    pub fn head(&self, k: usize) -> &[f64] {
        &self.probs[k * self.n..(k + 1) * self.n]
    }
}

/// Reusable activation buffers for one sample.
#[derive(Clone, Debug)]
pub struct Workspace {
    x: Vec<f64>,
    pre: [Vec<f64>; 3],
    act: [Vec<f64>; 3],
    mask: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
    d_act: Vec<f64>,
    d_pre: Vec<f64>,
    d_x: Vec<f64>,
}

impl Workspace {
    pub fn new(spec: &MlpSpec) -> Self {
        let h = spec.hidden;
        let n = spec.n();
        Workspace {
            x: vec![0.0; spec.flat_dim()],
            pre: [vec![0.0; h], vec![0.0; h], vec![0.0; h]],
            act: [vec![0.0; h], vec![0.0; h], vec![0.0; h]],
            mask: vec![1.0; h],
            logits: vec![0.0; n * n],
            probs: vec![0.0; n * n],
            d_act: vec![0.0; h],
            d_pre: vec![0.0; h],
            d_x: vec![0.0; spec.flat_dim()],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    /// Pre-activations of the three hidden layers from the last pass.
    pub fn pre_activations(&self) -> impl Iterator<Item = f64> + '_ {
        self.pre.iter().flatten().copied()
    }

    /// Dropout multipliers applied after the third hidden layer.
    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    /// Post-dropout output of the third hidden layer.
    pub fn last_hidden(&self) -> &[f64] {
        &self.act[2]
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn check_input(spec: &MlpSpec, input: &[u8]) -> Result<()> {
    if input.len() != spec.input_len() {
        return Err(Error::Shape(format!(
            "input has {} entries, model expects {}",
            input.len(),
            spec.input_len()
        )));
    }
    match spec.input {
        InputKind::BinaryMatrix { .. } => {
            if input.iter().any(|&b| b > 1) {
                return Err(Error::Shape("binary input must be 0/1".into()));
            }
        }
        InputKind::SymbolSequence { n, .. } => {
            if input.iter().any(|&s| s == 0 || s as usize > n) {
                return Err(Error::Shape(format!("symbols must lie in 1..={n}")));
            }
        }
    }
    Ok(())
}

impl ModelWeights {
    /// Forward pass into `ws`. With a stream, draws a fresh dropout mask.
    pub(crate) fn run(&self, input: &[u8], ws: &mut Workspace, dropout: Option<&mut Stream>) {
        let p = &self.params;
        let layout = &self.layout;
        match (self.spec.input, layout.embedding) {
            (InputKind::SymbolSequence { .. }, Some((offset, dim))) => {
                for (k, &s) in input.iter().enumerate() {
                    let row = offset + (s as usize - 1) * dim;
                    ws.x[k * dim..(k + 1) * dim].copy_from_slice(&p[row..row + dim]);
                }
            }
            _ => {
                for (x, &b) in ws.x.iter_mut().zip(input) {
                    *x = b as f64;
                }
            }
        }
        for (l, d) in layout.dense.iter().enumerate() {
            let (input_vec, pre, act) = if l == 0 {
                (&ws.x[..], &mut ws.pre[0], &mut ws.act[0])
            } else {
                let (before, after) = ws.act.split_at_mut(l);
                (&before[l - 1][..], &mut ws.pre[l], &mut after[0])
            };
            for i in 0..d.outputs {
                let row = &p[d.w + i * d.inputs..d.w + (i + 1) * d.inputs];
                let z = p[d.b + i] + dot(row, input_vec);
                pre[i] = z;
                act[i] = z.max(0.0);
            }
        }
        match dropout {
            Some(rng) if self.spec.dropout > 0.0 => {
                let keep = 1.0 - self.spec.dropout;
                let scale = 1.0 / keep;
                for (m, a) in ws.mask.iter_mut().zip(ws.act[2].iter_mut()) {
                    *m = if rng.random::<f64>() < keep { scale } else { 0.0 };
                    *a *= *m;
                }
            }
            _ => ws.mask.iter_mut().for_each(|m| *m = 1.0),
        }
        let n = self.spec.n();
        for (k, d) in layout.heads.iter().enumerate() {
            let logits = &mut ws.logits[k * n..(k + 1) * n];
            for (i, z) in logits.iter_mut().enumerate() {
                let row = &p[d.w + i * d.inputs..d.w + (i + 1) * d.inputs];
                *z = p[d.b + i] + dot(row, &ws.act[2]);
            }
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let probs = &mut ws.probs[k * n..(k + 1) * n];
            let mut sum = 0.0;
            for (q, &z) in probs.iter_mut().zip(logits.iter()) {
                *q = (z - max).exp();
                sum += *q;
            }
            probs.iter_mut().for_each(|q| *q /= sum);
        }
    }

    /// Runs forward on `input` and adds the gradient of the summed
    /// cross-entropy against `target` into `grad`. Returns the loss.
    pub(crate) fn accumulate(
        &self,
        input: &[u8],
        target: &[u8],
        ws: &mut Workspace,
        dropout: Option<&mut Stream>,
        grad: &mut [f64],
    ) -> f64 {
        self.run(input, ws, dropout);
        self.backprop(input, target, ws, grad)
    }

    /// Backward pass over the activations currently held in `ws`.
    pub(crate) fn backprop(&self, input: &[u8], target: &[u8], ws: &mut Workspace, grad: &mut [f64]) -> f64 {
        let p = &self.params;
        let layout = &self.layout;
        let n = self.spec.n();
        let loss = cross_entropy_raw(&ws.probs, n, target);

        // heads: dz = probs - onehot
        ws.d_act.iter_mut().for_each(|v| *v = 0.0);
        for (k, d) in layout.heads.iter().enumerate() {
            let truth = target[k] as usize - 1;
            for i in 0..n {
                let g = ws.probs[k * n + i] - if i == truth { 1.0 } else { 0.0 };
                if g == 0.0 {
                    continue;
                }
                grad[d.b + i] += g;
                let w_off = d.w + i * d.inputs;
                axpy(g, &ws.act[2], &mut grad[w_off..w_off + d.inputs]);
                axpy(g, &p[w_off..w_off + d.inputs], &mut ws.d_act);
            }
        }
        // through dropout and the ReLU of layer 3
        for l in (0..3).rev() {
            let d = &layout.dense[l];
            for i in 0..d.outputs {
                let mut g = ws.d_act[i];
                if l == 2 {
                    g *= ws.mask[i];
                }
                ws.d_pre[i] = if ws.pre[l][i] > 0.0 { g } else { 0.0 };
            }
            let input_vec: &[f64] = if l == 0 { &ws.x } else { &ws.act[l - 1] };
            let want_dx = l > 0 || layout.embedding.is_some();
            let d_in: &mut [f64] = if l == 0 { &mut ws.d_x } else { &mut ws.d_act[..d.inputs] };
            if want_dx {
                // d_act is reused as the input gradient of this layer; the
                // ReLU gradient of this layer is already copied into d_pre.
                d_in.iter_mut().for_each(|v| *v = 0.0);
            }
            for i in 0..d.outputs {
                let g = ws.d_pre[i];
                if g == 0.0 {
                    continue;
                }
                grad[d.b + i] += g;
                let w_off = d.w + i * d.inputs;
                if l == 0 && layout.embedding.is_none() {
                    // binary inputs: only the set bits contribute
                    for (j, &b) in input.iter().enumerate() {
                        if b != 0 {
                            grad[w_off + j] += g;
                        }
                    }
                } else {
                    axpy(g, input_vec, &mut grad[w_off..w_off + d.inputs]);
                }
                if want_dx {
                    axpy(g, &p[w_off..w_off + d.inputs], d_in);
                }
            }
        }
        if let Some((offset, dim)) = layout.embedding {
            for (k, &s) in input.iter().enumerate() {
                let row = offset + (s as usize - 1) * dim;
                axpy(1.0, &ws.d_x[k * dim..(k + 1) * dim], &mut grad[row..row + dim]);
            }
        }
        loss
    }
}

pub(crate) fn cross_entropy_raw(probs: &[f64], n: usize, target: &[u8]) -> f64 {
    target
        .iter()
        .enumerate()
        .map(|(k, &t)| -probs[k * n + t as usize - 1].max(LOG_FLOOR).ln())
        .sum()
}

/// Head probabilities for one input.
pub fn forward(w: &ModelWeights, input: &[u8], mode: Mode<'_>) -> Result<Heads> {
    check_input(&w.spec, input)?;
    let mut ws = Workspace::new(&w.spec);
    match mode {
        Mode::Eval => w.run(input, &mut ws, None),
        Mode::Train(rng) => w.run(input, &mut ws, Some(rng)),
    }
    Ok(Heads {
        n: w.spec.n(),
        probs: ws.probs,
    })
}

/// Per-head argmax over the logits, lowest symbol on ties. Symbols are 1-based.
pub fn predict(w: &ModelWeights, input: &[u8]) -> Result<Vec<u8>> {
    check_input(&w.spec, input)?;
    let mut ws = Workspace::new(&w.spec);
    Ok(predict_with(w, input, &mut ws))
}

pub(crate) fn predict_with(w: &ModelWeights, input: &[u8], ws: &mut Workspace) -> Vec<u8> {
    w.run(input, ws, None);
    let n = w.spec.n();
    ws.logits
        .chunks_exact(n)
        .map(|head| {
            let mut best = 0;
            for (i, &z) in head.iter().enumerate() {
                if z > head[best] {
                    best = i;
                }
            }
            best as u8 + 1
        })
        .collect()
}

/// Summed cross-entropy `-Σ_k ln head_k[x_k]`.
pub fn cross_entropy(heads: &Heads, target: &Permutation) -> Result<f64> {
    if target.len() != heads.n {
        return Err(Error::LengthMismatch {
            expected: heads.n,
            actual: target.len(),
        });
    }
    Ok(cross_entropy_raw(&heads.probs, heads.n, target.symbols()))
}

/// Exact gradient of the eval-mode loss.
pub fn backward(w: &ModelWeights, input: &[u8], target: &Permutation) -> Result<(f64, Gradient)> {
    check_input(&w.spec, input)?;
    if target.len() != w.spec.n() {
        return Err(Error::LengthMismatch {
            expected: w.spec.n(),
            actual: target.len(),
        });
    }
    let mut ws = Workspace::new(&w.spec);
    let mut grad = Gradient::zeros_like(w);
    let loss = w.accumulate(input, target.symbols(), &mut ws, None, &mut grad.values);
    Ok((loss, grad))
}

impl ModelWeights {
    /// Forward with an explicit dropout mask (multipliers, length `hidden`).
    /// Exposed for gradient checking through the dropout layer.
    pub fn forward_with_mask(&self, input: &[u8], mask: &[f64], ws: &mut Workspace) -> Result<()> {
        check_input(&self.spec, input)?;
        if mask.len() != self.spec.hidden {
            return Err(Error::Shape("mask length must equal the hidden width".into()));
        }
        self.run(input, ws, None);
        // redo the output stage with the mask applied
        let h3: Vec<f64> = ws.act[2].iter().zip(mask).map(|(a, m)| a * m).collect();
        ws.act[2] = h3;
        ws.mask.copy_from_slice(mask);
        let n = self.spec.n();
        let p = &self.params;
        for (k, d) in self.layout.heads.iter().enumerate() {
            for i in 0..n {
                let row = &p[d.w + i * d.inputs..d.w + (i + 1) * d.inputs];
                ws.logits[k * n + i] = p[d.b + i] + dot(row, &ws.act[2]);
            }
            let logits = &ws.logits[k * n..(k + 1) * n];
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
            for i in 0..n {
                ws.probs[k * n + i] = (ws.logits[k * n + i] - max).exp() / sum;
            }
        }
        Ok(())
    }

    /// Loss and gradient under a fixed dropout mask.
    pub fn backward_with_mask(
        &self,
        input: &[u8],
        target: &Permutation,
        mask: &[f64],
    ) -> Result<(f64, Gradient)> {
        let mut ws = Workspace::new(&self.spec);
        self.forward_with_mask(input, mask, &mut ws)?;
        let mut grad = Gradient::zeros_like(self);
        let loss = self.backprop(input, target.symbols(), &mut ws, &mut grad.values);
        Ok((loss, grad))
    }

    /// Loss under a fixed dropout mask, without gradients.
    pub fn loss_with_mask(&self, input: &[u8], target: &Permutation, mask: &[f64]) -> Result<f64> {
        let mut ws = Workspace::new(&self.spec);
        self.forward_with_mask(input, mask, &mut ws)?;
        Ok(cross_entropy_raw(&ws.probs, self.spec.n(), target.symbols()))
    }
}
