//! Multi-head MLP decoder built from scratch in `f64`.
//!
//! Architecture: optional symbol embedding, flatten, three equal-width dense
//! layers with ReLU, one dropout layer before the output, and `n` softmax
//! heads of width `n`. Head `k` scores the symbol at codeword position `k`;
//! prediction is the per-head argmax, so the output need not be a
//! permutation.
//!
//! All trainable values live in one flat vector. The tensor order is also
//! the serialization order: embedding, dense 1 (W, b), dense 2, dense 3,
//! then for each head `W_k` followed by `b_k`. Matrices are row-major
//! `out x in`.

mod adam;
mod io;
pub(crate) mod model;

pub use adam::AdamState;
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use model::{
    backward, cross_entropy, forward, init_weights, predict, Gradient, Heads, Mode, ModelWeights,
    Workspace, LOG_FLOOR,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    /// Channel matrix with `n` rows and `c_max` columns, flattened row-major.
    BinaryMatrix { n: usize, c_max: usize },
    /// Received permutation, each symbol mapped through an `n x embed_dim` table.
    SymbolSequence { n: usize, embed_dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MlpSpec {
    pub input: InputKind,
    /// Width shared by the three hidden layers.
    pub hidden: usize,
    pub dropout: f64,
}

pub const PAPER_DROPOUT: f64 = 0.1;

impl MlpSpec {
    pub fn binary_matrix(n: usize, c_max: usize, hidden: usize) -> Self {
        MlpSpec {
            input: InputKind::BinaryMatrix { n, c_max },
            hidden,
            dropout: PAPER_DROPOUT,
        }
    }

    /// Embedding width defaults to `n`.
    pub fn symbol_sequence(n: usize, hidden: usize) -> Self {
        MlpSpec {
            input: InputKind::SymbolSequence { n, embed_dim: n },
            hidden,
            dropout: PAPER_DROPOUT,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout = rate;
        self
    }

    /// Code length, which is also the number of heads and the head width.
    pub fn n(&self) -> usize {
        match self.input {
            InputKind::BinaryMatrix { n, .. } | InputKind::SymbolSequence { n, .. } => n,
        }
    }

    /// Number of raw input bytes (bits or symbols).
    pub fn input_len(&self) -> usize {
        match self.input {
            InputKind::BinaryMatrix { n, c_max } => n * c_max,
            InputKind::SymbolSequence { n, .. } => n,
        }
    }

    /// Width of the flattened vector entering the first dense layer.
    pub fn flat_dim(&self) -> usize {
        match self.input {
            InputKind::BinaryMatrix { n, c_max } => n * c_max,
            InputKind::SymbolSequence { n, embed_dim } => n * embed_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if !(2..=crate::perm::MAX_N).contains(&n) {
            return Err(Error::Shape(format!("n = {n} out of range")));
        }
        match self.input {
            InputKind::BinaryMatrix { c_max: 0, .. } => {
                return Err(Error::Shape("c_max must be positive".into()))
            }
            InputKind::SymbolSequence { embed_dim: 0, .. } => {
                return Err(Error::Shape("embed_dim must be positive".into()))
            }
            _ => {}
        }
        if self.hidden == 0 {
            return Err(Error::Shape("hidden width must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Shape(format!(
                "dropout rate {} not in [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Closed-form count of trainable parameters.
    pub fn param_count(&self) -> usize {
        let n = self.n();
        let h = self.hidden;
        let embedding = match self.input {
            InputKind::SymbolSequence { embed_dim, .. } => n * embed_dim,
            InputKind::BinaryMatrix { .. } => 0,
        };
        let d = self.flat_dim();
        embedding + (d * h + h) + 2 * (h * h + h) + (h * n * n + n * n)
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(self)
    }
}

/// A named slice of the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct DenseAt {
    pub w: usize,
    pub b: usize,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub embedding: Option<(usize, usize)>,
    pub dense: [DenseAt; 3],
    pub heads: Vec<DenseAt>,
    pub tensors: Vec<TensorInfo>,
    pub total: usize,
}

impl Layout {
    fn new(spec: &MlpSpec) -> Self {
        let n = spec.n();
        let h = spec.hidden;
        let mut tensors = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, rows: usize, cols: usize| {
            tensors.push(TensorInfo {
                name,
                rows,
                cols,
                offset,
            });
            offset += rows * cols;
            offset - rows * cols
        };
        let embedding = match spec.input {
            InputKind::SymbolSequence { embed_dim, .. } => {
                Some((push("embedding".into(), n, embed_dim), embed_dim))
            }
            InputKind::BinaryMatrix { .. } => None,
        };
        let mut dense_at = |name: &str, inputs: usize, outputs: usize| DenseAt {
            w: push(format!("{name}.w"), outputs, inputs),
            b: push(format!("{name}.b"), outputs, 1),
            inputs,
            outputs,
        };
        let dense = [
            dense_at("dense1", spec.flat_dim(), h),
            dense_at("dense2", h, h),
            dense_at("dense3", h, h),
        ];
        let heads = (1..=n)
            .map(|k| dense_at(&format!("head{k}"), h, n))
            .collect();
        Layout {
            embedding,
            dense,
            heads,
            tensors,
            total: offset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parameter_counts() {
        let cases = [
            (MlpSpec::binary_matrix(6, 9, 128), 44_708),
            (MlpSpec::binary_matrix(6, 6, 128), 42_404),
            (MlpSpec::binary_matrix(7, 10, 128), 48_433),
            (MlpSpec::binary_matrix(7, 7, 128), 45_745),
            (MlpSpec::binary_matrix(8, 11, 128), 52_672),
            (MlpSpec::binary_matrix(8, 8, 128), 49_600),
            (MlpSpec::binary_matrix(8, 11, 256), 170_816),
            (MlpSpec::binary_matrix(8, 8, 256), 164_672),
            (MlpSpec::symbol_sequence(9, 64), 18_914),
            (MlpSpec::symbol_sequence(12, 64), 27_104),
        ];
        for (spec, count) in cases {
            assert_eq!(spec.param_count(), count, "{spec:?}");
            let layout = spec.layout();
            assert_eq!(layout.total, count);
            assert_eq!(layout.tensors.iter().map(TensorInfo::len).sum::<usize>(), count);
        }
    }

    #[test]
    fn layout_is_contiguous_in_file_order() {
        let spec = MlpSpec::symbol_sequence(3, 4);
        let names: Vec<_> = spec.layout().tensors.iter().map(|t| t.name.clone()).collect();
        assert_eq!(
            names,
            [
                "embedding", "dense1.w", "dense1.b", "dense2.w", "dense2.b", "dense3.w",
                "dense3.b", "head1.w", "head1.b", "head2.w", "head2.b", "head3.w", "head3.b"
            ]
        );
        let layout = spec.layout();
        let mut end = 0;
        for t in &layout.tensors {
            assert_eq!(t.offset, end);
            end += t.len();
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MlpSpec::binary_matrix(6, 9, 128).validate().is_ok());
        assert!(MlpSpec::binary_matrix(6, 0, 128).validate().is_err());
        assert!(MlpSpec::binary_matrix(6, 6, 0).validate().is_err());
        assert!(MlpSpec::symbol_sequence(9, 64).with_dropout(1.0).validate().is_err());
        assert!(MlpSpec::symbol_sequence(1, 64).validate().is_err());
    }
}
