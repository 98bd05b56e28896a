//! Minimum-distance baseline decoders.
//!
//! For the synchronized PLC channel the received n x n matrix is compared
//! against the embedding of every codeword, either over all entries or
//! after erasing the rows and columns that arrived as all ones (impulse
//! columns, disturbed frequencies). For rank modulation the baseline is the
//! Ulam-nearest codeword. All decoders scan the codebook linearly and break
//! ties towards the lower codebook position.

use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::perm::{lcs_len, BitMatrix, Permutation};

/// Rows and columns (1-indexed) that are entirely ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ErasureSets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl ErasureSets {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.cols.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub codeword: Permutation,
    /// 0-based codebook position.
    pub index: usize,
    pub distance: usize,
    /// More than one codeword attained the minimum.
    pub tie: bool,
}

fn check_square(m: &BitMatrix) -> Result<usize> {
    if m.rows() != m.cols() {
        return Err(Error::Shape(format!(
            "erasure decoding needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.rows())
}

pub fn detect_erasures(m: &BitMatrix) -> Result<ErasureSets> {
    let n = check_square(m)?;
    let rows = (0..n)
        .filter(|&r| m.row(r).iter().all(|&b| b == 1))
        .map(|r| r + 1)
        .collect();
    let cols = (0..n)
        .filter(|&c| (0..n).all(|r| m.get(r, c) == 1))
        .map(|c| c + 1)
        .collect();
    Ok(ErasureSets { rows, cols })
}

/// Decodes with the erased rows and columns of `m` omitted.
pub fn md_decode_erasure(m: &BitMatrix, cb: &Codebook) -> Result<DecodeResult> {
    let erasures = detect_erasures(m)?;
    decode_masked(m, cb, &erasures)
}

/// Decodes over the full matrix.
pub fn md_decode_plain(m: &BitMatrix, cb: &Codebook) -> Result<DecodeResult> {
    check_square(m)?;
    decode_masked(m, cb, &ErasureSets::default())
}

/// Argmin over codewords of the Hamming distance between `Y^c` and `m`
/// restricted to kept rows/columns.
///
/// With `W` the number of kept ones in `m`, `K` the number of kept ones in
/// `Y^c` and `A` the kept ones they share, the distance is `W + K - 2A`,
/// which costs O(n) per codeword instead of O(n²).
pub fn decode_masked(m: &BitMatrix, cb: &Codebook, erasures: &ErasureSets) -> Result<DecodeResult> {
    let n = check_square(m)?;
    if cb.is_empty() {
        return Err(Error::InvalidCodebook("empty codebook".into()));
    }
    if cb.n() != n {
        return Err(Error::LengthMismatch {
            expected: cb.n(),
            actual: n,
        });
    }
    let mut keep_row = vec![true; n];
    let mut keep_col = vec![true; n];
    for &r in &erasures.rows {
        keep_row[r - 1] = false;
    }
    for &c in &erasures.cols {
        keep_col[c - 1] = false;
    }
    let mut kept_ones = 0usize;
    for r in (0..n).filter(|&r| keep_row[r]) {
        let row = m.row(r);
        kept_ones += (0..n).filter(|&c| keep_col[c] && row[c] == 1).count();
    }

    let mut best = usize::MAX;
    let mut best_index = 0;
    let mut tie = false;
    for (k, c) in cb.codewords().iter().enumerate() {
        let mut own = 0usize;
        let mut shared = 0usize;
        for (col, &s) in c.symbols().iter().enumerate() {
            let row = s as usize - 1;
            if keep_col[col] && keep_row[row] {
                own += 1;
                shared += m.get(row, col) as usize;
            }
        }
        let d = kept_ones + own - 2 * shared;
        if d < best {
            best = d;
            best_index = k;
            tie = false;
        } else if d == best {
            tie = true;
        }
    }
    Ok(DecodeResult {
        codeword: cb.get(best_index).clone(),
        index: best_index,
        distance: best,
        tie,
    })
}

/// Ulam-nearest codeword.
pub fn ulam_nearest(w: &Permutation, cb: &Codebook) -> Result<DecodeResult> {
    if cb.is_empty() {
        return Err(Error::InvalidCodebook("empty codebook".into()));
    }
    if cb.n() != w.len() {
        return Err(Error::LengthMismatch {
            expected: cb.n(),
            actual: w.len(),
        });
    }
    let n = w.len();
    let mut best = usize::MAX;
    let mut best_index = 0;
    let mut tie = false;
    for (k, c) in cb.codewords().iter().enumerate() {
        let d = n - lcs_len(w.symbols(), c.symbols());
        if d < best {
            best = d;
            best_index = k;
            tie = false;
        } else if d == best {
            tie = true;
        }
    }
    Ok(DecodeResult {
        codeword: cb.get(best_index).clone(),
        index: best_index,
        distance: best,
        tie,
    })
}
