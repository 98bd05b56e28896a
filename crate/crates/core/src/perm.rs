//! Permutations of `1..=n` and their binary-matrix embedding.
//!
//! Symbols and positions are 1-indexed at every public boundary. A
//! permutation `(x_1, ..., x_n)` is stored as its one-line symbol sequence.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported code length. Symbols are stored as `u8`.
pub const MAX_N: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// A permutation of the symbols `1..=n` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    symbols: Vec<u8>,
}

impl Permutation {
    /// Validates that `symbols` holds every value of `1..=n` exactly once, `n >= 2`.
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        let n = symbols.len();
        if !(2..=MAX_N).contains(&n) {
            return Err(Error::InvalidPermutation(format!(
                "length {n} outside 2..={MAX_N}"
            )));
        }
        let mut seen = [false; MAX_N + 1];
        for &s in &symbols {
            let s = s as usize;
            if s == 0 || s > n {
                return Err(Error::InvalidPermutation(format!(
                    "symbol {s} outside 1..={n}"
                )));
            }
            if seen[s] {
                return Err(Error::InvalidPermutation(format!("symbol {s} repeated")));
            }
            seen[s] = true;
        }
        Ok(Permutation { symbols })
    }

    pub fn identity(n: usize) -> Self {
        assert!((2..=MAX_N).contains(&n), "length {n} outside 2..={MAX_N}");
        Permutation {
            symbols: (1..=n as u8).collect(),
        }
    }

    /// Caller guarantees bijectivity. Used on hot paths that produce
    /// permutations by construction.
    pub(crate) fn from_vec_unchecked(symbols: Vec<u8>) -> Self {
        debug_assert!(Permutation::new(symbols.clone()).is_ok());
        Permutation { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Symbol at 1-indexed position `i`.
    pub fn at(&self, i: usize) -> u8 {
        self.symbols[i - 1]
    }

    pub fn inversions(&self) -> usize {
        let s = &self.symbols;
        let mut count = 0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                if s[i] > s[j] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn parity(&self) -> Parity {
        if self.inversions().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    /// Descent indicator: component `i` is 1 iff `x_{i+1} >= x_i`.
    pub fn alpha(&self) -> Vec<u8> {
        self.symbols
            .windows(2)
            .map(|w| u8::from(w[1] >= w[0]))
            .collect()
    }

    /// `(sum_{i=1}^{n-1} i * alpha_i) mod n`.
    pub fn tenengolts_checksum(&self) -> usize {
        let n = self.len();
        let sum: usize = self
            .alpha()
            .iter()
            .enumerate()
            .map(|(i, &a)| (i + 1) * a as usize)
            .sum();
        sum % n
    }

    /// Moves the symbol at position `i` to position `j`, shifting the
    /// symbols in between (including `x_j`) by one place.
    pub fn translocate(&self, i: usize, j: usize) -> Result<Permutation> {
        let n = self.len();
        if i == j || i == 0 || j == 0 || i > n || j > n {
            return Err(Error::InvalidPosition(format!(
                "translocation ({i}, {j}) needs distinct positions in 1..={n}"
            )));
        }
        let mut symbols = self.symbols.clone();
        if i < j {
            symbols[i - 1..j].rotate_left(1);
        } else {
            symbols[j - 1..i].rotate_right(1);
        }
        Ok(Permutation { symbols })
    }

    fn check_len(&self, other: &Permutation) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }

    pub fn hamming_distance(&self, other: &Permutation) -> Result<usize> {
        self.check_len(other)?;
        Ok(hamming(&self.symbols, &other.symbols))
    }

    /// `n - LCS(self, other)`, the translocation edit distance.
    pub fn ulam_distance(&self, other: &Permutation) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.len() - lcs_len(&self.symbols, &other.symbols))
    }

    /// Embedding with a one in row `x_c`, column `c` for every position `c`.
    pub fn to_matrix(&self) -> BitMatrix {
        let n = self.len();
        let mut m = BitMatrix::zeros(n, n);
        for (c, &x) in self.symbols.iter().enumerate() {
            m.set(x as usize - 1, c, 1);
        }
        m
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.symbols)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.symbols.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub(crate) fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Quadratic LCS dynamic program over two symbol sequences.
pub(crate) fn lcs_len(a: &[u8], b: &[u8]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Dense binary matrix, row-major, one byte per entry.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

/// The n x n embedding of a permutation.
pub type PermMatrix = BitMatrix;

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            bits: vec![0; rows * cols],
        }
    }

    /// Builds a matrix from rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut bits = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::Shape("ragged rows".into()));
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::Shape("entries must be 0 or 1".into()));
            }
            bits.extend_from_slice(row);
        }
        Ok(BitMatrix {
            rows: r,
            cols: c,
            bits,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// 0-indexed access.
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.bits[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.bits[r * self.cols + c] = v;
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.bits[r * self.cols + c] ^= 1;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.bits[r * self.cols..(r + 1) * self.cols]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Entrywise Hamming distance.
    pub fn hamming_distance(&self, other: &BitMatrix) -> Result<usize> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(hamming(&self.bits, &other.bits))
    }

    /// Inverse of [`Permutation::to_matrix`].
    pub fn to_permutation(&self) -> Result<Permutation> {
        let n = self.rows;
        if self.cols != n {
            return Err(Error::NotPermutationMatrix(format!(
                "{}x{} is not square",
                self.rows, self.cols
            )));
        }
        let mut symbols = Vec::with_capacity(n);
        for c in 0..n {
            let ones: Vec<usize> = (0..n).filter(|&r| self.get(r, c) == 1).collect();
            if ones.len() != 1 {
                return Err(Error::NotPermutationMatrix(format!(
                    "column {} has {} ones",
                    c + 1,
                    ones.len()
                )));
            }
            symbols.push(ones[0] as u8 + 1);
        }
        for r in 0..n {
            let ones = self.row(r).iter().filter(|&&b| b == 1).count();
            if ones != 1 {
                return Err(Error::NotPermutationMatrix(format!(
                    "row {} has {ones} ones",
                    r + 1
                )));
            }
        }
        Permutation::new(symbols).map_err(|e| Error::NotPermutationMatrix(e.to_string()))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        write!(f, "{self}")
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for b in self.row(r) {
                write!(f, "{b}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
