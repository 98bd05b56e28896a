//! Power-line-communication channel at the demodulator-output level.
//!
//! A codeword `(x_1..x_n)` is sent one symbol per time slot as a one-hot
//! column of an `n`-row binary matrix (row = frequency). The channel
//! corrupts the matrix with three substitution noises and a queue model
//! that inserts or drops whole columns:
//!
//! * background: independent per-bit flips on transmitted columns;
//! * impulse: a transmitted column received as all ones;
//! * permanent frequency disturbance (PFD): a row received as all ones
//!   across every occupied column;
//! * insertion: before each of the `n` symbols and after the last one
//!   (`n + 1` slots) up to `l_max` clean one-hot columns of uniformly random
//!   symbols;
//! * deletion: a queued symbol is dropped.
//!
//! The output is padded with zero columns to `n + l_max·(n+1)` and cut to
//! the first `c_max` columns.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::{BitMatrix, Permutation};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlcParams {
    pub p_bg: f64,
    pub p_im: f64,
    pub p_pfd: f64,
    pub p_i: f64,
    pub p_d: f64,
    pub l_max: usize,
    pub c_max: usize,
}

impl PlcParams {
    /// Noiseless synchronized channel for length `n`.
    pub fn clean(n: usize) -> Self {
        PlcParams {
            p_bg: 0.0,
            p_im: 0.0,
            p_pfd: 0.0,
            p_i: 0.0,
            p_d: 0.0,
            l_max: 0,
            c_max: n,
        }
    }

    /// Synchronized channel (`p_i = p_d = 0`, `c_max = n`).
    pub fn sync(n: usize, p_bg: f64, p_im: f64, p_pfd: f64) -> Self {
        PlcParams {
            p_bg,
            p_im,
            p_pfd,
            ..Self::clean(n)
        }
    }

    /// Width of the padded matrix before truncation.
    pub fn full_width(&self, n: usize) -> usize {
        n + self.l_max * (n + 1)
    }

    pub fn p_transmit(&self) -> f64 {
        1.0 - self.p_i - self.p_d
    }

    pub fn is_synchronized(&self, n: usize) -> bool {
        self.p_i == 0.0 && self.p_d == 0.0 && self.c_max == n
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, p) in [
            ("p_bg", self.p_bg),
            ("p_im", self.p_im),
            ("p_pfd", self.p_pfd),
            ("p_i", self.p_i),
            ("p_d", self.p_d),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} not in [0, 1]")));
            }
        }
        // p_d = 1 with p_i = 0 is the degenerate always-delete channel.
        if self.p_i > 0.0 && self.p_i + self.p_d >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "p_i + p_d = {} must be < 1",
                self.p_i + self.p_d
            )));
        }
        if self.c_max == 0 || self.c_max > self.full_width(n) {
            return Err(Error::InvalidParams(format!(
                "c_max = {} not in 1..={}",
                self.c_max,
                self.full_width(n)
            )));
        }
        Ok(())
    }
}

/// Demodulator output: `n` rows, `c_max` columns, of which the first
/// `occupied` carry channel symbols and the rest are zero padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelMatrix {
    pub bits: BitMatrix,
    pub occupied: usize,
}

impl ChannelMatrix {
    pub fn n(&self) -> usize {
        self.bits.rows()
    }

    pub fn cols(&self) -> usize {
        self.bits.cols()
    }
}

/// A fully specified channel realization. All indices are 1-indexed;
/// `bg_flips` and `impulse_cols` refer to occupied columns of the output
/// timeline, and must land on transmitted (not inserted) columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlcErrorPattern {
    pub insertions: BTreeMap<usize, Vec<u8>>,
    pub deletions: BTreeSet<usize>,
    pub bg_flips: BTreeSet<(usize, usize)>,
    pub impulse_cols: BTreeSet<usize>,
    pub pfd_rows: BTreeSet<usize>,
}

impl PlcErrorPattern {
    pub fn is_empty(&self) -> bool {
        self.insertions.values().all(Vec::is_empty)
            && self.deletions.is_empty()
            && self.bg_flips.is_empty()
            && self.impulse_cols.is_empty()
            && self.pfd_rows.is_empty()
    }
}

/// One column of the occupied timeline.
struct Column {
    symbol: u8,
    transmitted: bool,
}

fn timeline(p: &Permutation, pat: &PlcErrorPattern, l_max: usize) -> Result<Vec<Column>> {
    let n = p.len();
    for (&slot, syms) in &pat.insertions {
        if slot == 0 || slot > n + 1 {
            return Err(Error::InvalidPattern(format!(
                "insertion slot {slot} not in 1..={}",
                n + 1
            )));
        }
        if syms.len() > l_max {
            return Err(Error::InvalidPattern(format!(
                "{} insertions in slot {slot} exceed l_max = {l_max}",
                syms.len()
            )));
        }
        if let Some(s) = syms.iter().find(|&&s| s == 0 || s as usize > n) {
            return Err(Error::InvalidPattern(format!("inserted symbol {s} not in 1..={n}")));
        }
    }
    if let Some(&k) = pat.deletions.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidPattern(format!("deletion {k} not in 1..={n}")));
    }
    let mut cols = Vec::with_capacity(n + l_max * (n + 1));
    for slot in 1..=n + 1 {
        if let Some(syms) = pat.insertions.get(&slot) {
            cols.extend(syms.iter().map(|&symbol| Column {
                symbol,
                transmitted: false,
            }));
        }
        if slot <= n && !pat.deletions.contains(&slot) {
            cols.push(Column {
                symbol: p.at(slot),
                transmitted: true,
            });
        }
    }
    Ok(cols)
}

/// Deterministic channel: builds the occupied timeline, then applies
/// flips, impulse columns and PFD rows in that order, pads and truncates.
pub fn apply_error_pattern(
    p: &Permutation,
    pat: &PlcErrorPattern,
    params: &PlcParams,
) -> Result<ChannelMatrix> {
    let n = p.len();
    params.validate(n)?;
    let cols = timeline(p, pat, params.l_max)?;
    let occupied = cols.len();
    let check_col = |c: usize, what: &str| -> Result<()> {
        if c == 0 || c > occupied {
            return Err(Error::InvalidPattern(format!(
                "{what} column {c} not in 1..={occupied}"
            )));
        }
        if !cols[c - 1].transmitted {
            return Err(Error::InvalidPattern(format!(
                "{what} column {c} is an inserted column"
            )));
        }
        Ok(())
    };
    for &(r, c) in &pat.bg_flips {
        if r == 0 || r > n {
            return Err(Error::InvalidPattern(format!("flip row {r} not in 1..={n}")));
        }
        check_col(c, "flip")?;
    }
    for &c in &pat.impulse_cols {
        check_col(c, "impulse")?;
    }
    if let Some(&r) = pat.pfd_rows.iter().find(|&&r| r == 0 || r > n) {
        return Err(Error::InvalidPattern(format!("PFD row {r} not in 1..={n}")));
    }

    let mut m = BitMatrix::zeros(n, params.full_width(n));
    for (c, col) in cols.iter().enumerate() {
        m.set(col.symbol as usize - 1, c, 1);
    }
    for &(r, c) in &pat.bg_flips {
        m.flip(r - 1, c - 1);
    }
    for &c in &pat.impulse_cols {
        for r in 0..n {
            m.set(r, c - 1, 1);
        }
    }
    for &r in &pat.pfd_rows {
        for c in 0..occupied {
            m.set(r - 1, c, 1);
        }
    }
    Ok(truncate(m, occupied, params.c_max))
}

fn truncate(m: BitMatrix, occupied: usize, c_max: usize) -> ChannelMatrix {
    let n = m.rows();
    let mut out = BitMatrix::zeros(n, c_max);
    for r in 0..n {
        for c in 0..c_max {
            out.set(r, c, m.get(r, c));
        }
    }
    ChannelMatrix {
        bits: out,
        occupied: occupied.min(c_max),
    }
}

/// Draws a channel realization. Draw order: for each slot `k = 1..=n+1`,
/// up to `l_max` insertion trials (stop at the first failure; each success
/// draws a uniform symbol), then for `k <= n` the deletion trial, and for a
/// transmitted symbol `n` flip trials (rows in order) and one impulse trial.
/// Finally one PFD trial per row.
pub fn sample_pattern<R: Rng + ?Sized>(
    p: &Permutation,
    params: &PlcParams,
    rng: &mut R,
) -> Result<PlcErrorPattern> {
    let n = p.len();
    params.validate(n)?;
    let mut pat = PlcErrorPattern::default();
    let mut occupied = 0usize;
    for slot in 1..=n + 1 {
        let mut inserted = Vec::new();
        for _ in 0..params.l_max {
            if !bernoulli(rng, params.p_i) {
                break;
            }
            inserted.push(rng.random_range(1..=n as u8));
        }
        occupied += inserted.len();
        if !inserted.is_empty() {
            pat.insertions.insert(slot, inserted);
        }
        if slot > n {
            break;
        }
        if bernoulli(rng, params.p_d) {
            pat.deletions.insert(slot);
            continue;
        }
        occupied += 1;
        for r in 1..=n {
            if bernoulli(rng, params.p_bg) {
                pat.bg_flips.insert((r, occupied));
            }
        }
        if bernoulli(rng, params.p_im) {
            pat.impulse_cols.insert(occupied);
        }
    }
    for r in 1..=n {
        if bernoulli(rng, params.p_pfd) {
            pat.pfd_rows.insert(r);
        }
    }
    Ok(pat)
}

/// Zero-probability events consume no randomness so that noiseless
/// parameters leave the stream untouched.
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

/// Sends `p` through the stochastic channel.
pub fn transmit<R: Rng + ?Sized>(
    p: &Permutation,
    params: &PlcParams,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    let pat = sample_pattern(p, params, rng)?;
    apply_error_pattern(p, &pat, params)
}

/// [`transmit`] restricted to the synchronized channel; the output is n x n.
pub fn transmit_sync<R: Rng + ?Sized>(
    p: &Permutation,
    params: &PlcParams,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if params.p_i != 0.0 || params.p_d != 0.0 {
        return Err(Error::InvalidParams(
            "synchronized channel requires p_i = p_d = 0".into(),
        ));
    }
    if params.c_max != p.len() {
        return Err(Error::InvalidParams(format!(
            "synchronized channel requires c_max = n = {}",
            p.len()
        )));
    }
    transmit(p, params, rng)
}
