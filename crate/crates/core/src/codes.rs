//! The three permutation-code families and their codebooks.
//!
//! * `tenengolts`: permutations whose weighted descent checksum vanishes mod n.
//! * `tenengolts_even`: the even-parity members of `tenengolts`; minimum
//!   Hamming distance at least three.
//! * `interleaved`: three even permutations of `m = n/3` symbols placed
//!   round-robin. Symbol class `t` (values `(t-1)m+1 ..= tm`) occupies the
//!   positions congruent to `t` mod 3. Corrects a single translocation.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::{hamming, lcs_len, Permutation};

/// Exhaustive enumeration walks all n! permutations.
pub const MAX_EXHAUSTIVE_N: usize = 10;
/// Interleaved codes have ((m!/2)^3) codewords.
pub const MAX_INTERLEAVED_PART: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeKind {
    Tenengolts,
    TenengoltsEven,
    Interleaved,
}

impl CodeKind {
    pub fn tag(self) -> &'static str {
        match self {
            CodeKind::Tenengolts => "tenengolts",
            CodeKind::TenengoltsEven => "tenengolts_even",
            CodeKind::Interleaved => "interleaved",
        }
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tenengolts" => Ok(CodeKind::Tenengolts),
            "tenengolts_even" => Ok(CodeKind::TenengoltsEven),
            "interleaved" => Ok(CodeKind::Interleaved),
            other => Err(Error::InvalidFamily(format!("unknown family '{other}'"))),
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeFamily {
    pub kind: CodeKind,
    pub n: usize,
}

impl CodeFamily {
    pub fn new(kind: CodeKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidFamily(format!("n = {n} < 2")));
        }
        if kind == CodeKind::Interleaved && (!n.is_multiple_of(3) || n / 3 < 3) {
            return Err(Error::InvalidFamily(format!(
                "interleaved code needs n divisible by 3 with n/3 >= 3, got {n}"
            )));
        }
        Ok(CodeFamily { kind, n })
    }

    pub fn tenengolts(n: usize) -> Result<Self> {
        Self::new(CodeKind::Tenengolts, n)
    }

    pub fn tenengolts_even(n: usize) -> Result<Self> {
        Self::new(CodeKind::TenengoltsEven, n)
    }

    pub fn interleaved(n: usize) -> Result<Self> {
        Self::new(CodeKind::Interleaved, n)
    }

    /// Short name used in reports, e.g. `C6e`, `C9IL`.
    pub fn label(&self) -> String {
        match self.kind {
            CodeKind::Tenengolts => format!("C{}", self.n),
            CodeKind::TenengoltsEven => format!("C{}e", self.n),
            CodeKind::Interleaved => format!("C{}IL", self.n),
        }
    }

    pub fn is_member(&self, p: &Permutation) -> Result<bool> {
        if p.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: p.len(),
            });
        }
        Ok(match self.kind {
            CodeKind::Tenengolts => p.tenengolts_checksum() == 0,
            CodeKind::TenengoltsEven => p.tenengolts_checksum() == 0 && p.is_even(),
            CodeKind::Interleaved => split_interleaved(p).is_some_and(|parts| {
                parts
                    .into_iter()
                    .all(|part| Permutation::new(part).is_ok_and(|q| q.is_even()))
            }),
        })
    }

    pub fn enumerate(&self) -> Result<Codebook> {
        let codewords = match self.kind {
            CodeKind::Tenengolts | CodeKind::TenengoltsEven => {
                if self.n > MAX_EXHAUSTIVE_N {
                    return Err(Error::TooLarge {
                        n: self.n,
                        limit: MAX_EXHAUSTIVE_N,
                    });
                }
                let mut out = Vec::new();
                for_each_permutation(self.n, |s| {
                    let p = Permutation::from_vec_unchecked(s.to_vec());
                    if self.is_member(&p).unwrap_or(false) {
                        out.push(p);
                    }
                });
                out
            }
            CodeKind::Interleaved => {
                let m = self.n / 3;
                if m > MAX_INTERLEAVED_PART {
                    return Err(Error::TooLarge {
                        n: self.n,
                        limit: 3 * MAX_INTERLEAVED_PART,
                    });
                }
                let evens = even_permutations(m);
                let mut out = Vec::with_capacity(evens.len().pow(3));
                for a in &evens {
                    for b in &evens {
                        for c in &evens {
                            out.push(build_interleaved(self.n, [a, b, c])?);
                        }
                    }
                }
                out.sort();
                out
            }
        };
        Codebook::build(Some(*self), codewords)
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={}", self.kind, self.n)
    }
}

/// Visits all permutations of `1..=n` in lexicographic order.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[u8])) {
    let mut s: Vec<u8> = (1..=n as u8).collect();
    loop {
        visit(&s);
        // next permutation
        let Some(i) = (0..n - 1).rev().find(|&i| s[i] < s[i + 1]) else {
            return;
        };
        let j = (i + 1..n).rev().find(|&j| s[j] > s[i]).unwrap();
        s.swap(i, j);
        s[i + 1..].reverse();
    }
}

/// Even permutations of `1..=m`, lexicographic.
pub fn even_permutations(m: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    for_each_permutation(m, |s| {
        let p = Permutation::from_vec_unchecked(s.to_vec());
        if p.is_even() {
            out.push(p);
        }
    });
    out
}

/// Interleaves three even permutations of `1..=n/3` into one codeword:
/// position `3(k-1)+t` carries `(t-1)·m + parts[t][k]`.
pub fn build_interleaved(n: usize, parts: [&Permutation; 3]) -> Result<Permutation> {
    if !n.is_multiple_of(3) {
        return Err(Error::InvalidFamily(format!("n = {n} not divisible by 3")));
    }
    let m = n / 3;
    for (t, part) in parts.iter().enumerate() {
        if part.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: part.len(),
            });
        }
        if !part.is_even() {
            return Err(Error::InvalidFamily(format!(
                "part {} ({part}) is an odd permutation",
                t + 1
            )));
        }
    }
    let mut symbols = vec![0u8; n];
    for k in 0..m {
        for (t, part) in parts.iter().enumerate() {
            symbols[3 * k + t] = (t * m) as u8 + part.symbols()[k];
        }
    }
    Ok(Permutation::from_vec_unchecked(symbols))
}

/// Inverse of the interleaving placement; `None` if a symbol sits in the
/// wrong residue class.
fn split_interleaved(p: &Permutation) -> Option<[Vec<u8>; 3]> {
    let n = p.len();
    if !n.is_multiple_of(3) {
        return None;
    }
    let m = n / 3;
    let mut parts: [Vec<u8>; 3] = Default::default();
    for (pos, &s) in p.symbols().iter().enumerate() {
        let t = pos % 3;
        let lo = (t * m) as u8;
        if s <= lo || s > lo + m as u8 {
            return None;
        }
        parts[t].push(s - lo);
    }
    Some(parts)
}

/// An index-ordered set of codewords. Positions are 0-based.
#[derive(Clone, Debug)]
pub struct Codebook {
    family: Option<CodeFamily>,
    n: usize,
    codewords: Vec<Permutation>,
    index: HashMap<Vec<u8>, usize>,
}

impl Codebook {
    /// Builds a codebook from arbitrary codewords, kept in the given order.
    /// Rejects duplicates and mixed lengths.
    pub fn from_codewords(codewords: Vec<Permutation>) -> Result<Self> {
        Self::build(None, codewords)
    }

    fn build(family: Option<CodeFamily>, codewords: Vec<Permutation>) -> Result<Self> {
        let n = match (family, codewords.first()) {
            (Some(f), _) => f.n,
            (None, Some(c)) => c.len(),
            (None, None) => return Err(Error::InvalidCodebook("no codewords".into())),
        };
        let mut index = HashMap::with_capacity(codewords.len());
        for (k, c) in codewords.iter().enumerate() {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
            if index.insert(c.symbols().to_vec(), k).is_some() {
                return Err(Error::InvalidCodebook(format!("duplicate codeword {c}")));
            }
        }
        Ok(Codebook {
            family,
            n,
            codewords,
            index,
        })
    }

    pub fn family(&self) -> Option<CodeFamily> {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Permutation] {
        &self.codewords
    }

    pub fn get(&self, k: usize) -> &Permutation {
        &self.codewords[k]
    }

    pub fn index_of(&self, symbols: &[u8]) -> Option<usize> {
        self.index.get(symbols).copied()
    }

    pub fn contains(&self, symbols: &[u8]) -> bool {
        self.index.contains_key(symbols)
    }

    pub fn tag(&self) -> String {
        self.family
            .map_or_else(|| "custom".to_string(), |f| f.kind.tag().to_string())
    }

    pub fn min_hamming_distance(&self) -> Result<usize> {
        self.min_pairwise(hamming)
    }

    pub fn min_ulam_distance(&self) -> Result<usize> {
        let n = self.n;
        self.min_pairwise(|a, b| n - lcs_len(a, b))
    }

    fn min_pairwise(&self, dist: impl Fn(&[u8], &[u8]) -> usize) -> Result<usize> {
        if self.len() < 2 {
            return Err(Error::InvalidCodebook(
                "minimum distance needs at least two codewords".into(),
            ));
        }
        let mut best = usize::MAX;
        for (k, a) in self.codewords.iter().enumerate() {
            for b in &self.codewords[k + 1..] {
                best = best.min(dist(a.symbols(), b.symbols()));
            }
        }
        Ok(best)
    }

    /// Uniform draw; returns the position and the codeword.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, &Permutation) {
        let k = rng.random_range(0..self.len());
        (k, &self.codewords[k])
    }

    /// Plain-text export: header line then one codeword per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# family={} n={} size={}", self.tag(), self.n, self.len())?;
        for c in &self.codewords {
            writeln!(w, "{c}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("codebook text is ASCII")
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        crate::harness::write_atomically(path, self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::tests::{all_perms, perm};
    use crate::rng;

    #[test]
    fn membership_examples() {
        let ce6 = CodeFamily::tenengolts_even(6).unwrap();
        let c6 = CodeFamily::tenengolts(6).unwrap();
        assert!(ce6.is_member(&perm(&[1, 5, 6, 2, 3, 4])).unwrap());
        let rev = perm(&[6, 5, 4, 3, 2, 1]);
        assert!(c6.is_member(&rev).unwrap());
        assert!(!ce6.is_member(&rev).unwrap());
        assert!(!c6.is_member(&perm(&[1, 2, 3, 4, 5, 6])).unwrap());
        assert!(c6.is_member(&perm(&[1, 2, 3])).is_err());
    }

    #[test]
    fn family_validation() {
        assert!(CodeFamily::interleaved(6).is_err());
        assert!(CodeFamily::interleaved(10).is_err());
        assert!(CodeFamily::interleaved(9).is_ok());
        assert!(CodeFamily::tenengolts(1).is_err());
        assert!(CodeFamily::tenengolts_even(11).unwrap().enumerate().is_err());
    }

    #[test]
    fn table_sizes() {
        let size = |f: CodeFamily| f.enumerate().unwrap().len();
        assert_eq!(size(CodeFamily::tenengolts_even(6).unwrap()), 56);
        assert_eq!(size(CodeFamily::tenengolts_even(7).unwrap()), 360);
        assert_eq!(size(CodeFamily::tenengolts_even(8).unwrap()), 2544);
        assert_eq!(size(CodeFamily::interleaved(9).unwrap()), 27);
        assert_eq!(size(CodeFamily::interleaved(12).unwrap()), 1728);
        for m in [3usize, 4] {
            let fact: usize = (1..=m).product();
            assert_eq!(
                size(CodeFamily::interleaved(3 * m).unwrap()),
                (fact / 2).pow(3)
            );
        }
    }

    #[test]
    fn checksum_classes_partition_symmetric_group() {
        for n in 2..=8 {
            let mut classes = vec![0usize; n];
            let mut total = 0;
            for_each_permutation(n, |s| {
                classes[Permutation::new(s.to_vec()).unwrap().tenengolts_checksum()] += 1;
                total += 1;
            });
            let fact: usize = (1..=n).product();
            assert_eq!(classes.iter().sum::<usize>(), fact);
            assert_eq!(total, fact);
            let cb = CodeFamily::tenengolts(n).unwrap().enumerate().unwrap();
            assert_eq!(cb.len(), classes[0]);
        }
    }

    #[test]
    fn enumerate_agrees_with_membership() {
        for n in 3..=8 {
            let f = CodeFamily::tenengolts_even(n).unwrap();
            let cb = f.enumerate().unwrap();
            for c in cb.codewords() {
                assert!(f.is_member(c).unwrap());
            }
            let mut members = 0;
            for_each_permutation(n, |s| {
                let p = Permutation::new(s.to_vec()).unwrap();
                let is = f.is_member(&p).unwrap();
                assert_eq!(is, cb.contains(s));
                members += usize::from(is);
            });
            assert_eq!(members, cb.len());
        }
        let f = CodeFamily::interleaved(9).unwrap();
        let cb = f.enumerate().unwrap();
        let members = all_perms(9)
            .iter()
            .filter(|p| f.is_member(p).unwrap())
            .count();
        assert_eq!(members, cb.len());
    }

    #[test]
    fn codebook_is_lexicographic_and_indexed() {
        for f in [
            CodeFamily::tenengolts_even(7).unwrap(),
            CodeFamily::interleaved(12).unwrap(),
        ] {
            let cb = f.enumerate().unwrap();
            assert!(cb.codewords().windows(2).all(|w| w[0] < w[1]));
            for (k, c) in cb.codewords().iter().enumerate() {
                assert_eq!(cb.index_of(c.symbols()), Some(k));
            }
        }
    }

    #[test]
    fn interleaving_examples() {
        let id = Permutation::identity(3);
        assert_eq!(
            build_interleaved(9, [&id, &id, &id]).unwrap(),
            perm(&[1, 4, 7, 2, 5, 8, 3, 6, 9])
        );
        assert_eq!(
            build_interleaved(9, [&perm(&[2, 3, 1]), &id, &id]).unwrap(),
            perm(&[2, 4, 7, 3, 5, 8, 1, 6, 9])
        );
        assert!(build_interleaved(9, [&perm(&[2, 1, 3]), &id, &id]).is_err());
        assert!(build_interleaved(9, [&Permutation::identity(4), &id, &id]).is_err());
    }

    #[test]
    fn minimum_distances() {
        for n in [6, 7, 8] {
            let cb = CodeFamily::tenengolts_even(n).unwrap().enumerate().unwrap();
            let d = cb.min_hamming_distance().unwrap();
            assert!(d >= 3, "n={n} d={d}");
            if n == 6 {
                assert_eq!(d, 3);
            }
        }
        let il9 = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
        assert_eq!(il9.min_ulam_distance().unwrap(), 3);

        let p = perm(&[1, 2, 3, 4]);
        let swapped = perm(&[2, 1, 3, 4]);
        let cb = Codebook::from_codewords(vec![p.clone(), swapped]).unwrap();
        assert_eq!(cb.min_hamming_distance().unwrap(), 2);
        let moved = p.translocate(1, 4).unwrap();
        let cb = Codebook::from_codewords(vec![p.clone(), moved]).unwrap();
        assert_eq!(cb.min_ulam_distance().unwrap(), 1);
        assert!(Codebook::from_codewords(vec![p.clone(), p.clone()]).is_err());
        let single = Codebook::from_codewords(vec![p]).unwrap();
        assert!(single.min_hamming_distance().is_err());
        assert!(single.min_ulam_distance().is_err());
        assert!(Codebook::from_codewords(vec![]).is_err());
    }

    #[test]
    fn single_translocations_decode_uniquely_in_interleaved_9() {
        let cb = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
        let mut cases = 0;
        for c in cb.codewords() {
            for i in 1..=9 {
                for j in (1..=9).filter(|&j| j != i) {
                    let w = c.translocate(i, j).unwrap();
                    let dists: Vec<usize> = cb
                        .codewords()
                        .iter()
                        .map(|d| w.ulam_distance(d).unwrap())
                        .collect();
                    let best = *dists.iter().min().unwrap();
                    let winners: Vec<_> = (0..cb.len()).filter(|&k| dists[k] == best).collect();
                    assert_eq!(winners.len(), 1);
                    assert_eq!(cb.get(winners[0]), c);
                    cases += 1;
                }
            }
        }
        assert_eq!(cases, 27 * 72);
    }

    #[test]
    fn sampling() {
        let single = Codebook::from_codewords(vec![perm(&[2, 1])]).unwrap();
        let mut r = rng::stream(1);
        assert_eq!(single.sample(&mut r).1, &perm(&[2, 1]));

        let cb = CodeFamily::tenengolts_even(6).unwrap().enumerate().unwrap();
        let draws = 100_000;
        let mut counts = vec![0usize; cb.len()];
        let mut r = rng::stream(42);
        for _ in 0..draws {
            counts[cb.sample(&mut r).0] += 1;
        }
        let p = 1.0 / 56.0;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!((c as f64 - mean).abs() < 5.0 * sd, "count {c} vs {mean}");
        }

        let seq = |seed| {
            let mut r = rng::stream(seed);
            (0..50).map(|_| cb.sample(&mut r).0).collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn text_export() {
        let cb = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
        let text = cb.to_text();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# family=interleaved n=9 size=27"));
        assert_eq!(lines.next(), Some("1 4 7 2 5 8 3 6 9"));
        assert_eq!(text.lines().count(), 28);
    }
}
