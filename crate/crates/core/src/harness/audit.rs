use rayon::prelude::*;

use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::md::md_decode_erasure;
use crate::perm::Permutation;
use crate::plc::{apply_error_pattern, PlcErrorPattern, PlcParams};

/// Upper bound on codewords x patterns for an exhaustive audit.
pub const MAX_AUDIT_WORK: u128 = 100_000_000;

/// Failures kept verbatim in a report.
const KEPT_FAILURES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditFailure {
    /// 0-based codebook position of the transmitted codeword.
    pub codeword: usize,
    pub pattern: PlcErrorPattern,
    pub decoded: Permutation,
    /// The right codeword was chosen only by the tie-break.
    pub tie: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropositionReport {
    /// `None` for a single-codeword book.
    pub min_distance: Option<usize>,
    /// Largest `e1 + e2 + e3` enumerated.
    pub budget: usize,
    pub codewords: usize,
    pub patterns_per_codeword: u64,
    pub failures: u64,
    /// The first few failures in enumeration order.
    pub examples: Vec<AuditFailure>,
}

impl PropositionReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Patterns with `e1 + e2 + e3 <= budget` on an `n x n` matrix, flips kept
/// off erased rows and columns.
fn pattern_count(n: usize, budget: usize) -> u128 {
    let mut total = 0;
    for e2 in 0..=budget.min(n) {
        for e3 in 0..=(budget - e2).min(n) {
            let free = (n - e2) * (n - e3);
            for e1 in 0..=budget - e2 - e3 {
                total += binom(n, e2) * binom(n, e3) * binom(free, e1);
            }
        }
    }
    total
}

/// Calls `visit` with every k-subset of `items`, in lexicographic order.
fn subsets<T: Copy>(items: &[T], k: usize, visit: &mut impl FnMut(&[T])) {
    fn go<T: Copy>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, visit);
            cur.pop();
        }
    }
    go(items, k, 0, &mut Vec::with_capacity(k), visit);
}

fn for_each_pattern(n: usize, budget: usize, mut visit: impl FnMut(PlcErrorPattern)) {
    let lines: Vec<usize> = (1..=n).collect();
    for e2 in 0..=budget.min(n) {
        subsets(&lines, e2, &mut |cols: &[usize]| {
            for e3 in 0..=(budget - e2).min(n) {
                subsets(&lines, e3, &mut |rows: &[usize]| {
                    let free: Vec<(usize, usize)> = (1..=n)
                        .filter(|r| !rows.contains(r))
                        .flat_map(|r| {
                            (1..=n).filter(|c| !cols.contains(c)).map(move |c| (r, c))
                        })
                        .collect();
                    for e1 in 0..=budget - e2 - e3 {
                        subsets(&free, e1, &mut |flips: &[(usize, usize)]| {
                            visit(PlcErrorPattern {
                                bg_flips: flips.iter().copied().collect(),
                                impulse_cols: cols.iter().copied().collect(),
                                pfd_rows: rows.iter().copied().collect(),
                                ..Default::default()
                            })
                        });
                    }
                });
            }
        });
    }
}

/// Exhaustive check of erasure decoding on the synchronized channel: every
/// codeword under every combination of background flips, impulse columns and
/// PFD rows totalling at most `budget` (default: minimum distance minus one).
/// A pattern fails if the decoder returns another codeword or needs the
/// tie-break to reach the right one.
pub fn proposition_audit(cb: &Codebook, budget: Option<usize>) -> Result<PropositionReport> {
    if cb.is_empty() {
        return Err(Error::InvalidCodebook("empty codebook".into()));
    }
    let n = cb.n();
    let min_distance = if cb.len() > 1 {
        Some(cb.min_hamming_distance()?)
    } else {
        None
    };
    let budget = match (budget, min_distance) {
        (Some(b), _) => b,
        (None, Some(d)) => d - 1,
        (None, None) => 0,
    };
    let per = pattern_count(n, budget);
    if per * cb.len() as u128 > MAX_AUDIT_WORK {
        return Err(Error::TooLarge {
            n,
            limit: MAX_AUDIT_WORK as usize,
        });
    }
    let params = PlcParams::clean(n);
    let results: Vec<(u64, Vec<AuditFailure>)> = cb
        .codewords()
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut failures = 0u64;
            let mut kept = Vec::new();
            let mut status = Ok(());
            for_each_pattern(n, budget, |pattern| {
                if status.is_err() {
                    return;
                }
                let decoded = apply_error_pattern(c, &pattern, &params)
                    .and_then(|m| md_decode_erasure(&m.bits, cb));
                match decoded {
                    Ok(r) if r.index == k && !r.tie => {}
                    Ok(r) => {
                        failures += 1;
                        if kept.len() < KEPT_FAILURES {
                            kept.push(AuditFailure {
                                codeword: k,
                                pattern,
                                decoded: r.codeword,
                                tie: r.tie,
                            });
                        }
                    }
                    Err(e) => status = Err(e),
                }
            });
            status.map(|()| (failures, kept))
        })
        .collect::<Result<_>>()?;
    let failures = results.iter().map(|r| r.0).sum();
    let examples = results
        .into_iter()
        .flat_map(|r| r.1)
        .take(KEPT_FAILURES)
        .collect();
    Ok(PropositionReport {
        min_distance,
        budget,
        codewords: cb.len(),
        patterns_per_codeword: per as u64,
        failures,
        examples,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeAudit {
    pub label: String,
    pub n: usize,
    pub size: usize,
    pub min_hamming: Option<usize>,
    pub min_ulam: Option<usize>,
}

/// Size and minimum Hamming/Ulam distances by pairwise scan.
pub fn code_audit(cb: &Codebook) -> Result<CodeAudit> {
    let (min_hamming, min_ulam) = if cb.len() > 1 {
        (Some(cb.min_hamming_distance()?), Some(cb.min_ulam_distance()?))
    } else {
        (None, None)
    };
    Ok(CodeAudit {
        label: cb.family().map_or_else(|| cb.tag(), |f| f.label()),
        n: cb.n(),
        size: cb.len(),
        min_hamming,
        min_ulam,
    })
}
