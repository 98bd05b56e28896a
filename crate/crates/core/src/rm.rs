//! Rank-modulation channel for flash cells.
//!
//! A permutation lists cell indices in increasing charge order. Reading
//! adds `Normal(0, sigma1²)` to every cell and, with probability `p`, an
//! independent `Normal(0, sigma2²)`; the ranking of the retrieved charges
//! is the channel output.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq)]
pub struct RmParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub p_large: f64,
    pub levels: Vec<f64>,
}

impl RmParams {
    pub fn new(sigma1: f64, sigma2: f64, p_large: f64, levels: Vec<f64>) -> Result<Self> {
        let params = RmParams {
            sigma1,
            sigma2,
            p_large,
            levels,
        };
        params.validate()?;
        Ok(params)
    }

    /// Defaults levels for `n` via [`default_levels`].
    pub fn with_default_levels(n: usize, sigma1: f64, sigma2: f64, p_large: f64) -> Result<Self> {
        Self::new(sigma1, sigma2, p_large, default_levels(n)?)
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    /// Smallest distance between adjacent charge levels.
    pub fn min_gap(&self) -> f64 {
        self.levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1 >= 0.0 && self.sigma2 > self.sigma1 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need sigma2 > sigma1 >= 0, got sigma1 = {}, sigma2 = {}",
                self.sigma1, self.sigma2
            )));
        }
        if !(0.0..=1.0).contains(&self.p_large) {
            return Err(Error::InvalidParams(format!(
                "p = {} not in [0, 1]",
                self.p_large
            )));
        }
        if self.levels.len() < 2
            || self.levels.iter().any(|l| !l.is_finite())
            || self.levels.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParams(
                "charge levels must be finite and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// `1.5 + 0.5 i` for `n = 9`, `1.5 + 0.4 i` for `n = 12`.
pub fn default_levels(n: usize) -> Result<Vec<f64>> {
    let step = match n {
        9 => 0.5,
        12 => 0.4,
        _ => {
            return Err(Error::InvalidParams(format!(
                "no default charge levels for n = {n}; supply them explicitly"
            )))
        }
    };
    Ok((0..n).map(|i| 1.5 + step * i as f64).collect())
}

/// Cell `p_k` receives `levels[k]`; returns charges indexed by cell.
pub fn encode_charges(p: &Permutation, levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: levels.len(),
        });
    }
    let mut charges = vec![0.0; p.len()];
    for (k, &cell) in p.symbols().iter().enumerate() {
        charges[cell as usize - 1] = levels[k];
    }
    Ok(charges)
}

/// Adds the two-component Gaussian noise to every cell. Per cell the draw
/// order is: the `sigma1` normal, the uniform for the large-noise event,
/// then the `sigma2` normal when the event fires. Disabled components
/// (`sigma1 = 0`, `p = 0`) consume nothing.
pub fn perturb<R: Rng + ?Sized>(charges: &[f64], params: &RmParams, rng: &mut R) -> Vec<f64> {
    charges
        .iter()
        .map(|&c| {
            let mut v = c;
            if params.sigma1 > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                v += params.sigma1 * z;
            }
            let large = if params.p_large >= 1.0 {
                true
            } else if params.p_large > 0.0 {
                rng.random::<f64>() < params.p_large
            } else {
                false
            };
            if large {
                let z: f64 = StandardNormal.sample(rng);
                v += params.sigma2 * z;
            }
            v
        })
        .collect()
}

/// Cell indices in increasing charge order; ties go to the lower cell.
pub fn read_ranking(charges: &[f64]) -> Result<Permutation> {
    let mut cells: Vec<u8> = (1..=charges.len() as u8).collect();
    cells.sort_by(|&a, &b| {
        charges[a as usize - 1]
            .total_cmp(&charges[b as usize - 1])
            .then(a.cmp(&b))
    });
    Permutation::new(cells)
}

/// Program, disturb and read back one codeword.
pub fn transmit<R: Rng + ?Sized>(
    p: &Permutation,
    params: &RmParams,
    rng: &mut R,
) -> Result<Permutation> {
    let charges = encode_charges(p, &params.levels)?;
    read_ranking(&perturb(&charges, params, rng))
}
