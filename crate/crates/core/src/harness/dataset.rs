use rayon::prelude::*;

use super::Channel;
use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::rng;

const DATA_TAG: u64 = 0xDA7A;

/// Channel outputs paired with the codewords that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    n: usize,
    input_len: usize,
    inputs: Vec<u8>,
    targets: Vec<u8>,
    strata: Vec<u16>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn input(&self, k: usize) -> &[u8] {
        &self.inputs[k * self.input_len..(k + 1) * self.input_len]
    }

    /// Target codeword symbols of sample `k`.
    pub fn target(&self, k: usize) -> &[u8] {
        &self.targets[k * self.n..(k + 1) * self.n]
    }

    /// Index of the grid point that generated sample `k`.
    pub fn stratum(&self, k: usize) -> usize {
        self.strata[k] as usize
    }

    /// Number of samples per grid point.
    pub fn stratum_counts(&self, points: usize) -> Vec<usize> {
        let mut counts = vec![0; points];
        for &s in &self.strata {
            counts[s as usize] += 1;
        }
        counts
    }
}

/// Repetitions per codeword for each grid point. When `delta` is not a
/// multiple of the grid size the first `delta % |grid|` points get one extra.
pub(crate) fn repetitions(delta: usize, points: usize) -> Vec<usize> {
    (0..points)
        .map(|g| delta / points + usize::from(g < delta % points))
        .collect()
}

/// Inputs, targets and strata of one (grid point, codeword) job.
type Chunk = (Vec<u8>, Vec<u8>, Vec<u16>);

/// Passes every codeword through each grid channel its share of `delta`
/// times. Samples are ordered by grid point, then codeword, then repetition.
/// The pair (grid point, codeword) owns substream `g·M + k`.
pub fn generate_dataset(cb: &Codebook, grid: &[Channel], delta: usize, seed: u64) -> Result<Dataset> {
    if grid.is_empty() {
        return Err(Error::Config("empty noise grid".into()));
    }
    if grid.len() > u16::MAX as usize {
        return Err(Error::Config("noise grid too large".into()));
    }
    if cb.is_empty() {
        return Err(Error::InvalidCodebook("empty codebook".into()));
    }
    let n = cb.n();
    for ch in grid {
        ch.validate(n)?;
        if ch.tag() != grid[0].tag() {
            return Err(Error::Config("grid mixes channel kinds".into()));
        }
    }
    let input_len = match &grid[0] {
        Channel::Plc(p) => {
            if grid
                .iter()
                .any(|c| matches!(c, Channel::Plc(q) if q.c_max != p.c_max))
            {
                return Err(Error::Config("grid points disagree on c_max".into()));
            }
            n * p.c_max
        }
        Channel::Rm(_) => n,
    };
    let reps = repetitions(delta, grid.len());
    let m = cb.len();
    let key = rng::mix(seed, DATA_TAG);
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..m).map(move |k| (g, k)))
        .collect();
    let chunks: Vec<Result<Chunk>> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let mut stream = rng::substream(key, (g * m + k) as u64);
            let c = cb.get(k);
            let mut inputs = Vec::with_capacity(reps[g] * input_len);
            let mut targets = Vec::with_capacity(reps[g] * n);
            for _ in 0..reps[g] {
                let out = grid[g].transmit(c, &mut stream)?;
                inputs.extend_from_slice(out.nn_input());
                targets.extend_from_slice(c.symbols());
            }
            Ok((inputs, targets, vec![g as u16; reps[g]]))
        })
        .collect();
    let total: usize = reps.iter().sum::<usize>() * m;
    let mut data = Dataset {
        n,
        input_len,
        inputs: Vec::with_capacity(total * input_len),
        targets: Vec::with_capacity(total * n),
        strata: Vec::with_capacity(total),
    };
    for chunk in chunks {
        let (i, t, s) = chunk?;
        data.inputs.extend(i);
        data.targets.extend(t);
        data.strata.extend(s);
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::CodeFamily;
    use crate::plc::PlcParams;
    use crate::rm::RmParams;

    fn ce6() -> Codebook {
        CodeFamily::tenengolts_even(6).unwrap().enumerate().unwrap()
    }

    #[test]
    fn counts_and_stratification() {
        let cb = ce6();
        let grid = [Channel::Plc(PlcParams::sync(6, 0.01, 0.0, 0.0))];
        let d = generate_dataset(&cb, &grid, 10, 1).unwrap();
        assert_eq!(d.len(), 560);
        for k in 0..cb.len() {
            let hits = (0..d.len()).filter(|&s| d.target(s) == cb.get(k).symbols()).count();
            assert_eq!(hits, 10);
        }
        let grid: Vec<Channel> = (1..=4)
            .map(|i| Channel::Plc(PlcParams::sync(6, 0.01 * i as f64, 0.001, 0.001)))
            .collect();
        let d = generate_dataset(&cb, &grid, 8, 1).unwrap();
        assert_eq!(d.stratum_counts(4), vec![2 * 56; 4]);
        let d = generate_dataset(&cb, &grid, 10, 1).unwrap();
        assert_eq!(d.stratum_counts(4), vec![3 * 56, 3 * 56, 2 * 56, 2 * 56]);
        assert_eq!(repetitions(10, 4), vec![3, 3, 2, 2]);
        for s in 0..d.len() {
            assert!(cb.contains(d.target(s)));
        }
    }

    #[test]
    fn noiseless_point_yields_clean_embeddings() {
        let cb = ce6();
        let d = generate_dataset(&cb, &[Channel::Plc(PlcParams::clean(6))], 3, 4).unwrap();
        for s in 0..d.len() {
            let t = crate::perm::Permutation::new(d.target(s).to_vec()).unwrap();
            assert_eq!(d.input(s), t.to_matrix().as_slice());
        }
        let il = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
        let clean = RmParams::with_default_levels(9, 0.0, 1.0, 0.0).unwrap();
        let d = generate_dataset(&il, &[Channel::Rm(clean)], 2, 4).unwrap();
        for s in 0..d.len() {
            assert_eq!(d.input(s), d.target(s));
        }
    }

    #[test]
    fn reproducible_and_validated() {
        let cb = ce6();
        let grid = [Channel::Plc(PlcParams {
            l_max: 1,
            c_max: 9,
            p_i: 0.05,
            p_d: 0.05,
            ..PlcParams::sync(6, 0.05, 0.01, 0.01)
        })];
        let a = generate_dataset(&cb, &grid, 5, 9).unwrap();
        assert_eq!(a, generate_dataset(&cb, &grid, 5, 9).unwrap());
        assert_ne!(a, generate_dataset(&cb, &grid, 5, 10).unwrap());
        assert_eq!(a.input_len(), 54);

        assert!(generate_dataset(&cb, &[], 5, 1).is_err());
        let rm = RmParams::with_default_levels(9, 0.1, 1.0, 0.0).unwrap();
        assert!(generate_dataset(&cb, &[Channel::Rm(rm)], 5, 1).is_err());
    }
}
