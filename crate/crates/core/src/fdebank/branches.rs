use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, C64};

/// The `sps` symbol-rate phases of one received block, guards removed.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSet {
    /// `streams[i][n]` is the sample `n * sps + i` after the first data
    /// symbol instant.
    pub streams: Vec<Vec<C64>>,
    /// Sample index of the first data symbol instant in the source signal.
    pub start: usize,
}

impl BranchSet {
    pub fn sps(&self) -> usize {
        self.streams.len()
    }

    pub fn block_len(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }

    /// The sample-rate block the branches were cut from.
    pub fn interleave(&self) -> Vec<C64> {
        let mu = self.sps();
        let mut out = vec![C64::default(); mu * self.block_len()];
        for (i, s) in self.streams.iter().enumerate() {
            for (n, &v) in s.iter().enumerate() {
                out[n * mu + i] = v;
            }
        }
        out
    }
}

/// Cuts `n_sym` symbols after an `n_cp`-symbol prefix into `mf.sps` phases.
pub fn split_branches(mf: &ComplexSignal, n_cp: usize, n_sym: usize) -> Result<BranchSet> {
    let mu = mf.sps;
    let start = mf.delay + n_cp * mu;
    let needed = start + n_sym * mu;
    if needed > mf.len() {
        return Err(Error::InsufficientSamples {
            needed,
            available: mf.len(),
        });
    }
    let streams = (0..mu)
        .map(|i| (0..n_sym).map(|n| mf.samples[start + n * mu + i]).collect())
        .collect();
    Ok(BranchSet { streams, start })
}
