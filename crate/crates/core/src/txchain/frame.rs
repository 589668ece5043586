use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block geometry in symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameLayout {
    /// Data block length.
    pub n_d: usize,
    /// Cyclic prefix length.
    pub n_cp: usize,
    /// Cyclic suffix length.
    pub n_cs: usize,
    /// Fast-time training block length.
    pub n_f: usize,
    /// Slow-time training sequence length.
    pub n_s: usize,
}

impl FrameLayout {
    /// Checks the guard lengths against the channel span and the anticausal
    /// estimate span.
    pub fn check_guards(&self, channel_span_symbols: usize, anticausal_taps: usize) -> Result<()> {
        if self.n_cp + 1 < channel_span_symbols {
            return Err(Error::invalid(format!(
                "cyclic prefix {} shorter than channel span {} minus one",
                self.n_cp, channel_span_symbols
            )));
        }
        if self.n_cs + 1 < anticausal_taps {
            return Err(Error::invalid(format!(
                "cyclic suffix {} shorter than anticausal span {} minus one",
                self.n_cs, anticausal_taps
            )));
        }
        Ok(())
    }

    pub fn extended_len(&self, block_len: usize) -> usize {
        self.n_cp + block_len + self.n_cs
    }
}

/// `[last n_cp of block | block | first n_cs of block]`.
pub fn add_cyclic_extension<T: Copy>(block: &[T], layout: &FrameLayout) -> Result<Vec<T>> {
    let n = block.len();
    if layout.n_cp > n || layout.n_cs > n {
        return Err(Error::ExtensionTooLong {
            n_cp: layout.n_cp,
            n_cs: layout.n_cs,
            n_d: n,
        });
    }
    let mut out = Vec::with_capacity(layout.extended_len(n));
    out.extend_from_slice(&block[n - layout.n_cp..]);
    out.extend_from_slice(block);
    out.extend_from_slice(&block[..layout.n_cs]);
    Ok(out)
}
