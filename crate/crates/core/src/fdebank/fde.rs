use super::{SymbolRateCsi, UnitaryDft};
use crate::error::{Error, Result};
use crate::signal::C64;

/// Per-bin MMSE gains for one branch and block length.
///
/// The bin responses are `H_k = sqrt(n) * lambda_k` so that a noiseless
/// flat channel equalizes to the transmitted symbols; `delta` is the noise
/// variance relative to the unit symbol energy.
#[derive(Clone, Debug)]
pub struct FdeFilter {
    gains: Vec<C64>,
    dft: UnitaryDft,
    pub delta: f64,
}

impl FdeFilter {
    pub fn new(csi: &SymbolRateCsi, n: usize, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::invalid(format!("regularization {delta} must be nonnegative")));
        }
        let transfer = csi.transfer(n);
        let mut gains = Vec::with_capacity(n);
        for (bin, h) in transfer.into_iter().enumerate() {
            let den = h.norm_sqr() + delta;
            if den == 0.0 {
                return Err(Error::SingularBin { bin });
            }
            gains.push(h.conj() / den);
        }
        Ok(Self {
            gains,
            dft: UnitaryDft::new(n),
            delta,
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `Q diag(g) Q^H y`.
    pub fn apply(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.len() {
            return Err(Error::invalid(format!(
                "block of {} samples for a {}-point equalizer",
                y.len(),
                self.len()
            )));
        }
        let mut buf = y.to_vec();
        self.dft.forward(&mut buf);
        for (v, g) in buf.iter_mut().zip(&self.gains) {
            *v *= g;
        }
        self.dft.inverse(&mut buf);
        Ok(buf)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EqualizedBranch {
    pub z: Vec<C64>,
    pub delta: f64,
}

pub fn fde_equalize(y: &[C64], csi: &SymbolRateCsi, delta: f64) -> Result<EqualizedBranch> {
    let filter = FdeFilter::new(csi, y.len(), delta)?;
    Ok(EqualizedBranch {
        z: filter.apply(y)?,
        delta,
    })
}
