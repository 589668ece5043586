//! Hard-decision detection: nearest neighbor on one branch and the
//! distortion-aware symbol-by-symbol detector (DA-SSD) over several.
//!
//! Under the Gaussian distortion model `a~ = beta a + eta`, `eta ~ CN(0, R)`,
//! the DA-SSD metric `(a~ - beta a)^H R^{-1} (a~ - beta a)` expands to
//! `const + c |a|^2 - 2 Re(a^* y)` with `y = beta^H R^{-1} a~` and
//! `c = beta^H R^{-1} beta`: a maximum-ratio combination followed by a
//! nearest-neighbor decision on `y / c`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::hermitian_condition;
use crate::signal::C64;
use crate::txchain::QamAlphabet;

/// Diagonal loading of the distortion covariance relative to its mean
/// eigenvalue.
pub const COVARIANCE_LOADING: f64 = 1e-9;
/// Loading floor so distortion-free training still yields a usable detector.
const MIN_LOADING: f64 = 1e-30;
const MAX_CONDITION: f64 = 1e14;

/// Vector Bussgang gain and distortion covariance across branches.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorParams {
    pub beta: DVector<C64>,
    pub r_eta: DMatrix<C64>,
    /// Training symbols the moments were estimated from.
    pub n_f: usize,
    /// `R^{-1} beta`.
    combiner: DVector<C64>,
    /// `beta^H R^{-1} beta`.
    energy: f64,
}

impl DetectorParams {
    pub fn new(beta: DVector<C64>, r_eta: DMatrix<C64>, n_f: usize) -> Result<Self> {
        let mu = beta.len();
        if mu == 0 || r_eta.shape() != (mu, mu) {
            return Err(Error::invalid("gain vector and covariance sizes differ"));
        }
        if hermitian_condition(&r_eta) > MAX_CONDITION {
            return Err(Error::SingularCovariance);
        }
        let chol = r_eta.clone().cholesky().ok_or(Error::SingularCovariance)?;
        let combiner = chol.solve(&beta);
        let energy = beta.dotc(&combiner).re;
        Ok(Self {
            beta,
            r_eta,
            n_f,
            combiner,
            energy,
        })
    }

    pub fn branches(&self) -> usize {
        self.beta.len()
    }

    /// Whitened matched-filter output `beta^H R^{-1} a~`.
    pub fn combine(&self, soft: &[C64]) -> C64 {
        self.combiner.iter().zip(soft).map(|(w, s)| w.conj() * s).sum()
    }

    /// `beta^H R^{-1} beta`, the post-combining signal gain.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// DA-SSD metric of candidate `a` up to an `a`-independent constant.
    pub fn metric(&self, combined: C64, a: C64) -> f64 {
        self.energy * a.norm_sqr() - 2.0 * (a.conj() * combined).re
    }
}

fn column(branches: &[Vec<C64>], n: usize, buf: &mut Vec<C64>) {
    buf.clear();
    buf.extend(branches.iter().map(|b| b[n]));
}

fn check_branches(branches: &[Vec<C64>], len: usize) -> Result<()> {
    if branches.is_empty() || branches.iter().any(|b| b.len() != len) {
        return Err(Error::invalid("every branch must carry one estimate per symbol"));
    }
    Ok(())
}

/// Sample-moment fit of the gain vector and distortion covariance from
/// fast-time training estimates `branches[i][n]` of known symbols.
pub fn train_dassd(branches: &[Vec<C64>], truth: &[C64]) -> Result<DetectorParams> {
    check_branches(branches, truth.len())?;
    let mu = branches.len();
    let n_f = truth.len();
    if n_f < mu + 1 {
        return Err(Error::InsufficientSamples {
            needed: mu + 1,
            available: n_f,
        });
    }
    let energy: f64 = truth.iter().map(|a| a.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::ZeroPower);
    }
    let beta = DVector::from_fn(mu, |i, _| {
        branches[i].iter().zip(truth).map(|(s, a)| s * a.conj()).sum::<C64>() / energy
    });
    let mut r = DMatrix::<C64>::zeros(mu, mu);
    let mut buf = Vec::with_capacity(mu);
    for (n, &a) in truth.iter().enumerate() {
        column(branches, n, &mut buf);
        let e: Vec<C64> = buf.iter().zip(beta.iter()).map(|(s, b)| s - b * a).collect();
        for j in 0..mu {
            for i in 0..mu {
                r[(i, j)] += e[i] * e[j].conj();
            }
        }
    }
    r /= C64::from((n_f - 1) as f64);
    let load = (COVARIANCE_LOADING * r.trace().re / mu as f64).max(MIN_LOADING);
    for i in 0..mu {
        r[(i, i)] += load;
    }
    DetectorParams::new(beta, r, n_f)
}

/// DA-SSD decision for one symbol's branch estimates; lowest index on ties.
pub fn dassd_decide(soft: &[C64], params: &DetectorParams, alphabet: &QamAlphabet) -> usize {
    let y = params.combine(soft);
    if params.energy > 0.0 {
        alphabet.nearest(y / params.energy)
    } else {
        // Zero gain: every candidate scores the same.
        0
    }
}

pub fn dassd_detect(branches: &[Vec<C64>], params: &DetectorParams, alphabet: &QamAlphabet) -> Result<Vec<usize>> {
    let len = branches.first().map_or(0, Vec::len);
    check_branches(branches, len)?;
    if branches.len() != params.branches() {
        return Err(Error::invalid("branch count differs from the fitted detector"));
    }
    Ok((0..len)
        .into_par_iter()
        .map_init(Vec::new, |buf, n| {
            column(branches, n, buf);
            dassd_decide(buf, params, alphabet)
        })
        .collect())
}

pub fn conventional_detect(z: &[C64], alphabet: &QamAlphabet) -> Vec<usize> {
    z.iter().map(|&v| alphabet.nearest(v)).collect()
}
