//! Bit error rate, mismatched-decoding achievable rate and outage.

use rayon::prelude::*;

use crate::detect::DetectorParams;
use crate::error::{Error, Result};
use crate::signal::C64;
use crate::txchain::QamAlphabet;

/// Capacity threshold for outage in the fading scenario, bits/symbol.
pub const OUTAGE_THRESHOLD: f64 = 7.5;
/// Two-sided 95% normal quantile for confidence intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// Achievable information rate estimate in bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AirEstimate {
    pub value: f64,
    pub samples: usize,
    pub stderr: f64,
}

/// GMI under the Gaussian distortion model of `params`: the sample mean of
/// `log2 P - log2 sum_a' p(a~|a') / p(a~|a)`, evaluated in the log domain.
pub fn gmi_air(branches: &[Vec<C64>], truth: &[usize], params: &DetectorParams, alphabet: &QamAlphabet) -> Result<AirEstimate> {
    let n = truth.len();
    if n == 0 || branches.len() != params.branches() || branches.iter().any(|b| b.len() != n) {
        return Err(Error::invalid("branch estimates must match the detector and the labels"));
    }
    let points = alphabet.points();
    let losses: Vec<f64> = (0..n)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(branches.len()), vec![0.0; points.len()]),
            |(soft, metrics), k| {
                soft.clear();
                soft.extend(branches.iter().map(|b| b[k]));
                let y = params.combine(soft);
                let mut min = f64::INFINITY;
                for (m, &a) in metrics.iter_mut().zip(points) {
                    *m = params.metric(y, a);
                    min = min.min(*m);
                }
                // log sum_a' exp(-(m' - m_true)), shifted by the largest term.
                let sum: f64 = metrics.iter().map(|m| (min - m).exp()).sum();
                (sum.ln() + metrics[truth[k]] - min) / std::f64::consts::LN_2
            },
        )
        .collect();
    Ok(summarize(alphabet.bits_per_symbol() as f64, &losses))
}

/// GMI of a single soft stream under per-point Gaussian centers
/// `p(z|a) ~ exp(-|z - c_a|^2 / noise_var)`, as used by the modified metric.
pub fn gmi_air_centers(z: &[C64], truth: &[usize], centers: &[C64], noise_var: f64) -> Result<AirEstimate> {
    let n = truth.len();
    if n == 0 || z.len() != n || !(noise_var > 0.0) {
        return Err(Error::invalid("need matching soft symbols and labels and a positive variance"));
    }
    let bits = (centers.len() as f64).log2();
    let losses: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let d: Vec<f64> = centers.iter().map(|c| (z[k] - c).norm_sqr() / noise_var).collect();
            let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let sum: f64 = d.iter().map(|v| (min - v).exp()).sum();
            (sum.ln() + d[truth[k]] - min) / std::f64::consts::LN_2
        })
        .collect();
    Ok(summarize(bits, &losses))
}

fn summarize(bits: f64, losses: &[f64]) -> AirEstimate {
    let n = losses.len();
    let mean = losses.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    AirEstimate {
        value: bits - mean,
        samples: n,
        stderr: (var / n as f64).sqrt(),
    }
}

/// Sample-weighted pooling of independent estimates.
pub fn pool_air(parts: &[AirEstimate]) -> Option<AirEstimate> {
    let total: usize = parts.iter().map(|p| p.samples).sum();
    if total == 0 {
        return None;
    }
    let w = |p: &AirEstimate| p.samples as f64 / total as f64;
    Some(AirEstimate {
        value: parts.iter().map(|p| w(p) * p.value).sum(),
        samples: total,
        stderr: parts.iter().map(|p| (w(p) * p.stderr).powi(2)).sum::<f64>().sqrt(),
    })
}

/// Bit error rate with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerEstimate {
    pub errors: u64,
    pub bits: u64,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BerEstimate {
    pub fn from_counts(errors: u64, bits: u64) -> Self {
        if bits == 0 {
            return Self {
                errors,
                bits,
                rate: 0.0,
                lower: 0.0,
                upper: 1.0,
            };
        }
        let n = bits as f64;
        let p = errors as f64 / n;
        let z2 = Z95 * Z95;
        let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
        Self {
            errors,
            bits,
            rate: p,
            lower: (center - half).max(0.0),
            upper: (center + half).min(1.0),
        }
    }

    /// Half-width of the interval.
    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }

    /// Pools the bit counts of several estimates.
    pub fn merge(parts: &[BerEstimate]) -> Self {
        let errors = parts.iter().map(|p| p.errors).sum();
        let bits = parts.iter().map(|p| p.bits).sum();
        Self::from_counts(errors, bits)
    }
}

/// Counts bit errors between Gray-labeled symbol decisions and the truth.
pub fn ber(decisions: &[usize], truth: &[usize], alphabet: &QamAlphabet) -> Result<BerEstimate> {
    if decisions.len() != truth.len() {
        return Err(Error::invalid("decision and truth lengths differ"));
    }
    let errors: u64 = decisions.iter().zip(truth).map(|(d, t)| u64::from((d ^ t).count_ones())).sum();
    Ok(BerEstimate::from_counts(errors, (truth.len() * alphabet.bits_per_symbol()) as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutageReport {
    pub threshold: f64,
    pub capacities: Vec<f64>,
    pub p_out: f64,
}

/// Fraction of blocks whose achievable rate falls below `threshold`.
pub fn outage(capacities: &[f64], threshold: f64) -> OutageReport {
    let below = capacities.iter().filter(|&&c| c < threshold).count();
    let p_out = if capacities.is_empty() {
        0.0
    } else {
        below as f64 / capacities.len() as f64
    };
    OutageReport {
        threshold,
        capacities: capacities.to_vec(),
        p_out,
    }
}
