use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fdebank::UnitaryDft;
use crate::signal::C64;

/// Averaged periodogram on a grid over `[-pi, pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    /// Radians per sample of the analyzed sequence.
    pub grid: Vec<f64>,
    pub psd: Vec<f64>,
    pub segment_len: usize,
    pub segments: usize,
}

impl SpectrumEstimate {
    /// Mean of the PSD over the grid, the power it accounts for.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() / self.psd.len() as f64
    }

    pub fn nearest_bin(&self, w: f64) -> usize {
        let n = self.grid.len() as f64;
        let k = ((w + PI) / (2.0 * PI) * n).round() as i64;
        k.rem_euclid(self.grid.len() as i64) as usize
    }
}

/// Welch estimate: Hann window, 50% overlap, scaled so that white noise of
/// variance `s` has expected PSD `s` in every bin.
pub fn estimate_psd(signal: &[C64], segment_len: usize) -> Result<SpectrumEstimate> {
    if segment_len < 2 {
        return Err(Error::invalid("PSD segment length must be at least 2"));
    }
    if signal.len() < 4 * segment_len {
        return Err(Error::InsufficientSamples {
            needed: 4 * segment_len,
            available: signal.len(),
        });
    }
    let window: Vec<f64> = (0..segment_len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / segment_len as f64).cos())
        .collect();
    let window_power = window.iter().map(|w| w * w).sum::<f64>() / segment_len as f64;
    let dft = UnitaryDft::new(segment_len);
    let hop = segment_len / 2;
    let mut acc = vec![0.0; segment_len];
    let mut segments = 0;
    let mut buf = vec![C64::default(); segment_len];
    let mut start = 0;
    while start + segment_len <= signal.len() {
        for ((b, &s), &w) in buf.iter_mut().zip(&signal[start..]).zip(&window) {
            *b = s * w;
        }
        dft.forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let norm = 1.0 / (window_power * segments as f64);
    let half = segment_len / 2;
    let psd = (0..segment_len).map(|k| acc[(k + half) % segment_len] * norm).collect();
    let grid = (0..segment_len)
        .map(|k| 2.0 * PI * (k as f64 - half as f64) / segment_len as f64)
        .collect();
    Ok(SpectrumEstimate {
        grid,
        psd,
        segment_len,
        segments,
    })
}
