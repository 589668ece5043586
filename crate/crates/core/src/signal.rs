//! The sample container passed between processing stages.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Complex baseband samples at `sps` samples per symbol.
///
/// `delay` is the sample index at which symbol 0 of the transmitted
/// (extended) block is aligned; decimating at `delay + k * sps` yields
/// symbol `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<C64>,
    pub sps: usize,
    pub delay: usize,
}

impl ComplexSignal {
    pub fn new(samples: Vec<C64>, sps: usize) -> Self {
        Self {
            samples,
            sps,
            delay: 0,
        }
    }

    pub fn with_delay(mut self, delay: usize) -> Self {
        self.delay = delay;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            sps: self.sps,
            delay: self.delay,
        }
    }

    /// Samples at `delay + k * sps` for `k` in `0..count`, zero beyond the end.
    pub fn decimate(&self, count: usize) -> Vec<C64> {
        (0..count)
            .map(|k| {
                self.samples
                    .get(self.delay + k * self.sps)
                    .copied()
                    .unwrap_or_default()
            })
            .collect()
    }
}

pub fn mean_power(samples: &[C64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Full linear convolution of complex samples with complex taps.
pub fn convolve(x: &[C64], taps: &[C64]) -> Vec<C64> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::default(); x.len() + taps.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi == C64::default() {
            continue;
        }
        for (o, &t) in out[i..].iter_mut().zip(taps) {
            *o += xi * t;
        }
    }
    out
}

/// Full linear convolution with real taps.
pub fn convolve_real(x: &[C64], taps: &[f64]) -> Vec<C64> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::default(); x.len() + taps.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi == C64::default() {
            continue;
        }
        for (o, &t) in out[i..].iter_mut().zip(taps) {
            *o += xi * t;
        }
    }
    out
}
