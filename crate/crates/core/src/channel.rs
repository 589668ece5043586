//! Block-fading multipath at sample rate and additive white Gaussian noise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::rng::{self, SimRng};
use crate::signal::{convolve, ComplexSignal, C64};

pub use crate::txchain::matched_filter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelProfile {
    /// Taps only at multiples of the samples-per-symbol factor.
    SymbolSparse,
    /// A tap at every sample.
    DenseExponential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<C64>,
    pub profile: ChannelProfile,
    pub seed: u64,
}

impl ChannelRealization {
    pub fn identity() -> Self {
        Self {
            taps: vec![C64::new(1.0, 0.0)],
            profile: ChannelProfile::SymbolSparse,
            seed: 0,
        }
    }

    pub fn power(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    /// `H(e^{jw})` with `w` in radians per sample.
    pub fn response(&self, w: f64) -> C64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(l, &h)| h * C64::from_polar(1.0, -w * l as f64))
            .sum()
    }

    /// Span in symbols covered by the taps.
    pub fn span_symbols(&self, sps: usize) -> usize {
        self.taps.len().div_ceil(sps)
    }
}

/// Rayleigh taps under an exponential power-delay profile whose RMS delay
/// spread is a quarter of the span, normalized to unit total power.
/// A one-symbol sparse span is the unit-tap (AWGN) channel.
pub fn draw_channel(profile: ChannelProfile, span_symbols: usize, sps: usize, seed: u64) -> ChannelRealization {
    let span = span_symbols.max(1);
    if profile == ChannelProfile::SymbolSparse && span == 1 {
        return ChannelRealization {
            seed,
            ..ChannelRealization::identity()
        };
    }
    let mut rng: SimRng = rng::stream(seed, &[]);
    let spread = span as f64 / 4.0;
    let taps: Vec<C64> = match profile {
        ChannelProfile::SymbolSparse => {
            let mut t = vec![C64::default(); (span - 1) * sps + 1];
            for k in 0..span {
                let p = (-(k as f64) / spread).exp();
                t[k * sps] = rng::complex_gaussian(&mut rng, p);
            }
            t
        }
        ChannelProfile::DenseExponential => (0..span * sps)
            .map(|l| {
                let p = (-(l as f64) / (spread * sps as f64)).exp();
                rng::complex_gaussian(&mut rng, p)
            })
            .collect(),
    };
    let norm = taps.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    ChannelRealization {
        taps: taps.into_iter().map(|t| t / norm).collect(),
        profile,
        seed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Variance per complex sample.
    pub n0: f64,
    pub seed: u64,
}

/// Linear convolution with the channel plus white Gaussian noise.
pub fn propagate(signal: &ComplexSignal, ch: &ChannelRealization, noise: &NoiseSpec) -> ComplexSignal {
    let mut samples = convolve(&signal.samples, &ch.taps);
    if noise.n0 > 0.0 {
        let mut rng: SimRng = rng::stream(noise.seed, &[]);
        for s in &mut samples {
            *s += rng::complex_gaussian(&mut rng, noise.n0);
        }
    }
    ComplexSignal {
        samples,
        sps: signal.sps,
        delay: signal.delay,
    }
}

/// Frequency grid of `n` points in `[-pi, pi)`.
pub fn frequency_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}
