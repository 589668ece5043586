//! Waveform-level link: framing, pulse shaping, PA drive, channel, matched
//! filtering and per-branch equalization.

use rand::Rng;

use crate::channel::{propagate, ChannelRealization, NoiseSpec};
use crate::error::{Error, Result};
use crate::fdebank::{ls_estimate, FdeFilter, SymbolRateCsi};
use crate::pa::{set_backoff, PaModel};
use crate::rng::{self, SimRng};
use crate::signal::{mean_power, ComplexSignal, C64};
use crate::txchain::{add_cyclic_extension, matched_filter, shape, FrameLayout, PulseShape, QamAlphabet};

/// Symbols used to calibrate the PA drive.
const CALIBRATION_SYMBOLS: usize = 1 << 15;

/// Uniform random symbol indices.
pub fn random_indices(alphabet: &QamAlphabet, n: usize, rng: &mut SimRng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..alphabet.order())).collect()
}

/// Transmitter and receiver front end at one PA operating point.
#[derive(Clone, Debug)]
pub struct Link {
    pub alphabet: QamAlphabet,
    pub pulse: PulseShape,
    pub pa: PaModel,
    pub layout: FrameLayout,
    pub input_scale: f64,
    /// Mean PA output power per sample.
    pub output_power: f64,
    /// Achieved output backoff, when the PA saturates.
    pub backoff_db: Option<f64>,
    /// Mean power per sample of the unscaled shaped calibration signal.
    shaped_power: f64,
}

impl Link {
    /// Sets the PA drive for `backoff_db` on a calibration waveform drawn
    /// from `seed`. A PA without saturation is driven at unit output power.
    pub fn calibrate(
        alphabet: QamAlphabet,
        pulse: PulseShape,
        pa: PaModel,
        layout: FrameLayout,
        backoff_db: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let mut r = rng::stream(seed, &[rng::purpose::CALIBRATION]);
        let idx = random_indices(&alphabet, CALIBRATION_SYMBOLS, &mut r);
        let x = shape(&alphabet.map_indices(&idx), &pulse);
        let shaped_power = x.mean_power();
        let (input_scale, achieved) = match (backoff_db, pa.peak_output()) {
            (Some(target), Some(_)) => {
                let s = set_backoff(&x, &pa, target)?;
                (s.scale, Some(s.backoff_db))
            }
            (None, None) => (1.0 / shaped_power.sqrt(), None),
            (Some(_), None) => return Err(Error::invalid("backoff requested for a PA without saturation")),
            (None, Some(_)) => return Err(Error::invalid("a saturating PA needs a backoff")),
        };
        let output_power = mean_power(&pa.apply_samples(&x.scaled(input_scale).samples));
        Ok(Self {
            alphabet,
            pulse,
            pa,
            layout,
            input_scale,
            output_power,
            backoff_db: achieved,
            shaped_power,
        })
    }

    /// A linear PA delivering the same mean output power.
    pub fn linear_twin(&self) -> Self {
        Self {
            pa: PaModel::Linear {},
            input_scale: (self.output_power / self.shaped_power).sqrt(),
            backoff_db: None,
            ..self.clone()
        }
    }

    pub fn sps(&self) -> usize {
        self.pulse.sps
    }

    /// Received energy per symbol at the matched-filter output.
    pub fn symbol_energy(&self) -> f64 {
        self.output_power * self.sps() as f64
    }

    /// Noise variance per sample giving `snr_db` of Es/N0.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        self.symbol_energy() / 10f64.powf(snr_db / 10.0)
    }

    /// Cyclically extends every block, concatenates them, shapes and
    /// amplifies. Returns the PA output and each block's first data symbol
    /// position within the frame.
    pub fn transmit(&self, blocks: &[Vec<C64>]) -> Result<(ComplexSignal, Vec<usize>)> {
        let mut frame = Vec::new();
        let mut offsets = Vec::with_capacity(blocks.len());
        for b in blocks {
            offsets.push(frame.len() + self.layout.n_cp);
            frame.extend(add_cyclic_extension(b, &self.layout)?);
        }
        let x = shape(&frame, &self.pulse).scaled(self.input_scale);
        Ok((self.pa.apply(&x), offsets))
    }

    /// Channel, noise and matched filter.
    pub fn receive(&self, tx: &ComplexSignal, ch: &ChannelRealization, noise: &NoiseSpec) -> ComplexSignal {
        matched_filter(&propagate(tx, ch, noise), &self.pulse)
    }
}

/// `out[i][n]` is the matched-filter sample of symbol `offset + n` at
/// sampling phase `i`.
pub fn block_branches(mf: &ComplexSignal, offset: usize, len: usize) -> Result<Vec<Vec<C64>>> {
    let mu = mf.sps;
    let start = mf.delay + offset * mu;
    let needed = start + len * mu;
    if needed > mf.len() {
        return Err(Error::InsufficientSamples {
            needed,
            available: mf.len(),
        });
    }
    Ok((0..mu)
        .map(|i| (0..len).map(|n| mf.samples[start + n * mu + i]).collect())
        .collect())
}

/// One branch's equalized training and data blocks.
#[derive(Clone, Debug)]
pub struct EqualizedBlocks {
    pub csi: SymbolRateCsi,
    pub training: Vec<C64>,
    pub data: Vec<Vec<C64>>,
}

/// Estimates the branch CSI from the known training block, then equalizes
/// the training block and every data block with regularization `delta`.
pub fn equalize_branch(
    training_rx: &[C64],
    training: &[C64],
    data_rx: &[Vec<C64>],
    l_b: usize,
    l_f: usize,
    delta: f64,
) -> Result<EqualizedBlocks> {
    let csi = ls_estimate(training, training_rx, l_b, l_f)?;
    let ft = FdeFilter::new(&csi, training.len(), delta)?;
    let training_z = ft.apply(training_rx)?;
    let mut cache: Option<FdeFilter> = None;
    let mut data = Vec::with_capacity(data_rx.len());
    for block in data_rx {
        if cache.as_ref().is_none_or(|f| f.len() != block.len()) {
            cache = Some(FdeFilter::new(&csi, block.len(), delta)?);
        }
        data.push(cache.as_ref().expect("filter built").apply(block)?);
    }
    Ok(EqualizedBlocks {
        csi,
        training: training_z,
        data,
    })
}
