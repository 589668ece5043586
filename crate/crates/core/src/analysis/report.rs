use std::io::Write;

use rand::Rng;

use super::{bussgang_decompose, estimate_psd, SpectrumEstimate};
use crate::channel::{propagate, ChannelRealization, NoiseSpec};
use crate::error::Result;
use crate::pa::{set_backoff, PaModel};
use crate::rng;
use crate::signal::{ComplexSignal, C64};
use crate::txchain::{matched_filter, shape, PulseShape, QamAlphabet};

#[derive(Clone, Debug)]
pub struct SpectrumReportConfig {
    pub order: usize,
    pub pulse: PulseShape,
    pub pa: PaModel,
    /// Output backoff; ignored for PA models without a peak, which are
    /// driven at unit input power.
    pub backoff_db: f64,
    pub n_symbols: usize,
    pub segment_len: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct BranchSpectra {
    pub linear: SpectrumEstimate,
    pub distortion: SpectrumEstimate,
    /// PA output through the same filters, undecomposed.
    pub total: SpectrumEstimate,
}

#[derive(Clone, Debug)]
pub struct DistortionSpectrumReport {
    pub alpha: C64,
    pub input_scale: f64,
    pub branches: Vec<BranchSpectra>,
}

impl DistortionSpectrumReport {
    /// Columns `frequency, psd_linear_<i>, psd_distortion_<i>` per phase.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["frequency".to_string()];
        for i in 0..self.branches.len() {
            header.push(format!("psd_linear_{i}"));
            header.push(format!("psd_distortion_{i}"));
        }
        w.write_record(&header)?;
        let grid = &self.branches[0].linear.grid;
        for (k, f) in grid.iter().enumerate() {
            let mut row = vec![format!("{f:.6}")];
            for b in &self.branches {
                row.push(format!("{:.6e}", b.linear.psd[k]));
                row.push(format!("{:.6e}", b.distortion.psd[k]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Splits the PA output into `alpha x` and the uncorrelated residual, sends
/// each through the channel and matched filter, decimates every phase and
/// estimates both symbol-rate spectra.
pub fn distortion_spectrum_report(cfg: &SpectrumReportConfig, ch: &ChannelRealization) -> Result<DistortionSpectrumReport> {
    let alphabet = QamAlphabet::new(cfg.order)?;
    let mut r = rng::stream(cfg.seed, &[rng::purpose::DATA_SYMBOLS]);
    let syms: Vec<C64> = (0..cfg.n_symbols)
        .map(|_| alphabet.point(r.random_range(0..alphabet.order())))
        .collect();
    let x = shape(&syms, &cfg.pulse);
    let input_scale = if cfg.pa.peak_output().is_some() {
        set_backoff(&x, &cfg.pa, cfg.backoff_db)?.scale
    } else {
        1.0 / x.mean_power().sqrt()
    };
    let x = x.scaled(input_scale);
    let y = cfg.pa.apply(&x);
    let split = bussgang_decompose(&x, &y)?;
    let linear = x.samples.iter().map(|v| v * split.alpha).collect::<Vec<_>>();
    let linear = ComplexSignal {
        samples: linear,
        ..x.clone()
    };
    let quiet = NoiseSpec { n0: 0.0, seed: 0 };
    let through = |s: &ComplexSignal| matched_filter(&propagate(s, ch, &quiet), &cfg.pulse);
    let lin_rx = through(&linear);
    let dist_rx = through(&split.residual);
    let tot_rx = through(&y);
    let mu = cfg.pulse.sps;
    let guard = cfg.pulse.span + ch.span_symbols(mu);
    let count = cfg.n_symbols.saturating_sub(2 * guard);
    let phase = |s: &ComplexSignal, i: usize| -> Vec<C64> {
        (0..count).map(|n| s.samples[s.delay + (guard + n) * mu + i]).collect()
    };
    let branches = (0..mu)
        .map(|i| {
            Ok(BranchSpectra {
                linear: estimate_psd(&phase(&lin_rx, i), cfg.segment_len)?,
                distortion: estimate_psd(&phase(&dist_rx, i), cfg.segment_len)?,
                total: estimate_psd(&phase(&tot_rx, i), cfg.segment_len)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistortionSpectrumReport {
        alpha: split.alpha,
        input_scale,
        branches,
    })
}
