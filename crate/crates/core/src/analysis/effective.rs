use std::f64::consts::PI;

use crate::signal::C64;
use crate::txchain::PulseShape;

/// Symbol-rate transfer function seen by each decimation phase.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveChannel {
    /// Symbol-rate angular frequencies.
    pub grid: Vec<f64>,
    /// `branches[i][k]` for decimation phase `i` at `grid[k]`.
    pub branches: Vec<Vec<C64>>,
}

impl EffectiveChannel {
    /// Index of the smallest-magnitude bin of phase `branch` and its depth in
    /// dB relative to the mean power over the grid.
    pub fn deepest_fade(&self, branch: usize) -> (usize, f64) {
        let r = &self.branches[branch];
        let mean = r.iter().map(|v| v.norm_sqr()).sum::<f64>() / r.len() as f64;
        let (k, v) = r
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("non-empty grid");
        (k, 10.0 * (v.norm_sqr() / mean).log10())
    }
}

/// Alias sum `(alpha/mu) sum_k H(w_k) |P(w_k)|^2 e^{j w_k i}` with
/// `w_k = (w - 2 pi k) / mu`, for each phase `i` in `0..mu`.
///
/// `taps` is the sample-rate channel starting at lag 0.
pub fn effective_channel(taps: &[C64], pulse: &PulseShape, alpha: C64, grid: &[f64]) -> EffectiveChannel {
    let mu = pulse.sps;
    let channel = |w: f64| -> C64 {
        taps.iter()
            .enumerate()
            .map(|(l, &h)| h * C64::from_polar(1.0, -w * l as f64))
            .sum()
    };
    let branches = (0..mu)
        .map(|i| {
            grid.iter()
                .map(|&w| {
                    let sum: C64 = (0..mu)
                        .map(|k| {
                            let wk = (w - 2.0 * PI * k as f64) / mu as f64;
                            channel(wk) * pulse.response(wk).norm_sqr() * C64::from_polar(1.0, wk * i as f64)
                        })
                        .sum();
                    alpha * sum / mu as f64
                })
                .collect()
        })
        .collect();
    EffectiveChannel {
        grid: grid.to_vec(),
        branches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, frequency_grid, propagate, ChannelProfile, NoiseSpec};
    use crate::fdebank::{split_branches, UnitaryDft};
    use crate::txchain::{add_cyclic_extension, design_rrc, matched_filter, shape, FrameLayout};

    fn pulse() -> PulseShape {
        design_rrc(0.3, 20, 4).unwrap()
    }

    #[test]
    fn unit_tap_is_flat_at_nominal_phase() {
        let p = pulse();
        let alpha = C64::new(0.8, 0.3);
        let e = effective_channel(&[C64::new(1.0, 0.0)], &p, alpha, &frequency_grid(64));
        for v in &e.branches[0] {
            assert!((v - alpha).norm() < 2e-3);
        }
    }

    #[test]
    fn symbol_sparse_factorizes() {
        let p = pulse();
        let mu = p.sps;
        let ch = draw_channel(ChannelProfile::SymbolSparse, 6, mu, 4);
        let grid = frequency_grid(64);
        let e = effective_channel(&ch.taps, &p, C64::new(1.0, 0.0), &grid);
        let flat = effective_channel(&[C64::new(1.0, 0.0)], &p, C64::new(1.0, 0.0), &grid);
        for i in 0..mu {
            for (k, &w) in grid.iter().enumerate() {
                // Symbol-rate response of the sparse taps.
                let hs: C64 = (0..6)
                    .map(|m| ch.taps[m * mu] * C64::from_polar(1.0, -w * m as f64))
                    .sum();
                assert!((e.branches[i][k] - hs * flat.branches[i][k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_average_at_dc_is_cascade_gain() {
        let p = pulse();
        let ch = draw_channel(ChannelProfile::DenseExponential, 16, 4, 9);
        let alpha = C64::new(0.7, -0.2);
        let e = effective_channel(&ch.taps, &p, alpha, &[0.0]);
        let mean: C64 = e.branches.iter().map(|b| b[0]).sum::<C64>() / 4.0;
        let dc = alpha * ch.response(0.0) * p.response(0.0).norm_sqr() / 4.0;
        assert!((mean - dc).norm() < 1e-6);
    }

    /// Constant-modulus periodic pilot pushed through the waveform chain;
    /// the ratio of output and input DFTs over one period is the transfer
    /// function of each phase.
    #[test]
    fn matches_pilot_sweep() {
        let p = pulse();
        let mu = p.sps;
        let n = 64;
        let pilot: Vec<C64> = (0..n)
            .map(|m| C64::from_polar(1.0, -std::f64::consts::PI * (m * m) as f64 / n as f64))
            .collect();
        let layout = FrameLayout {
            n_d: n,
            n_cp: n,
            n_cs: n,
            n_f: n,
            n_s: n,
        };
        let ch = draw_channel(ChannelProfile::DenseExponential, 16, mu, 21);
        let tx = shape(&add_cyclic_extension(&pilot, &layout).unwrap(), &p);
        let rx = matched_filter(&propagate(&tx, &ch, &NoiseSpec { n0: 0.0, seed: 0 }), &p);
        let branches = split_branches(&rx, n, n).unwrap();
        let dft = UnitaryDft::new(n);
        let mut pf = pilot.clone();
        dft.forward(&mut pf);
        let grid: Vec<f64> = (0..n).map(|k| 2.0 * std::f64::consts::PI * k as f64 / n as f64).collect();
        let e = effective_channel(&ch.taps, &p, C64::new(1.0, 0.0), &grid);
        for i in 0..mu {
            let mut yf = branches.streams[i].clone();
            dft.forward(&mut yf);
            let scale = e.branches[i].iter().map(|v| v.norm()).fold(0.0, f64::max);
            for k in 0..n {
                let measured = yf[k] / pf[k];
                let err = (measured - e.branches[i][k]).norm() / scale;
                assert!(err < 0.02, "phase {i} bin {k}: {err}");
            }
        }
    }
}
