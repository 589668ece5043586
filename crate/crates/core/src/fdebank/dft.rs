use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::signal::C64;

/// DFT scaled by `1/sqrt(n)` in both directions.
#[derive(Clone)]
pub struct UnitaryDft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "UnitaryDft({})", self.len())
    }
}

impl UnitaryDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `v <- Q^H v`, bin `k` holding `n^{-1/2} sum_m v_m e^{-j 2 pi k m / n}`.
    pub fn forward(&self, v: &mut [C64]) {
        self.forward.process(v);
        v.iter_mut().for_each(|x| *x *= self.scale);
    }

    /// `v <- Q v`.
    pub fn inverse(&self, v: &mut [C64]) {
        self.inverse.process(v);
        v.iter_mut().for_each(|x| *x *= self.scale);
    }
}
