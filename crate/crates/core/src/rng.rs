//! Deterministic per-purpose random streams.
//!
//! Every random quantity in a run is drawn from a stream keyed by the master
//! seed plus a path of integers (purpose, sweep point, trial, ...). Streams
//! never share state, so adding a consumer cannot perturb another one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::signal::C64;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(master: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, path))
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Stream purposes used by the harness.
pub mod purpose {
    pub const CALIBRATION: u64 = 1;
    pub const SLOW_TIME: u64 = 2;
    pub const CHANNEL: u64 = 3;
    pub const FT_SYMBOLS: u64 = 4;
    pub const DATA_SYMBOLS: u64 = 5;
    pub const FT_NOISE: u64 = 6;
    pub const DATA_NOISE: u64 = 7;
    pub const NN_INIT: u64 = 8;
    pub const GPR_SUBSAMPLE: u64 = 9;
}
