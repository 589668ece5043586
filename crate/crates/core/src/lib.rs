//! Baseband single-carrier link simulator with nonlinear power amplifiers,
//! a fractionally-spaced FDE bank, symbol-rate post-distortion and a
//! distortion-aware combining detector.

pub mod analysis;
pub mod channel;
pub mod detect;
pub mod error;
pub mod fdebank;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod pa;
pub mod postdist;
pub mod rng;
pub mod signal;
pub mod txchain;

pub use error::{Error, Result};
pub use signal::{ComplexSignal, C64};
