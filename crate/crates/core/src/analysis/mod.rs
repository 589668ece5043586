//! Bussgang decomposition, spectral analysis of the linear and distortion
//! terms after decimation, per-phase effective channels and the
//! neighbor-dependence probe for nonlinear ISI.

mod bussgang;
mod effective;
mod isi;
mod psd;
mod report;

pub use bussgang::{bussgang_decompose, BussgangSplit};
pub use effective::{effective_channel, EffectiveChannel};
pub use isi::{nonlinear_isi_probe, IsiBinning, IsiScores};
pub use psd::{estimate_psd, SpectrumEstimate};
pub use report::{distortion_spectrum_report, BranchSpectra, DistortionSpectrumReport, SpectrumReportConfig};
