//! Experiment runner: scenario configs, seeded sweeps over backoff and
//! Es/N0, the receiver-variant matrix and CSV emission.

mod config;
mod link;
mod output;
mod presets;
mod receivers;
mod runner;

pub use config::{
    variant_label, ChannelConfig, Combining, GprSettings, NnSettings, PostdistorterKind, PostdistorterSpec, ReceiverConfig,
    Scenario, SpectrumSettings, SweepConfig, VolterraSettings, WaveformConfig,
};
pub use link::{block_branches, equalize_branch, random_indices, EqualizedBlocks, Link};
pub use output::{
    config_hash, emit_plotdata, plot_rows, read_results, write_run, Figure, MANIFEST_FILE, RESULTS_FILE, SCATTER_FILE,
    SPECTRUM_FILE, TIMING_FILE,
};
pub use presets::{preset, preset_names, PRESETS};
pub use receivers::{evaluate_postdistorter, receive_trial, slow_time_data, train_set, ReceivedTrial, SlowTimeData, TrainedSet, VariantOutcome};
pub use runner::{run_scenario, ResultRow, RunOutput, ScatterRow, TimingRow, TrainingRow, VariantFilter};
