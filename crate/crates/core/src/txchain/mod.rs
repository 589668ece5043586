//! Transmit chain: QAM mapping, cyclic block framing and RRC pulse shaping.

mod frame;
mod pulse;
mod qam;

pub use frame::{add_cyclic_extension, FrameLayout};
pub use pulse::{design_rrc, matched_filter, shape, PulseShape, DEFAULT_SPAN, DEFAULT_SPS};
pub use qam::{map_bits, QamAlphabet};
