use super::config::Scenario;
use crate::error::{Error, Result};

/// Built-in scenarios as `(name, document)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("saleh-awgn-desk", include_str!("../../presets/saleh-awgn-desk.toml")),
    ("saleh-air-desk", include_str!("../../presets/saleh-air-desk.toml")),
    ("gan-fading-desk", include_str!("../../presets/gan-fading-desk.toml")),
    ("saleh-awgn", include_str!("../../presets/saleh-awgn.toml")),
    ("saleh-air", include_str!("../../presets/saleh-air.toml")),
    ("gan-fading", include_str!("../../presets/gan-fading.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Result<Scenario> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::invalid(format!("unknown preset {name:?}")))?;
    Scenario::from_toml_str(text)
}
