//! Built-in scenarios reproducing the published figures, plus a small chain
//! for the oracle suite and regression baselines.

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};

pub const PRESETS: [(&str, &str); 4] = [
    ("small", include_str!("../presets/small.toml")),
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown preset {name:?}; available: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    ScenarioConfig::from_toml(text)
}
