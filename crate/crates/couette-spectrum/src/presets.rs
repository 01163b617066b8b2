//! Built-in scenarios. Each is a commented TOML file under `presets/`.

use crate::config::RunConfig;
use crate::error::AppError;

pub const PRESETS: [(&str, &str); 10] = [
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("table1", include_str!("../presets/table1.toml")),
    ("broadband", include_str!("../presets/broadband.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn preset(name: &str) -> Result<RunConfig, AppError> {
    let text = source(name).ok_or_else(|| {
        AppError::Config(format!(
            "unknown preset {name:?}; available: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    RunConfig::from_toml(text)
}
