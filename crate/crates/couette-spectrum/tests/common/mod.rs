#![allow(dead_code)]

use std::path::Path;

use couette_spectrum::config::{Case, Scenario, Seed};
use couette_spectrum::presets;
use couette_spectrum::RunConfig;

/// A small, fast configuration: evolve a k = 1.5 wave on a coarse grid.
pub fn small(name: &str, cache: &Path, out: &Path) -> RunConfig {
    let mut c = presets::preset("fig2").unwrap();
    c.name = name.into();
    c.grid.n_points = 16;
    c.grid.k_max = 3.0;
    c.evolution.t_max = 2.0;
    c.evolution.sample_every = 20;
    c.evolution.snapshot_every = 50;
    c.scenario = Scenario::Evolve {
        cases: vec![Case {
            name: "wave".into(),
            seeds: vec![Seed {
                k: 1.5,
                density: 0.1,
                phase: 0.0,
            }],
            uniform: 0.0,
            background: 1e-5,
        }],
    };
    c.cache.dir = Some(cache.to_path_buf());
    c.output.dir = Some(out.to_path_buf());
    c
}

pub fn write_config(cfg: &RunConfig, path: &Path) {
    std::fs::write(path, cfg.to_toml()).unwrap();
}
