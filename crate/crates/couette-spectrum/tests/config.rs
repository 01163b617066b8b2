use couette_spectrum::config::{Scenario, Seed};
use couette_spectrum::presets;
use couette_spectrum::run::config_hash;
use couette_spectrum::{AppError, RunConfig};

#[test]
fn every_preset_parses_and_round_trips() {
    for name in presets::names() {
        let cfg = presets::preset(name).unwrap();
        assert_eq!(cfg.name, name);
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg, "{name}");
        assert_eq!(config_hash(&back), config_hash(&cfg));
    }
}

#[test]
fn presets_use_the_reference_protocol() {
    for name in presets::names() {
        let c = presets::preset(name).unwrap();
        assert_eq!((c.flow.eta, c.flow.mu, c.flow.reynolds), (0.5, 0.0, 88.1));
        assert_eq!((c.grid.k_max, c.grid.dk), (12.0, 0.25));
        assert_eq!(c.evolution.dt, 0.01);
    }
    match presets::preset("fig2").unwrap().scenario {
        Scenario::Evolve { cases } => assert_eq!(cases[0].seeds[0], Seed { k: 3.0, density: 0.125, phase: 0.0 }),
        _ => panic!("fig2 evolves"),
    }
    match presets::preset("fig3").unwrap().scenario {
        Scenario::Evolve { cases } => assert_eq!(cases[0].background, 1e-5),
        _ => panic!("fig3 evolves"),
    }
}

#[test]
fn presets_are_commented() {
    for name in presets::names() {
        let src = presets::source(name).unwrap();
        assert!(src.lines().next().unwrap().starts_with('#'), "{name}");
        assert!(src.lines().filter(|l| l.starts_with('#')).count() >= 4, "{name}");
    }
}

#[test]
fn unknown_preset_is_a_config_error() {
    let e = presets::preset("fig9").unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

fn edited(f: impl FnOnce(&mut RunConfig)) -> Result<(), AppError> {
    let mut c = presets::preset("fig2").unwrap();
    f(&mut c);
    RunConfig::from_toml(&c.to_toml()).map(|_| ())
}

#[test]
fn invalid_configs_are_rejected() {
    type Edit = Box<dyn FnOnce(&mut RunConfig)>;
    let cases: Vec<Edit> = vec![
        Box::new(|c| c.flow.eta = 1.2),
        Box::new(|c| c.grid.dk = 0.35),
        Box::new(|c| c.evolution.dt = -1.0),
        Box::new(|c| c.evolution.sample_every = 0),
        Box::new(|c| c.name = "bad name".into()),
        Box::new(|c| {
            if let Scenario::Evolve { cases } = &mut c.scenario {
                cases[0].seeds[0].k = 3.1;
            }
        }),
        Box::new(|c| {
            if let Scenario::Evolve { cases } = &mut c.scenario {
                cases[0].seeds[0].density = -0.1;
            }
        }),
        Box::new(|c| {
            if let Scenario::Evolve { cases } = &mut c.scenario {
                cases[0].uniform = 0.1;
                cases[0].background = 1e-5;
            }
        }),
    ];
    for f in cases {
        let e = edited(f).unwrap_err();
        assert!(matches!(e, AppError::Config(_)), "{e}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let text = format!("{}\nunknown = 1\n", presets::source("fig2").unwrap().replace("name = \"fig2\"", "name = \"fig2\"\ncolour = 3"));
    assert!(matches!(RunConfig::from_toml(&text), Err(AppError::Config(_))));
}

#[test]
fn hash_ignores_output_and_cache_locations() {
    let a = presets::preset("fig2").unwrap();
    let mut b = a.clone();
    b.output.dir = Some("elsewhere".into());
    b.cache.dir = Some("cache".into());
    assert_eq!(config_hash(&a), config_hash(&b));
    b.flow.reynolds = 90.0;
    assert_ne!(config_hash(&a), config_hash(&b));
}
