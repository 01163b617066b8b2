//! Run configuration and its TOML form.

use std::path::PathBuf;

use couette_core::evolution::EvolutionParams;
use couette_core::{FlowConfig, KGrid, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub flow: FlowSection,
    pub grid: GridSection,
    pub evolution: EvolutionSection,
    pub scenario: Scenario,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub cache: CacheSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub eta: f64,
    pub mu: f64,
    pub reynolds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Radial collocation points, walls included.
    pub n_points: usize,
    pub k_max: f64,
    pub dk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub equil_tol: f64,
    pub t_max: f64,
    /// Steps between persisted snapshots.
    pub snapshot_every: u64,
    /// Steps between trajectory rows.
    pub sample_every: u64,
    /// Times a step may be halved when its fixed-point iteration fails.
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub max_halvings: u32,
}

fn is_zero_u32(x: &u32) -> bool {
    *x == 0
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let p = EvolutionParams::default();
        Self {
            dt: p.dt,
            picard_tol: p.picard_tol,
            picard_max: p.picard_max,
            equil_tol: p.equil_tol,
            t_max: p.t_max,
            snapshot_every: p.snapshot_every,
            sample_every: 100,
            max_halvings: p.max_halvings,
        }
    }
}

/// A seeded wavenumber; the mirror `-k` gets the conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seed {
    pub k: f64,
    pub density: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub phase: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// One initial condition: seeds on top of either a uniform broad-band
/// density or a background noise level (both constant in k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub name: String,
    #[serde(default)]
    pub seeds: Vec<Seed>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub uniform: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub background: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    /// Evolve each case to equilibrium and write its trajectory.
    Evolve { cases: Vec<Case> },
    /// Monochromatic equilibria over the grid and the reduced models at `k_c`.
    Landau { k_c: f64 },
    /// Single-seed runs at every seed and every background level.
    Selection {
        seeds: Vec<f64>,
        density: f64,
        backgrounds: Vec<f64>,
    },
    /// Equilibrium torque for each seeded `k_f`.
    TorqueTable {
        k_f: Vec<f64>,
        density: f64,
        #[serde(default)]
        background: f64,
    },
    /// Torque at `k_seed` against Reynolds number, with the envelope over
    /// the `envelope_k_f` equilibria that are linearly unstable.
    Reynolds {
        reynolds: Vec<f64>,
        k_seed: f64,
        density: f64,
        envelope_k_f: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Defaults to `out/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CacheSection {
    /// Overridden by the `COUETTE_SPECTRUM_CACHE` environment variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub force_rebuild: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        let cfg: Self = toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn flow(&self) -> Result<FlowConfig, AppError> {
        Ok(FlowConfig::new(self.flow.eta, self.flow.mu, self.flow.reynolds)?)
    }

    pub fn kgrid(&self) -> Result<KGrid, AppError> {
        Ok(KGrid::new(self.grid.k_max, self.grid.dk)?)
    }

    pub fn radial(&self) -> Result<RadialGrid, AppError> {
        let f = self.flow()?;
        Ok(RadialGrid::new(self.grid.n_points, f.r_inner(), f.r_outer())?)
    }

    pub fn params(&self) -> EvolutionParams {
        let e = &self.evolution;
        EvolutionParams {
            dt: e.dt,
            picard_tol: e.picard_tol,
            picard_max: e.picard_max,
            equil_tol: e.equil_tol,
            t_max: e.t_max,
            snapshot_every: e.snapshot_every,
            max_halvings: e.max_halvings,
            mask: None,
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    /// Checks everything that can be checked without building tables.
    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |m: String| Err(AppError::Config(m));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return bad(format!("name {:?} must be non-empty [A-Za-z0-9_-]", self.name));
        }
        self.flow()?;
        let kg = self.kgrid()?;
        self.radial()?;
        let e = &self.evolution;
        if e.sample_every == 0 || e.snapshot_every == 0 {
            return bad("sample_every and snapshot_every must be at least 1".into());
        }
        if !(e.dt > 0.0 && e.picard_tol > 0.0 && e.equil_tol > 0.0 && e.t_max >= 0.0 && e.picard_max > 0) {
            return bad("evolution parameters must be positive".into());
        }
        let on_grid = |k: f64, what: &str| -> Result<(), AppError> {
            if kg.index_of(k).is_none() {
                return bad(format!("{what} wavenumber {k} is not on the k-grid"));
            }
            Ok(())
        };
        let density = |d: f64, what: &str| -> Result<(), AppError> {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("{what} density {d} must be finite and non-negative"));
            }
            Ok(())
        };
        match &self.scenario {
            Scenario::Evolve { cases } => {
                if cases.is_empty() {
                    return bad("evolve scenario needs at least one case".into());
                }
                let mut names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
                names.sort_unstable();
                names.dedup();
                if names.len() != cases.len() {
                    return bad("case names must be unique".into());
                }
                for c in cases {
                    if c.name.is_empty() || !c.name.chars().all(|x| x.is_ascii_alphanumeric() || x == '-' || x == '_') {
                        return bad(format!("case name {:?} must be non-empty [A-Za-z0-9_-]", c.name));
                    }
                    density(c.uniform, "uniform")?;
                    density(c.background, "background")?;
                    if c.uniform > 0.0 && c.background > 0.0 {
                        return bad(format!("case {}: set either uniform or background, not both", c.name));
                    }
                    for s in &c.seeds {
                        on_grid(s.k, "seed")?;
                        density(s.density, "seed")?;
                        if !s.phase.is_finite() {
                            return bad(format!("seed phase {} must be finite", s.phase));
                        }
                    }
                }
            }
            Scenario::Landau { k_c } => {
                if !(k_c.is_finite() && *k_c > 0.0 && *k_c < kg.k_max()) {
                    return bad(format!("k_c = {k_c} must lie inside (0, k_max)"));
                }
            }
            Scenario::Selection {
                seeds,
                density: d,
                backgrounds,
            } => {
                density(*d, "seed")?;
                for &s in seeds {
                    on_grid(s, "seed")?;
                }
                for &b in backgrounds {
                    density(b, "background")?;
                }
            }
            Scenario::TorqueTable {
                k_f,
                density: d,
                background,
            } => {
                density(*d, "seed")?;
                density(*background, "background")?;
                for &k in k_f {
                    on_grid(k, "k_f")?;
                }
            }
            Scenario::Reynolds {
                reynolds,
                k_seed,
                density: d,
                envelope_k_f,
            } => {
                density(*d, "seed")?;
                on_grid(*k_seed, "k_seed")?;
                for &k in envelope_k_f {
                    on_grid(k, "envelope")?;
                }
                if reynolds.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return bad("Reynolds numbers must be finite and non-negative".into());
                }
            }
        }
        Ok(())
    }
}
