//! Executes a run configuration and writes its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use couette_core::diagnostics::{
    perturbation_kinetic_energy, torque_envelope, torque_from_amplitudes, torque_ratio, TorqueReport,
    TorqueSample,
};
use couette_core::evolution::{
    evolve_with, selection_sweep, EquilibriumReport, EvolutionParams, SelectionOutcome, SpectrumState,
};
use couette_core::exec::Executor;
use couette_core::kernels::{KernelTables, TableOptions};
use couette_core::reduced::{gl_coefficients, landau_curve, meanflow_coupled_coefficients};
use couette_core::{FlowConfig, KGrid};
use num_complex::Complex64;
use serde::Serialize;

use crate::cache::{cache_dir, load_or_build, sha256_hex, CacheInfo};
use crate::config::{Case, RunConfig, Scenario};
use crate::error::{AppError, ErrorRecord};
use crate::exec::RayonExec;
use crate::output::{self, OutputDir, ReynoldsRow, TorqueRow};
use crate::snapshot::{Snapshot, SNAPSHOT_VERSION};

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub force_rebuild: bool,
    pub resume: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Hash of everything that determines the numbers a run produces.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.output = Default::default();
    c.cache = Default::default();
    sha256_hex(&serde_json::to_vec(&c).expect("config serializes"))
}

#[derive(Debug, Serialize)]
struct Timings {
    tables_seconds: f64,
    scenario_seconds: f64,
    total_seconds: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: &'a str,
    config: &'a RunConfig,
    threads: usize,
    resumed_from: Option<String>,
    cache: &'a [CacheInfo],
    notes: Vec<String>,
    timings: Timings,
    outputs: Vec<String>,
    status: &'static str,
    error: Option<ErrorRecord>,
}

/// What a run left behind.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub config_hash: String,
    pub manifest: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub cache: Vec<CacheInfo>,
}

/// Failure with the manifest that records it, when one could be written.
#[derive(Debug)]
pub struct RunFailure {
    pub error: AppError,
    pub manifest: Option<PathBuf>,
}

impl From<AppError> for RunFailure {
    fn from(error: AppError) -> Self {
        Self { error, manifest: None }
    }
}

struct Context {
    cache: Vec<CacheInfo>,
    notes: Vec<String>,
    tables_seconds: f64,
    resumed_from: Option<String>,
}

pub fn run_scenario(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, RunFailure> {
    let start = Instant::now();
    let hash = config_hash(cfg);
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output_dir());
    let mut out = OutputDir::new(dir, &hash);
    let mut ctx = Context {
        cache: Vec::new(),
        notes: Vec::new(),
        tables_seconds: 0.0,
        resumed_from: None,
    };
    let threads = opts.threads.unwrap_or_else(rayon::current_num_threads).max(1);
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Config(format!("thread pool: {e}")))
        .and_then(|pool| pool.install(|| execute(cfg, opts, &mut out, &mut ctx)));
    let scenario_seconds = start.elapsed().as_secs_f64() - ctx.tables_seconds;
    let manifest = Manifest {
        tool: "couette-spectrum",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        config: cfg,
        threads,
        resumed_from: ctx.resumed_from.clone(),
        cache: &ctx.cache,
        notes: ctx.notes.clone(),
        timings: Timings {
            tables_seconds: ctx.tables_seconds,
            scenario_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
        outputs: out.written.iter().map(|p| output::relative(&out.dir, p)).collect(),
        status: if result.is_ok() { "ok" } else { "error" },
        error: result.as_ref().err().map(AppError::record),
    };
    let written = out.write_json("manifest", &manifest);
    match (result, written) {
        (Ok(()), Ok(m)) => Ok(RunSummary {
            config_hash: hash,
            manifest: m,
            outputs: out.written.clone(),
            cache: ctx.cache,
        }),
        (Ok(()), Err(e)) => Err(RunFailure { error: e, manifest: None }),
        (Err(e), m) => Err(RunFailure {
            error: e,
            manifest: m.ok(),
        }),
    }
}

fn tables_for(cfg: &RunConfig, flow: &FlowConfig, opts: &RunOptions, ctx: &mut Context) -> Result<KernelTables, AppError> {
    let t0 = Instant::now();
    let dir = cache_dir(cfg.cache.dir.as_deref());
    let force = opts.force_rebuild || cfg.cache.force_rebuild;
    let (tables, info) = load_or_build(
        &dir,
        flow,
        &cfg.radial()?,
        &cfg.kgrid()?,
        TableOptions::default(),
        force,
        &RayonExec,
    )?;
    ctx.notes.push(format!(
        "kernel tables R = {}: {} ({})",
        flow.reynolds,
        if info.hit { "cache-hit" } else if force { "forced rebuild" } else { "built" },
        info.path.display()
    ));
    ctx.cache.push(info);
    ctx.tables_seconds += t0.elapsed().as_secs_f64();
    Ok(tables)
}

fn execute(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, ctx: &mut Context) -> Result<(), AppError> {
    cfg.validate()?;
    if opts.resume.is_some() && !matches!(cfg.scenario, Scenario::Evolve { .. }) {
        return Err(AppError::Config("--resume applies to evolve scenarios only".into()));
    }
    let flow = cfg.flow()?;
    let params = cfg.params();
    match &cfg.scenario {
        Scenario::Evolve { cases } => {
            let tables = tables_for(cfg, &flow, opts, ctx)?;
            run_evolve(cfg, opts, &flow, &tables, &params, cases, out, ctx)
        }
        Scenario::Landau { k_c } => {
            let tables = tables_for(cfg, &flow, opts, ctx)?;
            run_landau(&tables, *k_c, out)
        }
        Scenario::Selection {
            seeds,
            density,
            backgrounds,
        } => {
            let tables = tables_for(cfg, &flow, opts, ctx)?;
            run_selection(&tables, &params, seeds, *density, backgrounds, out)
        }
        Scenario::TorqueTable {
            k_f,
            density,
            background,
        } => {
            let tables = tables_for(cfg, &flow, opts, ctx)?;
            let rows = torque_rows(&tables, &flow, &params, k_f, *density, *background)?;
            let env = torque_envelope(&rows.iter().map(|r| r.torque).collect::<Vec<_>>());
            out.write_csv("table1", &output::TABLE1_HEADER, &output::table1_rows(&rows))?;
            out.write_json(
                "table1",
                &serde_json::json!({ "rows": rows, "envelope": env }),
            )?;
            Ok(())
        }
        Scenario::Reynolds {
            reynolds,
            k_seed,
            density,
            envelope_k_f,
        } => {
            let mut rows = Vec::new();
            for &re in reynolds {
                let f = flow.with_reynolds(re);
                let tables = tables_for(cfg, &f, opts, ctx)?;
                rows.push(reynolds_row(&tables, &f, &params, *k_seed, *density, envelope_k_f)?);
            }
            out.write_csv("fig7", &output::FIG7_HEADER, &output::fig7_rows(&rows))?;
            Ok(())
        }
    }
}

/// Initial state of a case. Seeds overwrite the constant level; a seed's
/// mirror gets the conjugate.
pub fn initial_state(kgrid: KGrid, case: &Case) -> Result<SpectrumState, AppError> {
    let level = if case.uniform > 0.0 { case.uniform } else { case.background };
    let mut s = SpectrumState::seeded(kgrid, &[], level)?;
    for seed in &case.seeds {
        let i = kgrid
            .index_of(seed.k)
            .ok_or_else(|| AppError::Config(format!("seed {} is not on the grid", seed.k)))?;
        let a = Complex64::from_polar(seed.density, seed.phase);
        s.amplitudes[i] = a;
        s.amplitudes[kgrid.mirror(i)] = a.conj();
    }
    if s.amplitudes[kgrid.half].im != 0.0 {
        return Err(AppError::Config("the k = 0 seed must be real".into()));
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct CaseResult<'a> {
    case: &'a str,
    report: EquilibriumReport,
    torque: Option<TorqueReport>,
    kinetic_energy: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_evolve(
    cfg: &RunConfig,
    opts: &RunOptions,
    flow: &FlowConfig,
    tables: &KernelTables,
    params: &EvolutionParams,
    cases: &[Case],
    out: &mut OutputDir,
    ctx: &mut Context,
) -> Result<(), AppError> {
    let hash = crate::cache::tables_hash(tables);
    let config_hash = config_hash(cfg);
    let resume = match &opts.resume {
        Some(p) => {
            let snap = Snapshot::read(p)?;
            snap.check_tables(&hash)?;
            if !cases.iter().any(|c| c.name == snap.case) {
                return Err(AppError::Config(format!("snapshot case {:?} is not in this config", snap.case)));
            }
            if snap.state.kgrid != tables.kgrid {
                return Err(AppError::Cache("snapshot k-grid differs from the tables".into()));
            }
            ctx.resumed_from = Some(p.display().to_string());
            Some(snap)
        }
        None => None,
    };
    let mut results = Vec::new();
    for case in cases {
        let initial = match &resume {
            Some(s) if s.case == case.name => s.state.clone(),
            Some(_) => continue,
            None => initial_state(tables.kgrid, case)?,
        };
        let sample = cfg.evolution.sample_every;
        let snap_every = cfg.evolution.snapshot_every;
        let snap_path = out.path(&format!("snapshot-{}", case.name), "json");
        let make_snapshot = |state: &SpectrumState| Snapshot {
            format_version: SNAPSHOT_VERSION,
            config_hash: config_hash.clone(),
            tables_hash: hash.clone(),
            case: case.name.clone(),
            params: params.clone(),
            state: state.clone(),
        };
        let mut rows = Vec::new();
        output::trajectory_rows(&initial, &mut rows);
        let mut io_error: Option<AppError> = None;
        let outcome = evolve_with(initial, tables, params, |s| {
            if s.step % sample == 0 {
                output::trajectory_rows(s, &mut rows);
            }
            if s.step % snap_every == 0 {
                if let Err(e) = make_snapshot(s).write(&snap_path) {
                    io_error = Some(e);
                    return Err(couette_core::Error::Dependency("snapshot could not be written".into()));
                }
            }
            Ok(())
        });
        if let Some(e) = io_error {
            return Err(e);
        }
        let (last, report) = outcome?;
        if last.step % sample != 0 || rows.last().map(|r| r.0) != Some(last.t) {
            output::trajectory_rows(&last, &mut rows);
        }
        make_snapshot(&last).write(&snap_path)?;
        if !out.written.contains(&snap_path) {
            out.written.push(snap_path.clone());
        }
        out.write_csv(&format!("trajectory-{}", case.name), &output::TRAJECTORY_HEADER, &rows)?;
        let has_wave = report.amplitudes.iter().skip(tables.kgrid.half + 1).any(|&a| a > 0.0);
        let torque = if has_wave { Some(torque_ratio(&report, tables, flow)?) } else { None };
        let kinetic_energy = if has_wave {
            Some(perturbation_kinetic_energy(&report, &tables.kgrid)?)
        } else {
            None
        };
        results.push(CaseResult {
            case: &case.name,
            report,
            torque,
            kinetic_energy,
        });
    }
    out.write_json("equilibria", &results)?;
    Ok(())
}

fn run_landau(tables: &KernelTables, k_c: f64, out: &mut OutputDir) -> Result<(), AppError> {
    let curve = landau_curve(tables);
    out.write_csv("fig1", &output::FIG1_HEADER, &output::fig1_rows(&curve))?;
    let gl = gl_coefficients(tables, k_c)?;
    let coupled = meanflow_coupled_coefficients(tables, gl.k_c)?;
    let equilibrium = coupled.equilibrium().ok();
    out.write_json(
        "reduced",
        &serde_json::json!({
            "ginzburg_landau": gl,
            "mean_flow_coupled": coupled,
            "mean_flow_coupled_equilibrium": equilibrium,
        }),
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct BandSummary {
    background: f64,
    stable_seeds: Vec<f64>,
    band: Option<(f64, f64)>,
}

fn run_selection(
    tables: &KernelTables,
    params: &EvolutionParams,
    seeds: &[f64],
    density: f64,
    backgrounds: &[f64],
    out: &mut OutputDir,
) -> Result<(), AppError> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &bg in backgrounds {
        let sweep = selection_sweep(tables, params, seeds, density, bg, &RayonExec)?;
        let stable: Vec<f64> = sweep
            .iter()
            .filter(|r| r.outcome == SelectionOutcome::StableAsSeeded)
            .map(|r| r.seed)
            .collect();
        let band = stable.first().zip(stable.last()).map(|(a, b)| (*a, *b));
        rows.extend(output::fig4_rows(bg, &sweep));
        summary.push(BandSummary {
            background: bg,
            stable_seeds: stable,
            band,
        });
    }
    out.write_csv("fig4", &output::FIG4_HEADER, &rows)?;
    out.write_json("selection", &summary)?;
    Ok(())
}

/// Seeds each `k_f`, evolves to equilibrium and evaluates the torque at the
/// final dominant wavenumber.
pub fn torque_rows(
    tables: &KernelTables,
    flow: &FlowConfig,
    params: &EvolutionParams,
    k_f: &[f64],
    density: f64,
    background: f64,
) -> Result<Vec<TorqueRow>, AppError> {
    let rows = RayonExec.map(k_f.len(), |i| -> Result<TorqueRow, AppError> {
        let init = SpectrumState::seeded(tables.kgrid, &[(k_f[i], density)], background)?;
        let (_, report) = evolve_with(init, tables, params, |_| Ok(()))?;
        Ok(TorqueRow {
            seed: k_f[i],
            torque: torque_ratio(&report, tables, flow)?,
            amplitude: report.amplitude_at(&tables.kgrid, report.dominant_k).unwrap_or(0.0),
            mean_flow: report.mean_flow,
            kinetic_energy: perturbation_kinetic_energy(&report, &tables.kgrid)?,
            residual: report.residual,
        })
    });
    rows.into_iter().collect()
}

fn reynolds_row(
    tables: &KernelTables,
    flow: &FlowConfig,
    params: &EvolutionParams,
    k_seed: f64,
    density: f64,
    envelope_k_f: &[f64],
) -> Result<ReynoldsRow, AppError> {
    let kg = tables.kgrid;
    let init = SpectrumState::seeded(kg, &[(k_seed, density)], 0.0)?;
    let (_, report) = evolve_with(init, tables, params, |_| Ok(()))?;
    let wave = report.amplitude_at(&kg, k_seed).unwrap_or(0.0);
    let torque = torque_from_amplitudes(tables, flow, k_seed, report.mean_flow, wave)?;
    let unstable: Vec<f64> = envelope_k_f
        .iter()
        .copied()
        .filter(|&k| kg.index_of(k).is_some_and(|i| tables.a[i] > 0.0))
        .collect();
    let env_rows = torque_rows(tables, flow, params, &unstable, density, 0.0)?;
    let envelope = torque_envelope(&env_rows.iter().map(|r| r.torque).collect::<Vec<_>>())
        .unwrap_or((torque.ratio, torque.ratio));
    Ok(ReynoldsRow {
        sample: TorqueSample {
            reynolds: flow.reynolds,
            k_f: k_seed,
            amplitude: wave,
            torque,
        },
        envelope,
    })
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&text)
}

/// Builds (or confirms) every kernel table a config needs without running it.
pub fn build_cache(cfg: &RunConfig, force_rebuild: bool, threads: Option<usize>) -> Result<Vec<CacheInfo>, AppError> {
    cfg.validate()?;
    let flow = cfg.flow()?;
    let flows: Vec<FlowConfig> = match &cfg.scenario {
        Scenario::Reynolds { reynolds, .. } => reynolds.iter().map(|&r| flow.with_reynolds(r)).collect(),
        _ => vec![flow],
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or_else(rayon::current_num_threads).max(1))
        .build()
        .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
    let opts = RunOptions {
        force_rebuild,
        ..Default::default()
    };
    let mut ctx = Context {
        cache: Vec::new(),
        notes: Vec::new(),
        tables_seconds: 0.0,
        resumed_from: None,
    };
    pool.install(|| -> Result<(), AppError> {
        for f in &flows {
            tables_for(cfg, f, &opts, &mut ctx)?;
        }
        Ok(())
    })?;
    Ok(ctx.cache)
}
