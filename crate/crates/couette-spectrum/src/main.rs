use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use couette_spectrum::run::{build_cache, load_config};
use couette_spectrum::{presets, run_scenario, AppError, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "couette-spectrum", version, about = "Continuous-spectrum Taylor-Couette amplitude evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario (see `couette-spectrum presets`).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rebuild kernel tables even when a cached copy matches.
        #[arg(long)]
        force_rebuild: bool,
        /// Continue an evolution from a snapshot file.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Build the kernel tables a scenario needs.
    Cache {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        force_rebuild: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the built-in scenarios.
    Presets,
    /// Print the commented TOML of a built-in scenario.
    Show { name: String },
}

fn config(source: &Source) -> Result<RunConfig, AppError> {
    match (&source.config, &source.preset) {
        (Some(p), _) => load_config(p),
        (_, Some(n)) => presets::preset(n),
        _ => Err(AppError::Config("need --config or --preset".into())),
    }
}

fn fail(e: &AppError) -> ExitCode {
    eprintln!("error: {e}");
    eprintln!("{}", serde_json::to_string(&e.record()).expect("record serializes"));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            source,
            out,
            force_rebuild,
            resume,
            threads,
        } => {
            let cfg = match config(&source) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let opts = RunOptions {
                out,
                force_rebuild,
                resume,
                threads,
            };
            match run_scenario(&cfg, &opts) {
                Ok(s) => {
                    for c in &s.cache {
                        let what = if c.hit { "cache-hit" } else { "built" };
                        println!("tables {what}: {}", c.path.display());
                    }
                    for p in &s.outputs {
                        println!("wrote {}", p.display());
                    }
                    println!("manifest {}", s.manifest.display());
                    ExitCode::SUCCESS
                }
                Err(f) => {
                    if let Some(m) = &f.manifest {
                        eprintln!("manifest {}", m.display());
                    }
                    fail(&f.error)
                }
            }
        }
        Command::Cache {
            source,
            force_rebuild,
            threads,
        } => {
            let res = config(&source).and_then(|c| build_cache(&c, force_rebuild, threads));
            match res {
                Ok(infos) => {
                    for c in infos {
                        let what = if c.hit { "cache-hit" } else { "built" };
                        println!("{what} {} (tables {})", c.path.display(), &c.tables_hash[..16]);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Presets => {
            for n in presets::names() {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::Show { name } => match presets::source(&name) {
            Some(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            None => fail(&AppError::Config(format!("unknown preset {name:?}"))),
        },
    }
}
