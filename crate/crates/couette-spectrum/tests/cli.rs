mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{small, write_config};
use couette_spectrum::config::Scenario;
use couette_spectrum::run::config_hash;
use couette_spectrum::snapshot::Snapshot;
use couette_spectrum::RunConfig;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_couette-spectrum"));
    c.env_remove("COUETTE_SPECTRUM_CACHE");
    c
}

fn run(cfg_path: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(cfg_path).args(extra).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir).map(|d| d.map(|e| e.unwrap().path()).collect()).unwrap_or_default();
    v.sort();
    v
}

fn manifest(dir: &Path, cfg: &RunConfig) -> serde_json::Value {
    let p = dir.join(format!("manifest-{}.json", &config_hash(cfg)[..16]));
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

struct Dirs {
    _root: tempfile::TempDir,
    cache: PathBuf,
    out: PathBuf,
    cfg: PathBuf,
}

fn dirs() -> Dirs {
    let root = tempfile::tempdir().unwrap();
    let cache = root.path().join("cache");
    let out = root.path().join("out");
    let cfg = root.path().join("run.toml");
    Dirs {
        _root: root,
        cache,
        out,
        cfg,
    }
}

#[test]
fn run_writes_hashed_artifacts_and_a_manifest() {
    let d = dirs();
    let cfg = small("wave", &d.cache, &d.out);
    write_config(&cfg, &d.cfg);
    let o = run(&d.cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h = &config_hash(&cfg)[..16];
    let out = files(&d.out);
    assert_eq!(out.len(), 4);
    for p in &out {
        assert!(p.file_name().unwrap().to_str().unwrap().contains(h), "{p:?}");
    }
    let m = manifest(&d.out, &cfg);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config_hash"], config_hash(&cfg));
    assert!(m["error"].is_null());
    assert_eq!(m["cache"][0]["hit"], false);
    assert_eq!(serde_json::from_value::<RunConfig>(m["config"].clone()).unwrap(), cfg);

    let csv = fs::read_to_string(d.out.join(format!("trajectory-wave-{h}.csv"))).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,k,re_A,im_A,amplitude"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 1e-5, 0.0, 1e-5 * 0.25]);

    // Second run reuses the tables and says so.
    let o = run(&d.cfg, &[]);
    assert_eq!(code(&o), 0);
    let m = manifest(&d.out, &cfg);
    assert_eq!(m["cache"][0]["hit"], true);
    assert!(m["notes"][0].as_str().unwrap().contains("cache-hit"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("tables cache-hit"));

    let o = run(&d.cfg, &["--force-rebuild"]);
    assert_eq!(code(&o), 0);
    assert!(manifest(&d.out, &cfg)["notes"][0].as_str().unwrap().contains("forced rebuild"));
}

#[test]
fn environment_variable_overrides_the_cache_dir() {
    let d = dirs();
    let cfg = small("env", &d.cache, &d.out);
    write_config(&cfg, &d.cfg);
    let elsewhere = d.out.parent().unwrap().join("env-cache");
    let o = bin()
        .env("COUETTE_SPECTRUM_CACHE", &elsewhere)
        .args(["run", "--config"])
        .arg(&d.cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(&elsewhere).len(), 1);
    assert!(files(&d.cache).is_empty());
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let d = dirs();
    // 2: malformed or invalid configuration.
    fs::write(&d.cfg, "name = \"x\"\nbogus = 1\n").unwrap();
    let o = run(&d.cfg, &[]);
    assert_eq!(code(&o), 2);
    let record: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&o.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(record["kind"], "config");
    assert_eq!(record["exit_code"], 2);
    let o = bin().args(["run", "--preset", "nope"]).output().unwrap();
    assert_eq!(code(&o), 2);

    // 3: a step the fixed-point iteration cannot solve.
    let mut cfg = small("blowup", &d.cache, &d.out);
    cfg.evolution.dt = 0.1;
    cfg.evolution.picard_max = 2;
    write_config(&cfg, &d.cfg);
    let o = run(&d.cfg, &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&d.out, &cfg);
    assert_eq!(m["status"], "error");
    assert_eq!(m["error"]["kind"], "numerical");
    assert_eq!(m["error"]["exit_code"], 3);

    // 4: a damaged cache file.
    let cfg = small("damaged", &d.cache, &d.out);
    write_config(&cfg, &d.cfg);
    assert_eq!(code(&run(&d.cfg, &[])), 0);
    let table = files(&d.cache).into_iter().find(|p| p.extension().unwrap() == "bin").unwrap();
    fs::write(&table, b"CSKT garbage").unwrap();
    let o = run(&d.cfg, &[]);
    assert_eq!(code(&o), 4);
    assert_eq!(manifest(&d.out, &cfg)["error"]["kind"], "cache");
    // Rebuilding repairs it.
    assert_eq!(code(&run(&d.cfg, &["--force-rebuild"])), 0);
}

#[test]
fn resumed_run_matches_an_uninterrupted_one() {
    let d = dirs();
    let full = small("wave", &d.cache, &d.out.join("full"));
    write_config(&full, &d.cfg);
    assert_eq!(code(&run(&d.cfg, &[])), 0);

    let mut half = small("wave", &d.cache, &d.out.join("half"));
    half.evolution.t_max = 1.0;
    write_config(&half, &d.cfg);
    assert_eq!(code(&run(&d.cfg, &[])), 0);
    let snap = d.out.join("half").join(format!("snapshot-wave-{}.json", &config_hash(&half)[..16]));
    assert!((Snapshot::read(&snap).unwrap().state.t - 1.0).abs() < 1e-9);

    let rest = small("wave", &d.cache, &d.out.join("rest"));
    write_config(&rest, &d.cfg);
    let o = run(&d.cfg, &["--resume", snap.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h = &config_hash(&full)[..16];
    let a = Snapshot::read(&d.out.join("full").join(format!("snapshot-wave-{h}.json"))).unwrap();
    let b = Snapshot::read(&d.out.join("rest").join(format!("snapshot-wave-{h}.json"))).unwrap();
    assert_eq!(a.state.step, b.state.step);
    for (x, y) in a.state.amplitudes.iter().zip(&b.state.amplitudes) {
        assert!((x - y).norm() <= 1e-12, "{x} vs {y}");
    }
    assert_eq!(manifest(&d.out.join("rest"), &rest)["resumed_from"], snap.to_str().unwrap());
}

#[test]
fn resume_with_different_tables_is_refused() {
    let d = dirs();
    let cfg = small("wave", &d.cache, &d.out.join("a"));
    write_config(&cfg, &d.cfg);
    assert_eq!(code(&run(&d.cfg, &[])), 0);
    let snap = d.out.join("a").join(format!("snapshot-wave-{}.json", &config_hash(&cfg)[..16]));

    let mut other = small("wave", &d.cache, &d.out.join("b"));
    other.flow.reynolds = 80.0;
    write_config(&other, &d.cfg);
    let o = run(&d.cfg, &["--resume", snap.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel tables"));
    // Only the manifest recording the refusal is written.
    let written = files(&d.out.join("b"));
    assert_eq!(written.len(), 1);
    assert!(written[0].file_name().unwrap().to_str().unwrap().starts_with("manifest-"));
}

#[test]
fn resuming_a_converged_run_reports_immediately() {
    let d = dirs();
    let mut cfg = small("wave", &d.cache, &d.out.join("a"));
    cfg.evolution.t_max = 200.0;
    write_config(&cfg, &d.cfg);
    assert_eq!(code(&run(&d.cfg, &[])), 0);
    let h = &config_hash(&cfg)[..16];
    let snap = d.out.join("a").join(format!("snapshot-wave-{h}.json"));
    let done = Snapshot::read(&snap).unwrap();

    cfg.output.dir = Some(d.out.join("b"));
    write_config(&cfg, &d.cfg);
    assert_eq!(code(&run(&d.cfg, &["--resume", snap.to_str().unwrap()])), 0);
    let again = Snapshot::read(&d.out.join("b").join(format!("snapshot-wave-{h}.json"))).unwrap();
    assert_eq!(again.state, done.state);
    let eq: serde_json::Value =
        serde_json::from_slice(&fs::read(d.out.join("b").join(format!("equilibria-{h}.json"))).unwrap()).unwrap();
    assert_eq!(eq[0]["report"]["reason"], "Converged");
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let d = dirs();
    let mut cfg = small("torques", &d.cache, &d.out);
    cfg.evolution.t_max = 100.0;
    cfg.scenario = Scenario::TorqueTable {
        k_f: vec![1.5, 1.75, 2.0, 2.25],
        density: 0.1,
        background: 0.0,
    };
    write_config(&cfg, &d.cfg);
    let h = &config_hash(&cfg)[..16];
    let csv = d.out.join(format!("table1-{h}.csv"));
    let mut seen = Vec::new();
    for threads in ["1", "1", "3"] {
        let o = run(&d.cfg, &["--threads", threads, "--force-rebuild"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        seen.push(fs::read(&csv).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[0], seen[2]);

    let traj = small("wave", &d.cache, &d.out);
    write_config(&traj, &d.cfg);
    let p = d.out.join(format!("trajectory-wave-{}.csv", &config_hash(&traj)[..16]));
    assert_eq!(code(&run(&d.cfg, &["--threads", "1"])), 0);
    let one = fs::read(&p).unwrap();
    assert_eq!(code(&run(&d.cfg, &["--threads", "2"])), 0);
    assert_eq!(fs::read(&p).unwrap(), one);
}

#[test]
fn show_prints_a_config_that_runs() {
    let o = bin().args(["show", "fig1"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with('#')));
    let cfg = RunConfig::from_toml(&text).unwrap();
    assert!(matches!(cfg.scenario, Scenario::Landau { .. }));
    let o = bin().arg("presets").output().unwrap();
    let names = String::from_utf8(o.stdout).unwrap();
    for n in ["fig1", "fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6", "fig7", "table1"] {
        assert!(names.lines().any(|l| l == n), "{n}");
    }
}
