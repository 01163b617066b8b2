//! On-disk kernel tables.
//!
//! File layout: the magic bytes `CSKT`, a little-endian `u32` format
//! version, a `u32` header length, the JSON header, then the dense arrays
//! `a`, `b0`, `b1`, `c`, `wall_dv2` and `wall_dv1_zero` as little-endian
//! `f64`. Files are written to a temporary name and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use couette_core::exec::Executor;
use couette_core::kernels::{build_kernels, KernelTables, TableOptions, TableProvenance};
use couette_core::{FlowConfig, KGrid, RadialGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AppError;

pub const CACHE_ENV: &str = "COUETTE_SPECTRUM_CACHE";
pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"CSKT";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything the tables depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableKey {
    pub format_version: u32,
    pub flow: FlowConfig,
    pub n_points: usize,
    pub k_max: f64,
    pub dk: f64,
    pub options: TableOptions,
    pub code_version: String,
}

impl TableKey {
    pub fn new(flow: FlowConfig, grid: &RadialGrid, kgrid: &KGrid, options: TableOptions) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            flow,
            n_points: grid.n_points,
            k_max: kgrid.k_max(),
            dk: kgrid.dk,
            options,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("key serializes"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    cfg_hash: String,
    half: usize,
    dk: f64,
    n: usize,
    epsilon: f64,
    provenance: TableProvenance,
}

/// Hash of the table contents, independent of where they came from.
pub fn tables_hash(t: &KernelTables) -> String {
    sha256_hex(&payload(t))
}

fn payload(t: &KernelTables) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * (t.a.len() + t.b0.len() * 2 + t.c.len() + t.wall_dv2.len() + 2));
    out.extend_from_slice(&t.epsilon.to_le_bytes());
    for arr in [&t.a, &t.b0, &t.b1, &t.c, &t.wall_dv2] {
        for x in arr.iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.extend_from_slice(&t.wall_dv1_zero.to_le_bytes());
    out
}

/// Where the cache lives: the environment variable, then the configured
/// directory, then `.couette-cache`.
pub fn cache_dir(configured: Option<&Path>) -> PathBuf {
    if let Some(v) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(v);
    }
    configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".couette-cache"))
}

pub fn cache_path(dir: &Path, key: &TableKey) -> PathBuf {
    dir.join(format!("kernels-{}.bin", &key.hash()[..16]))
}

pub fn encode(t: &KernelTables, key: &TableKey) -> Vec<u8> {
    let header = Header {
        format_version: FORMAT_VERSION,
        cfg_hash: key.hash(),
        half: t.kgrid.half,
        dk: t.kgrid.dk,
        n: t.n(),
        epsilon: t.epsilon,
        provenance: t.provenance.clone(),
    };
    let h = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(h.len() as u32).to_le_bytes());
    out.extend_from_slice(&h);
    out.extend_from_slice(&payload(t)[8..]);
    out
}

pub fn decode(bytes: &[u8], key: &TableKey) -> Result<KernelTables, AppError> {
    let bad = |m: &str| AppError::Cache(format!("kernel cache: {m}"));
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(bad("not a kernel table file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(bad(&format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = bytes.get(12..12 + hlen).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| bad(&format!("header: {e}")))?;
    if header.cfg_hash != key.hash() {
        return Err(bad("configuration hash does not match"));
    }
    let kgrid = KGrid {
        half: header.half,
        dk: header.dk,
    };
    let n = header.n;
    if kgrid.len() != n {
        return Err(bad("grid size inconsistent with header"));
    }
    let data = &bytes[12 + hlen..];
    let expected = 8 * (n + 2 * n * n + n * n * n + n + 1);
    if data.len() != expected {
        return Err(bad(&format!("payload has {} bytes, expected {expected}", data.len())));
    }
    let mut values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |m: usize| -> Vec<f64> { values.by_ref().take(m).collect() };
    let a = take(n);
    let b0 = take(n * n);
    let b1 = take(n * n);
    let c = take(n * n * n);
    let wall_dv2 = take(n);
    let wall_dv1_zero = take(1)[0];
    Ok(KernelTables {
        kgrid,
        provenance: header.provenance,
        epsilon: header.epsilon,
        a,
        b0,
        b1,
        c,
        wall_dv2,
        wall_dv1_zero,
    })
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp.{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        AppError::io(path, e)
    })
}

/// Outcome of a cache lookup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheInfo {
    pub path: PathBuf,
    pub cfg_hash: String,
    pub tables_hash: String,
    pub hit: bool,
    pub build_seconds: f64,
}

/// Loads the tables for `key`, building and persisting them on a miss or
/// when `force` is set.
pub fn load_or_build<E: Executor>(
    dir: &Path,
    flow: &FlowConfig,
    grid: &RadialGrid,
    kgrid: &KGrid,
    options: TableOptions,
    force: bool,
    exec: &E,
) -> Result<(KernelTables, CacheInfo), AppError> {
    let key = TableKey::new(*flow, grid, kgrid, options);
    let path = cache_path(dir, &key);
    if !force && path.exists() {
        let bytes = fs::read(&path).map_err(|e| AppError::io(&path, e))?;
        let tables = decode(&bytes, &key)?;
        let info = CacheInfo {
            tables_hash: tables_hash(&tables),
            path,
            cfg_hash: key.hash(),
            hit: true,
            build_seconds: 0.0,
        };
        return Ok((tables, info));
    }
    let start = std::time::Instant::now();
    let tables = build_kernels(flow, kgrid, grid, options, exec)?.tables;
    let build_seconds = start.elapsed().as_secs_f64();
    write_atomic(&path, &encode(&tables, &key))?;
    let info = CacheInfo {
        tables_hash: tables_hash(&tables),
        path,
        cfg_hash: key.hash(),
        hit: false,
        build_seconds,
    };
    Ok((tables, info))
}
