//! Resumable evolution state.

use std::fs;
use std::path::Path;

use couette_core::evolution::{EvolutionParams, SpectrumState};
use serde::{Deserialize, Serialize};

use crate::cache::write_atomic;
use crate::error::AppError;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub config_hash: String,
    pub tables_hash: String,
    pub case: String,
    pub params: EvolutionParams,
    pub state: SpectrumState,
}

impl Snapshot {
    pub fn write(&self, path: &Path) -> Result<(), AppError> {
        let bytes = serde_json::to_vec_pretty(self).expect("snapshot serializes");
        write_atomic(path, &bytes)
    }

    pub fn read(path: &Path) -> Result<Self, AppError> {
        let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
        let snap: Self = serde_json::from_slice(&bytes)
            .map_err(|e| AppError::Cache(format!("snapshot {}: {e}", path.display())))?;
        if snap.format_version != SNAPSHOT_VERSION {
            return Err(AppError::Cache(format!(
                "snapshot {} has format version {}, expected {SNAPSHOT_VERSION}",
                path.display(),
                snap.format_version
            )));
        }
        Ok(snap)
    }

    /// Refuses snapshots taken with different tables.
    pub fn check_tables(&self, tables_hash: &str) -> Result<(), AppError> {
        if self.tables_hash != tables_hash {
            return Err(AppError::Cache(format!(
                "snapshot was taken with kernel tables {} but the current tables are {}; \
                 rebuild with the original flow and grid settings to resume",
                short(&self.tables_hash),
                short(tables_hash)
            )));
        }
        Ok(())
    }
}

pub fn short(hash: &str) -> &str {
    &hash[..hash.len().min(16)]
}
