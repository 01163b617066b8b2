//! CSV and JSON artifacts. Every file name carries the config hash.

use std::path::{Path, PathBuf};

use couette_core::diagnostics::{TorqueReport, TorqueSample};
use couette_core::evolution::{SelectionRow, SpectrumState};
use couette_core::reduced::LandauPoint;
use serde::Serialize;

use crate::cache::write_atomic;
use crate::error::AppError;

/// Collects the files written by a run.
#[derive(Debug)]
pub struct OutputDir {
    pub dir: PathBuf,
    pub hash: String,
    pub written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn new(dir: PathBuf, config_hash: &str) -> Self {
        Self {
            dir,
            hash: config_hash[..16].to_string(),
            written: Vec::new(),
        }
    }

    pub fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}-{}.{ext}", self.hash))
    }

    pub fn write(&mut self, stem: &str, ext: &str, bytes: &[u8]) -> Result<PathBuf, AppError> {
        let p = self.path(stem, ext);
        write_atomic(&p, bytes)?;
        if !self.written.contains(&p) {
            self.written.push(p.clone());
        }
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<PathBuf, AppError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("value serializes");
        bytes.push(b'\n');
        self.write(stem, "json", &bytes)
    }

    pub fn write_csv<R: Serialize>(&mut self, stem: &str, header: &[&str], rows: &[R]) -> Result<PathBuf, AppError> {
        let bytes = csv_bytes(header, rows).map_err(|e| AppError::io(self.path(stem, "csv"), e))?;
        self.write(stem, "csv", &bytes)
    }
}

pub fn csv_bytes<R: Serialize>(header: &[&str], rows: &[R]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "k", "re_A", "im_A", "amplitude"];

/// Trajectory rows for `k >= 0`: `(t, k, Re A, Im A, |A| dk)`.
pub fn trajectory_rows(state: &SpectrumState, out: &mut Vec<(f64, f64, f64, f64, f64)>) {
    let kg = state.kgrid;
    for i in kg.half..kg.len() {
        let a = state.amplitudes[i];
        out.push((state.t, kg.k(i), a.re, a.im, a.norm() * kg.dk));
    }
}

pub const FIG1_HEADER: [&str; 4] = ["k", "a", "a1", "amplitude"];

pub fn fig1_rows(points: &[LandauPoint]) -> Vec<(f64, f64, f64, f64)> {
    points.iter().map(|p| (p.k, p.a, p.a1, p.amplitude)).collect()
}

pub const FIG4_HEADER: [&str; 7] = ["seed", "background", "dominant_k", "amplitude", "outcome", "residual", "t"];

pub fn fig4_rows(background: f64, rows: &[SelectionRow]) -> Vec<(f64, f64, f64, f64, String, f64, f64)> {
    rows.iter()
        .map(|r| {
            let outcome = match r.outcome {
                couette_core::evolution::SelectionOutcome::StableAsSeeded => "stable",
                couette_core::evolution::SelectionOutcome::DecayedToHarmonic => "harmonic",
                couette_core::evolution::SelectionOutcome::DecayedToBandInterior => "band_interior",
            };
            (r.seed, background, r.dominant_k, r.amplitude, outcome.to_string(), r.report.residual, r.report.t)
        })
        .collect()
}

pub const TABLE1_HEADER: [&str; 9] = [
    "seed", "k_f", "ratio", "mean_term", "pair_term", "amplitude", "mean_flow", "kinetic_energy", "residual",
];

/// One Table-1 row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorqueRow {
    pub seed: f64,
    pub torque: TorqueReport,
    pub amplitude: f64,
    pub mean_flow: f64,
    pub kinetic_energy: f64,
    pub residual: f64,
}

type Table1Record = (f64, f64, f64, f64, f64, f64, f64, f64, f64);

pub fn table1_rows(rows: &[TorqueRow]) -> Vec<Table1Record> {
    rows.iter()
        .map(|r| {
            (
                r.seed,
                r.torque.k_f,
                r.torque.ratio,
                r.torque.mean_term,
                r.torque.pair_term,
                r.amplitude,
                r.mean_flow,
                r.kinetic_energy,
                r.residual,
            )
        })
        .collect()
}

pub const FIG7_HEADER: [&str; 6] = ["reynolds", "k_f", "ratio", "envelope_min", "envelope_max", "amplitude"];

/// One Fig-7 row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReynoldsRow {
    pub sample: TorqueSample,
    pub envelope: (f64, f64),
}

pub fn fig7_rows(rows: &[ReynoldsRow]) -> Vec<(f64, f64, f64, f64, f64, f64)> {
    rows.iter()
        .map(|r| {
            let s = &r.sample;
            (s.reynolds, s.k_f, s.torque.ratio, r.envelope.0, r.envelope.1, s.amplitude)
        })
        .collect()
}

pub fn relative(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).display().to_string()
}
