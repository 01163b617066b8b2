//! Physical quantities derived from a spectrum: inner-wall torque, kinetic
//! energy of the perturbation, and the reconstructed velocity field.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_with, EquilibriumReport, EvolutionParams, SpectrumState};
use crate::exec::Executor;
use crate::flow::FlowConfig;
use crate::kernels::{build_kernels, KernelBuild, KernelTables, TableOptions};
use crate::kgrid::KGrid;
use crate::radial::RadialGrid;

/// Torque on the inner cylinder relative to circular Couette flow, split
/// into its mean-flow and wave-pair contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueReport {
    pub k_f: f64,
    pub ratio: f64,
    /// Contribution of the first-order k = 0 field.
    pub mean_term: f64,
    /// Contribution of the second-order `(k_f, -k_f)` field.
    pub pair_term: f64,
}

/// Shear stress factor `r (d/dr)(V/r)` of the Couette profile at the inner wall.
pub fn couette_wall_shear(cfg: &FlowConfig) -> f64 {
    let ri = cfg.r_inner();
    let base = cfg.base_flow();
    base.shear(ri) - base.velocity(ri) / ri
}

/// `G_T / G_C = 1 + dv/dr(r_i) / (dV/dr - V/r)(r_i)` where `v` is the
/// z-averaged azimuthal distortion built from the mean amplitude
/// `mean = A(0) dk` and the wave amplitude `wave = |A(k_f)| dk`.
///
/// The distortion is `mean v1'(0) + 2 wave^2 v2'(k_f, -k_f)`; pairs of
/// harmonics are not included.
pub fn torque_from_amplitudes(
    tables: &KernelTables,
    cfg: &FlowConfig,
    k_f: f64,
    mean: f64,
    wave: f64,
) -> Result<TorqueReport> {
    let i = tables
        .kgrid
        .index_of(k_f)
        .ok_or_else(|| Error::Config(format!("k_f = {k_f} is not on the k-grid")))?;
    let shear = couette_wall_shear(cfg);
    let mean_term = mean * tables.wall_dv1_zero / shear;
    let pair_term = 2.0 * wave * wave * tables.wall_dv2[i] / shear;
    Ok(TorqueReport {
        k_f,
        ratio: 1.0 + mean_term + pair_term,
        mean_term,
        pair_term,
    })
}

/// Torque ratio of an equilibrium at its dominant wavenumber.
pub fn torque_ratio(report: &EquilibriumReport, tables: &KernelTables, cfg: &FlowConfig) -> Result<TorqueReport> {
    let wave = report
        .amplitude_at(&tables.kgrid, report.dominant_k)
        .ok_or_else(|| Error::Config(format!("k_f = {} is not on the k-grid", report.dominant_k)))?;
    torque_from_amplitudes(tables, cfg, report.dominant_k, report.mean_flow, wave)
}

/// `1/2 <int r |u1|^2 dr>_z` of the first-order wave at `k_f`; with
/// unit-energy modes this is `(|A(k_f)| dk)^2`.
pub fn perturbation_kinetic_energy(report: &EquilibriumReport, kgrid: &KGrid) -> Result<f64> {
    let a = report
        .amplitude_at(kgrid, report.dominant_k)
        .ok_or_else(|| Error::Config(format!("k_f = {} is not on the k-grid", report.dominant_k)))?;
    Ok(a * a)
}

/// First-order only, or first plus second order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    First,
    Second,
}

/// Velocity on an `(r, z)` mesh, stored `z`-major: entry `iz * r.len() + ir`.
/// `v` includes the Couette profile; `u` and `w` are pure perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityField {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// Largest imaginary part discarded when summing the modes.
    pub imag_residue: f64,
}

impl VelocityField {
    pub fn at(&self, iz: usize, ir: usize) -> [f64; 3] {
        let j = iz * self.r.len() + ir;
        [self.u[j], self.v[j], self.w[j]]
    }

    /// Azimuthal velocity averaged over the `z` samples, per radius.
    pub fn mean_azimuthal(&self) -> Vec<f64> {
        let nr = self.r.len();
        let nz = self.z.len() as f64;
        (0..nr)
            .map(|ir| self.z.iter().enumerate().map(|(iz, _)| self.v[iz * nr + ir]).sum::<f64>() / nz)
            .collect()
    }
}

struct Accum {
    nr: usize,
    z: Vec<f64>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
    w: Vec<Complex64>,
}

impl Accum {
    /// Adds `amp * profile(r) * exp(i k z)`, the axial part carrying a factor `i`.
    fn add(&mut self, amp: Complex64, k: f64, pu: &[f64], pv: &[f64], pw: &[f64]) {
        let iw = amp * Complex64::new(0.0, 1.0);
        for (iz, &z) in self.z.iter().enumerate() {
            let e = Complex64::from_polar(1.0, k * z);
            let (a, b) = (amp * e, iw * e);
            let row = iz * self.nr;
            for ir in 0..self.nr {
                self.u[row + ir] += a * pu[ir];
                self.v[row + ir] += a * pv[ir];
                self.w[row + ir] += b * pw[ir];
            }
        }
    }
}

/// Sums the expansion at the mesh points:
/// `U = V + sum A(k) dk U1(k) e^{ikz} + sum A(k1) A(k2) dk^2 U2(k1, k2) e^{i(k1+k2)z}`.
pub fn reconstruct_velocity(
    state: &SpectrumState,
    build: &KernelBuild,
    grid: &RadialGrid,
    cfg: &FlowConfig,
    r: &[f64],
    z: &[f64],
    order: Truncation,
) -> Result<VelocityField> {
    let kg = state.kgrid;
    if kg != build.tables.kgrid {
        return Err(Error::GridMismatch("state and kernel k-grids differ".into()));
    }
    let (ri, ro) = (grid.r_inner, grid.r_outer);
    let tol = 1e-12 * ro;
    for &x in r {
        if !(x >= ri - tol && x <= ro + tol) {
            return Err(Error::Domain {
                r: x,
                r_inner: ri,
                r_outer: ro,
            });
        }
    }
    let nr = r.len();
    let interp = |f: &[f64]| -> Vec<f64> { r.iter().map(|&x| grid.interpolate(f, x)).collect() };
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = Accum {
        nr,
        z: z.to_vec(),
        u: vec![zero; nr * z.len()],
        v: vec![zero; nr * z.len()],
        w: vec![zero; nr * z.len()],
    };
    let dk = kg.dk;
    let active: Vec<usize> = (0..kg.len()).filter(|&i| state.amplitudes[i] != zero).collect();
    for &i in &active {
        let f = build
            .modes
            .field(kg.signed(i))
            .ok_or_else(|| Error::Dependency(format!("mode at k = {}", kg.k(i))))?;
        acc.add(state.amplitudes[i] * dk, f.k, &interp(&f.u), &interp(&f.v), &interp(&f.w));
    }
    if order == Truncation::Second {
        for &i1 in &active {
            for &i2 in &active {
                let s = build.second.get(i1, i2);
                let amp = state.amplitudes[i1] * state.amplitudes[i2] * (dk * dk);
                let f = &s.field;
                acc.add(amp, f.k, &interp(&f.u), &interp(&f.v), &interp(&f.w));
            }
        }
    }
    let base = cfg.base_flow();
    let mut imag_residue: f64 = 0.0;
    let mut take = |c: &[Complex64]| -> Vec<f64> {
        c.iter()
            .map(|x| {
                imag_residue = imag_residue.max(x.im.abs());
                x.re
            })
            .collect()
    };
    let u = take(&acc.u);
    let mut v = take(&acc.v);
    let w = take(&acc.w);
    for iz in 0..z.len() {
        for (ir, &x) in r.iter().enumerate() {
            v[iz * nr + ir] += base.velocity(x);
        }
    }
    Ok(VelocityField {
        r: r.to_vec(),
        z: z.to_vec(),
        u,
        v,
        w,
        imag_residue,
    })
}

/// Torque at one Reynolds number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueSample {
    pub reynolds: f64,
    pub k_f: f64,
    pub amplitude: f64,
    pub torque: TorqueReport,
}

/// For each Reynolds number, builds the tables, evolves a single seeded
/// wave at `k_seed` to equilibrium and evaluates the torque there. Below
/// onset the seed decays and the ratio is 1.
#[allow(clippy::too_many_arguments)]
pub fn torque_vs_reynolds<E: Executor>(
    base: &FlowConfig,
    reynolds: &[f64],
    grid: &RadialGrid,
    kgrid: &KGrid,
    k_seed: f64,
    density: f64,
    params: &EvolutionParams,
    exec: &E,
) -> Result<Vec<TorqueSample>> {
    reynolds
        .iter()
        .map(|&re| {
            let cfg = base.with_reynolds(re);
            let build = build_kernels(&cfg, kgrid, grid, TableOptions::default(), exec)?;
            let initial = SpectrumState::seeded(*kgrid, &[(k_seed, density)], 0.0)?;
            let (_, report) = evolve_with(initial, &build.tables, params, |_| Ok(()))?;
            let wave = report.amplitude_at(kgrid, k_seed).unwrap_or(0.0);
            let torque = torque_from_amplitudes(&build.tables, &cfg, k_seed, report.mean_flow, wave)?;
            Ok(TorqueSample {
                reynolds: re,
                k_f: k_seed,
                amplitude: wave,
                torque,
            })
        })
        .collect()
}

/// `(min, max)` of the torque ratios.
pub fn torque_envelope(rows: &[TorqueReport]) -> Option<(f64, f64)> {
    rows.iter().map(|t| t.ratio).fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}
