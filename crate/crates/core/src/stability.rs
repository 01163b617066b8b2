//! Linear stability of Couette flow to axisymmetric disturbances.
//!
//! Disturbances `(u, v, w, p) e^{ikz + sigma t}` are solved in primitive
//! variables. The axial velocity of a mode is purely imaginary, so it is
//! stored as `w_hat` with `w = i w_hat`; every array in this module is real.
//!
//! For `k != 0` the unknowns are interior-node values of `(u, v, w_hat, p)`,
//! the wall values of the velocities being zero. The pencil is
//! `K x = sigma M x` with `M` the identity on velocity rows and zero on the
//! continuity rows. At `k = 0` continuity and the wall conditions force
//! `u = 0` and the mode is taken from the azimuthal diffusion block alone.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::radial::{apply, RadialGrid};
use crate::roots::{brent, golden_max};

/// Largest imaginary part tolerated on a leading eigenvalue.
pub const REALNESS_TOL: f64 = 1e-8;
/// Minimum overlap between neighbouring modes on a tracked branch.
pub const BRANCH_OVERLAP_MIN: f64 = 0.8;
const SHIFT: f64 = 30.0;

/// How profiles are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `int r (u^2 + v^2 + |w|^2) dr = 1`.
    UnitWeightedEnergy,
}

/// How the sign of a real eigenvector is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseConvention {
    /// Azimuthal profile positive at mid-gap.
    MidGapAzimuthalPositive,
    /// Azimuthal profile negative at mid-gap (gauge-flipped tables).
    MidGapAzimuthalNegative,
}

impl PhaseConvention {
    fn sign(self) -> f64 {
        match self {
            Self::MidGapAzimuthalPositive => 1.0,
            Self::MidGapAzimuthalNegative => -1.0,
        }
    }
}

/// Leading eigenmode at one axial wavenumber. Profiles are nodal values on
/// the full radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub k: f64,
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Imaginary part of the axial profile.
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub normalization: Normalization,
    pub phase: PhaseConvention,
}

impl EigenMode {
    /// The same mode at `-k`: axial profile negated.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.k = -self.k;
        m.w.iter_mut().for_each(|x| *x = -*x);
        m
    }

    pub fn zero_like(&self) -> Self {
        let z = vec![0.0; self.u.len()];
        Self {
            u: z.clone(),
            v: z.clone(),
            w: z.clone(),
            p: z,
            ..self.clone()
        }
    }
}

/// Adjoint eigenmode, biorthonormal to the direct mode under
/// `int (u+ u + v+ v + w+ w) dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointMode {
    pub k: f64,
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
}

impl AdjointMode {
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.k = -self.k;
        m.w.iter_mut().for_each(|x| *x = -*x);
        m
    }

    /// `int (u+ f_u + v+ f_v + w+ f_w) dr` for nodal forcing profiles.
    pub fn project(&self, grid: &RadialGrid, fu: &[f64], fv: &[f64], fw: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..grid.n_points {
            s += grid.quad_weights[j] * (self.u[j] * fu[j] + self.v[j] * fv[j] + self.w[j] * fw[j]);
        }
        s
    }
}

/// `int r (a . b) dr` over velocity profiles.
pub fn weighted_inner(grid: &RadialGrid, a: &EigenMode, b: &EigenMode) -> f64 {
    (0..grid.n_points)
        .map(|j| {
            grid.quad_weights[j]
                * grid.nodes[j]
                * (a.u[j] * b.u[j] + a.v[j] * b.v[j] + a.w[j] * b.w[j])
        })
        .sum()
}

/// Layout of the discrete unknown vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Interior `(u, v, w_hat, p)` blocks.
    Full { m: usize },
    /// Interior `v` only (`k = 0`).
    Azimuthal { m: usize },
}

impl Layout {
    pub fn size(&self) -> usize {
        match *self {
            Layout::Full { m } => 4 * m,
            Layout::Azimuthal { m } => m,
        }
    }
}

/// Discretised pencil `K x = sigma M x` at one wavenumber.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub k: f64,
    pub layout: Layout,
    pub stiffness: DMatrix<f64>,
    /// Diagonal of `M`.
    pub mass: Vec<f64>,
}

impl Pencil {
    pub fn assemble(cfg: &FlowConfig, k: f64, grid: &RadialGrid) -> Self {
        let m = grid.interior_len();
        let r = grid.interior_nodes();
        let bf = cfg.base_flow();
        let re = cfg.reynolds;
        let d1 = |i: usize, j: usize| grid.d1[(i + 1, j + 1)];
        let d2 = |i: usize, j: usize| grid.d2[(i + 1, j + 1)];
        let lap = |i: usize, j: usize, k: f64| {
            let mut v = d2(i, j) + d1(i, j) / r[i];
            if i == j {
                v -= k * k;
            }
            v
        };
        if k == 0.0 {
            let stiffness = DMatrix::from_fn(m, m, |i, j| {
                lap(i, j, 0.0) - if i == j { 1.0 / (r[i] * r[i]) } else { 0.0 }
            });
            return Self {
                k,
                layout: Layout::Azimuthal { m },
                stiffness,
                mass: vec![1.0; m],
            };
        }
        let n = 4 * m;
        let mut s = DMatrix::zeros(n, n);
        let (iu, iv, iw, ip) = (0, m, 2 * m, 3 * m);
        for i in 0..m {
            let ri = r[i];
            for j in 0..m {
                let l = lap(i, j, k);
                let diag = if i == j { 1.0 } else { 0.0 };
                // radial momentum
                s[(iu + i, iu + j)] = l - diag / (ri * ri);
                s[(iu + i, ip + j)] = -re * grid.d_interior[(i, j)];
                // azimuthal momentum
                s[(iv + i, iv + j)] = l - diag / (ri * ri);
                // axial momentum
                s[(iw + i, iw + j)] = l;
                // continuity
                s[(ip + i, iu + j)] = d1(i, j) + diag / ri;
            }
            s[(iu + i, iv + i)] = 2.0 * re * bf.velocity(ri) / ri;
            s[(iv + i, iu + i)] = -re * (bf.shear(ri) + bf.velocity(ri) / ri);
            s[(iw + i, ip + i)] = -k * re;
            s[(ip + i, iw + i)] = -k;
        }
        let mut mass = vec![0.0; n];
        mass[..3 * m].iter_mut().for_each(|x| *x = 1.0);
        Self {
            k,
            layout: Layout::Full { m },
            stiffness: s,
            mass,
        }
    }

    pub fn size(&self) -> usize {
        self.layout.size()
    }

    /// `sigma M - K`, the operator of the forced problem.
    pub fn shifted_operator(&self, sigma: f64) -> DMatrix<f64> {
        let mut a = -self.stiffness.clone();
        for (i, m) in self.mass.iter().enumerate() {
            a[(i, i)] += sigma * m;
        }
        a
    }

    /// All finite eigenvalues, sorted by decreasing real part.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let n = self.size();
        let shifted = self.shifted_operator(SHIFT);
        let lu = shifted.lu();
        let nvel = self.mass.iter().filter(|&&m| m != 0.0).count();
        // Inverse of (K - sM) restricted to velocity rows/columns.
        let mut block = DMatrix::zeros(nvel, nvel);
        let mut e = nalgebra::DVector::zeros(n);
        for c in 0..nvel {
            e.fill(0.0);
            e[c] = -1.0;
            let col = lu.solve(&e).ok_or_else(|| Error::Eigen {
                k: self.k,
                reason: "singular shifted operator".into(),
            })?;
            for r in 0..nvel {
                block[(r, c)] = col[r];
            }
        }
        let schur = nalgebra::Schur::try_new(block, f64::EPSILON, 20_000).ok_or_else(|| {
            Error::Eigen {
                k: self.k,
                reason: "Schur iteration did not converge".into(),
            }
        })?;
        let mus = schur.complex_eigenvalues();
        let scale = mus.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut out: Vec<Complex64> = mus
            .iter()
            .filter(|z| z.norm() > 1e-13 * scale)
            .map(|z| Complex64::new(SHIFT, 0.0) + Complex64::new(z.re, z.im).inv())
            .collect();
        out.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(core::cmp::Ordering::Equal));
        Ok(out)
    }

    fn inverse_iteration(&self, sigma: f64, transpose: bool) -> Result<Vec<f64>> {
        let n = self.size();
        let delta = 1e-10 * sigma.abs().max(1.0);
        let mut op = self.stiffness.clone();
        for i in 0..n {
            op[(i, i)] -= (sigma + delta) * self.mass[i];
        }
        if transpose {
            op.transpose_mut();
        }
        let lu = op.lu();
        let mut x = nalgebra::DVector::from_fn(n, |i, _| self.mass[i] * (1.0 + 0.01 * i as f64));
        for _ in 0..4 {
            let rhs = nalgebra::DVector::from_fn(n, |i, _| self.mass[i] * x[i]);
            x = lu.solve(&rhs).ok_or_else(|| Error::Eigen {
                k: self.k,
                reason: "inverse iteration hit an exactly singular system".into(),
            })?;
            let norm = x.amax();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::Eigen {
                    k: self.k,
                    reason: "inverse iteration diverged".into(),
                });
            }
            x /= norm;
        }
        Ok(x.iter().copied().collect())
    }

    /// Right eigenvector for a real eigenvalue.
    pub fn right_vector(&self, sigma: f64) -> Result<Vec<f64>> {
        self.inverse_iteration(sigma, false)
    }

    /// Left eigenvector `z^T (K - sigma M) = 0` for a real eigenvalue.
    pub fn left_vector(&self, sigma: f64) -> Result<Vec<f64>> {
        self.inverse_iteration(sigma, true)
    }

    /// Two-sided Rayleigh quotient `z^T K x / z^T M x`.
    pub fn rayleigh(&self, left: &[f64], right: &[f64]) -> f64 {
        let kx = apply(&self.stiffness, right);
        let num: f64 = left.iter().zip(&kx).map(|(a, b)| a * b).sum();
        let den: f64 = (0..self.size()).map(|i| left[i] * self.mass[i] * right[i]).sum();
        num / den
    }

    /// Relative residual `|K x - sigma M x| / (|K| |x|)`.
    pub fn residual(&self, sigma: f64, x: &[f64]) -> f64 {
        let kx = apply(&self.stiffness, x);
        let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let r = kx
            .iter()
            .enumerate()
            .fold(0.0f64, |a, (i, v)| a.max((v - sigma * self.mass[i] * x[i]).abs()));
        r / (self.stiffness.amax() * xmax)
    }

    /// Splits a discrete vector into nodal `(u, v, w, p)` profiles.
    pub fn profiles(&self, grid: &RadialGrid, x: &[f64]) -> [Vec<f64>; 4] {
        match self.layout {
            Layout::Full { m } => [
                grid.with_walls(&x[..m]),
                grid.with_walls(&x[m..2 * m]),
                grid.with_walls(&x[2 * m..3 * m]),
                grid.extend_interior(&x[3 * m..]),
            ],
            Layout::Azimuthal { m } => {
                let z = vec![0.0; grid.n_points];
                [z.clone(), grid.with_walls(&x[..m]), z.clone(), z]
            }
        }
    }

    /// Stacks nodal momentum forcing into a right-hand side (continuity rows zero).
    pub fn forcing_vector(&self, fu: &[f64], fv: &[f64], fw: &[f64]) -> Vec<f64> {
        match self.layout {
            Layout::Full { m } => {
                let mut out = vec![0.0; 4 * m];
                for i in 0..m {
                    out[i] = fu[i + 1];
                    out[m + i] = fv[i + 1];
                    out[2 * m + i] = fw[i + 1];
                }
                out
            }
            Layout::Azimuthal { m } => (0..m).map(|i| fv[i + 1]).collect(),
        }
    }

    /// Discrete vector of a mode (velocity interiors, pressure interiors).
    pub fn vector_of(&self, mode: &EigenMode) -> Vec<f64> {
        match self.layout {
            Layout::Full { m } => {
                let mut out = vec![0.0; 4 * m];
                for i in 0..m {
                    out[i] = mode.u[i + 1];
                    out[m + i] = mode.v[i + 1];
                    out[2 * m + i] = mode.w[i + 1];
                    out[3 * m + i] = mode.p[i + 1];
                }
                out
            }
            Layout::Azimuthal { m } => (0..m).map(|i| mode.v[i + 1]).collect(),
        }
    }

    /// Discrete left vector of an adjoint mode (quadrature weights folded in).
    pub fn left_of(&self, grid: &RadialGrid, adj: &AdjointMode) -> Vec<f64> {
        let w = grid.interior_weights();
        match self.layout {
            Layout::Full { m } => {
                let mut out = vec![0.0; 4 * m];
                for i in 0..m {
                    out[i] = adj.u[i + 1] * w[i];
                    out[m + i] = adj.v[i + 1] * w[i];
                    out[2 * m + i] = adj.w[i + 1] * w[i];
                    out[3 * m + i] = adj.p[i + 1] * w[i];
                }
                out
            }
            Layout::Azimuthal { m } => (0..m).map(|i| adj.v[i + 1] * w[i]).collect(),
        }
    }

    fn mode_from_vector(
        &self,
        grid: &RadialGrid,
        sigma: f64,
        x: &[f64],
        phase: PhaseConvention,
    ) -> Result<EigenMode> {
        let [u, v, w, p] = self.profiles(grid, x);
        let energy: f64 = (0..grid.n_points)
            .map(|j| grid.quad_weights[j] * grid.nodes[j] * (u[j] * u[j] + v[j] * v[j] + w[j] * w[j]))
            .sum();
        let mid = grid.interpolate(&v, 0.5 * (grid.r_inner + grid.r_outer));
        let orient = if mid != 0.0 {
            mid.signum()
        } else {
            grid.integrate(&v).signum()
        };
        let scale = phase.sign() * orient / libm::sqrt(energy);
        if !scale.is_finite() {
            return Err(Error::Eigen {
                k: self.k,
                reason: "degenerate eigenvector".into(),
            });
        }
        let sc = |a: Vec<f64>| a.into_iter().map(|x| x * scale).collect::<Vec<_>>();
        Ok(EigenMode {
            k: self.k,
            sigma,
            u: sc(u),
            v: sc(v),
            w: sc(w),
            p: sc(p),
            normalization: Normalization::UnitWeightedEnergy,
            phase,
        })
    }

    /// Normalised eigenmode for a known real eigenvalue.
    pub fn mode_for(&self, grid: &RadialGrid, sigma: f64, phase: PhaseConvention) -> Result<EigenMode> {
        let x = self.right_vector(sigma)?;
        let z = self.left_vector(sigma)?;
        let refined = self.rayleigh(&z, &x);
        self.mode_from_vector(grid, refined, &x, phase)
    }
}

/// Rightmost eigenvalue; errors if it is complex.
pub fn leading_eigenvalue(cfg: &FlowConfig, k: f64, grid: &RadialGrid) -> Result<f64> {
    let pencil = Pencil::assemble(cfg, k.abs(), grid);
    let eig = pencil.eigenvalues()?;
    let lead = *eig.first().ok_or_else(|| Error::Eigen {
        k,
        reason: "empty spectrum".into(),
    })?;
    if lead.im.abs() > REALNESS_TOL {
        return Err(Error::Regime { k, imag: lead.im });
    }
    Ok(lead.re)
}

/// Finite spectrum at `k`, sorted by decreasing real part.
pub fn spectrum(cfg: &FlowConfig, k: f64, grid: &RadialGrid) -> Result<Vec<Complex64>> {
    Pencil::assemble(cfg, k.abs(), grid).eigenvalues()
}

/// Least-stable eigenmode at `k`, normalised and phase-fixed.
pub fn leading_mode(cfg: &FlowConfig, k: f64, grid: &RadialGrid) -> Result<EigenMode> {
    leading_mode_with_phase(cfg, k, grid, PhaseConvention::MidGapAzimuthalPositive)
}

pub fn leading_mode_with_phase(
    cfg: &FlowConfig,
    k: f64,
    grid: &RadialGrid,
    phase: PhaseConvention,
) -> Result<EigenMode> {
    let pencil = Pencil::assemble(cfg, k.abs(), grid);
    let sigma = leading_eigenvalue(cfg, k, grid)?;
    let mode = pencil.mode_for(grid, sigma, phase)?;
    Ok(if k < 0.0 { mode.mirrored() } else { mode })
}

/// Adjoint of a direct mode, biorthonormalised against it.
pub fn adjoint_mode(
    cfg: &FlowConfig,
    grid: &RadialGrid,
    direct: &EigenMode,
) -> Result<AdjointMode> {
    let k = direct.k.abs();
    let pencil = Pencil::assemble(cfg, k, grid);
    let dm = if direct.k < 0.0 { direct.mirrored() } else { direct.clone() };
    let x = pencil.vector_of(&dm);
    let z = pencil.left_vector(direct.sigma)?;

    // Adjoint eigenvalue from the left vector alone.
    let mz: Vec<f64> = (0..pencil.size()).map(|i| pencil.mass[i] * z[i]).collect();
    let sigma_adj = pencil.rayleigh(&z, &mz);
    if !((sigma_adj - direct.sigma).abs() <= 1e-6 * direct.sigma.abs().max(1.0)) {
        return Err(Error::AdjointMismatch {
            k: direct.k,
            direct: direct.sigma,
            adjoint: sigma_adj,
        });
    }
    let pairing: f64 = (0..pencil.size()).map(|i| z[i] * pencil.mass[i] * x[i]).sum();
    if !(pairing.abs() > 0.0) {
        return Err(Error::Eigen {
            k: direct.k,
            reason: "adjoint orthogonal to direct mode".into(),
        });
    }
    let w = grid.interior_weights();
    let m = grid.interior_len();
    let unweight = |block: &[f64]| -> Vec<f64> {
        let interior: Vec<f64> = block.iter().zip(w).map(|(a, b)| a / (b * pairing)).collect();
        grid.with_walls(&interior)
    };
    let zero = vec![0.0; grid.n_points];
    let adj = match pencil.layout {
        Layout::Full { .. } => AdjointMode {
            k,
            sigma: sigma_adj,
            u: unweight(&z[..m]),
            v: unweight(&z[m..2 * m]),
            w: unweight(&z[2 * m..3 * m]),
            p: unweight(&z[3 * m..]),
        },
        Layout::Azimuthal { .. } => AdjointMode {
            k,
            sigma: sigma_adj,
            u: zero.clone(),
            v: unweight(&z[..m]),
            w: zero.clone(),
            p: zero,
        },
    };
    Ok(if direct.k < 0.0 { adj.mirrored() } else { adj })
}

/// Leading modes on a set of wavenumbers (ascending), with branch continuity
/// checked by overlap marching outward from the most unstable sample.
/// `k = 0` entries use the azimuthal-diffusion mode.
pub fn mode_branch(
    cfg: &FlowConfig,
    ks: &[f64],
    grid: &RadialGrid,
    phase: PhaseConvention,
) -> Result<Vec<EigenMode>> {
    let mut modes = Vec::with_capacity(ks.len());
    for &k in ks {
        modes.push(leading_mode_with_phase(cfg, k, grid, phase)?);
    }
    check_branch(grid, &modes)?;
    Ok(modes)
}

/// Verifies overlap continuity of a branch on each side of its peak; the
/// `k = 0` point is exempt.
pub fn check_branch(grid: &RadialGrid, modes: &[EigenMode]) -> Result<()> {
    if modes.is_empty() {
        return Ok(());
    }
    let peak = modes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.sigma.partial_cmp(&b.1.sigma).unwrap_or(core::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let check = |a: &EigenMode, b: &EigenMode| -> Result<()> {
        if a.k == 0.0 || b.k == 0.0 || a.k.signum() != b.k.signum() {
            return Ok(());
        }
        let overlap = weighted_inner(grid, a, b).abs();
        if overlap < BRANCH_OVERLAP_MIN {
            return Err(Error::BranchTracking {
                from: a.k,
                to: b.k,
                overlap,
            });
        }
        Ok(())
    };
    for i in peak..modes.len().saturating_sub(1) {
        check(&modes[i], &modes[i + 1])?;
    }
    for i in (1..=peak).rev() {
        check(&modes[i], &modes[i - 1])?;
    }
    Ok(())
}

/// Growth rates `a(k) = sigma_1(k)` on a uniform grid of wavenumbers.
pub fn growth_curve(cfg: &FlowConfig, ks: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    let modes = mode_branch(cfg, ks, grid, PhaseConvention::MidGapAzimuthalPositive)?;
    Ok(modes.iter().map(|m| m.sigma).collect())
}

/// Wavenumber and value of the largest growth rate, searched on `[k_lo, k_hi]`.
pub fn max_growth(cfg: &FlowConfig, grid: &RadialGrid, k_lo: f64, k_hi: f64) -> Result<(f64, f64)> {
    golden_max(|k| leading_eigenvalue(cfg, k, grid), k_lo, k_hi, 1e-6)
}

/// Endpoints of the unstable band `sigma_1(k) > 0`.
pub fn neutral_band(cfg: &FlowConfig, grid: &RadialGrid, k_lo: f64, k_hi: f64) -> Result<(f64, f64)> {
    let (k_peak, s_peak) = max_growth(cfg, grid, k_lo, k_hi)?;
    if s_peak <= 0.0 {
        return Err(Error::SearchRange(format!(
            "no unstable wavenumbers in [{k_lo}, {k_hi}] at R = {}",
            cfg.reynolds
        )));
    }
    let f = |k: f64| leading_eigenvalue(cfg, k, grid);
    let left = brent(f, k_lo, k_peak, 1e-8)?;
    let right = brent(f, k_peak, k_hi, 1e-8)?;
    Ok((left, right))
}

/// Minimum of the neutral curve: `(R_c, k_c)`.
pub fn critical_point(
    eta: f64,
    mu: f64,
    grid: &RadialGrid,
    r_range: (f64, f64),
    k_range: (f64, f64),
) -> Result<(f64, f64)> {
    let neutral_r = |k: f64| -> Result<f64> {
        brent(
            |r| {
                let cfg = FlowConfig::new(eta, mu, r)?;
                leading_eigenvalue(&cfg, k, grid)
            },
            r_range.0,
            r_range.1,
            1e-7,
        )
    };
    let (k_c, neg_r) = golden_max(|k| neutral_r(k).map(|r| -r), k_range.0, k_range.1, 1e-5)?;
    Ok((-neg_r, k_c))
}
