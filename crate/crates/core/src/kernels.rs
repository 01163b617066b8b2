//! Interaction kernels of the amplitude-density equation.
//!
//! The advective operator `N(a, b) = (a . grad) b` (with the curvature terms
//! of the axisymmetric equations) is evaluated in Fourier space. For fields
//! `a e^{ik_a z}` and `b e^{ik_b z}` with axial components `i w_hat`, the
//! product sits at `k_a + k_b` and is real in the radial and azimuthal rows
//! and purely imaginary in the axial row:
//!
//! ```text
//! N_r = a_u Db_u - k_b w_a b_u - a_v b_v / r
//! N_t = a_u Db_v - k_b w_a b_v + a_u b_v / r
//! N_z = a_u Dw_b - k_b w_a w_b          (coefficient of i)
//! ```
//!
//! The perturbation equation reads `dU/dt - L U + R grad P = -R N(U, U)`, so
//! the quadratic forcing of a mode pair is `-(R/2) [N(a, b) + N(b, a)]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::flow::FlowConfig;
use crate::kgrid::KGrid;
use crate::radial::{apply, Border, BorderedSolver, RadialGrid};
use crate::stability::{
    adjoint_mode, check_branch, leading_mode_with_phase, max_growth, AdjointMode, EigenMode,
    Layout, Pencil, PhaseConvention,
};

/// Velocity profiles at one wavenumber with their radial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub k: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Imaginary part of the axial profile.
    pub w: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub dw: Vec<f64>,
}

impl Field {
    pub fn from_profiles(grid: &RadialGrid, k: f64, u: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Self {
        Self {
            k,
            du: grid.derivative(&u),
            dv: grid.derivative(&v),
            dw: grid.derivative(&w),
            u,
            v,
            w,
        }
    }

    pub fn from_mode(grid: &RadialGrid, mode: &EigenMode) -> Self {
        Self::from_profiles(grid, mode.k, mode.u.clone(), mode.v.clone(), mode.w.clone())
    }

    fn check(&self, grid: &RadialGrid) -> Result<()> {
        let n = grid.n_points;
        if self.u.len() != n || self.v.len() != n || self.w.len() != n {
            return Err(Error::GridMismatch(format!(
                "profile of length {} on a {n}-point grid",
                self.u.len()
            )));
        }
        Ok(())
    }
}

/// Nodal momentum forcing at one wavenumber; `axial` holds the imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingProfile {
    pub k: f64,
    pub radial: Vec<f64>,
    pub azimuthal: Vec<f64>,
    pub axial: Vec<f64>,
}

impl ForcingProfile {
    pub fn zeros(k: f64, n: usize) -> Self {
        Self {
            k,
            radial: vec![0.0; n],
            azimuthal: vec![0.0; n],
            axial: vec![0.0; n],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.radial
            .iter()
            .chain(&self.azimuthal)
            .chain(&self.axial)
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[inline]
fn advect_at(r: f64, a: &Field, b: &Field, j: usize) -> [f64; 3] {
    let (au, av, aw) = (a.u[j], a.v[j], a.w[j]);
    let kb = b.k;
    [
        au * b.du[j] - kb * aw * b.u[j] - av * b.v[j] / r,
        au * b.dv[j] - kb * aw * b.v[j] + au * b.v[j] / r,
        au * b.dw[j] - kb * aw * b.w[j],
    ]
}

/// `N(a, b)` on the grid nodes.
pub fn advection(grid: &RadialGrid, a: &Field, b: &Field) -> ForcingProfile {
    let mut out = ForcingProfile::zeros(a.k + b.k, grid.n_points);
    for (j, &r) in grid.nodes.iter().enumerate() {
        let [x, y, z] = advect_at(r, a, b, j);
        out.radial[j] = x;
        out.azimuthal[j] = y;
        out.axial[j] = z;
    }
    out
}

/// `<adj, N(a, b) + N(b, a)>` without materialising the profiles.
fn project_symmetric(grid: &RadialGrid, adj: &AdjointMode, a: &Field, b: &Field) -> f64 {
    let mut s = 0.0;
    for (j, &r) in grid.nodes.iter().enumerate() {
        let p = advect_at(r, a, b, j);
        let q = advect_at(r, b, a, j);
        s += grid.quad_weights[j]
            * (adj.u[j] * (p[0] + q[0]) + adj.v[j] * (p[1] + q[1]) + adj.w[j] * (p[2] + q[2]));
    }
    s
}

/// Symmetrised quadratic forcing of two first-order fields.
pub fn pair_forcing(grid: &RadialGrid, reynolds: f64, a: &Field, b: &Field) -> ForcingProfile {
    let mut f = advection(grid, a, b);
    let g = advection(grid, b, a);
    let s = -0.5 * reynolds;
    for j in 0..grid.n_points {
        f.radial[j] = s * (f.radial[j] + g.radial[j]);
        f.azimuthal[j] = s * (f.azimuthal[j] + g.azimuthal[j]);
        f.axial[j] = s * (f.axial[j] + g.axial[j]);
    }
    f
}

/// Quadratic forcing `F(k1, k2)` of two eigenmodes.
pub fn quadratic_forcing(
    cfg: &FlowConfig,
    grid: &RadialGrid,
    mode1: &EigenMode,
    mode2: &EigenMode,
) -> Result<ForcingProfile> {
    let a = Field::from_mode(grid, mode1);
    let b = Field::from_mode(grid, mode2);
    a.check(grid)?;
    b.check(grid)?;
    Ok(pair_forcing(grid, cfg.reynolds, &a, &b))
}

/// Second-order field `U2(k1, k2)`, adjoint-orthogonal to the mode at `k1 + k2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderField {
    pub k1: f64,
    pub k2: f64,
    pub field: Field,
    pub p: Vec<f64>,
}

/// Bordered solver for all second-order problems sharing one sum wavenumber.
#[derive(Debug, Clone)]
pub struct SecondOrderSolver {
    pub k: f64,
    pencil: Pencil,
    solver: BorderedSolver,
    mass_mode: Vec<f64>,
    left: Vec<f64>,
}

impl SecondOrderSolver {
    pub fn new(cfg: &FlowConfig, grid: &RadialGrid, mode: &EigenMode, adjoint: &AdjointMode) -> Result<Self> {
        let k = mode.k;
        let pencil = Pencil::assemble(cfg, k, grid);
        let x1 = pencil.vector_of(mode);
        let left = pencil.left_of(grid, adjoint);
        let mass_mode: Vec<f64> = x1.iter().zip(&pencil.mass).map(|(x, m)| x * m).collect();
        let row: Vec<f64> = left.iter().zip(&pencil.mass).map(|(z, m)| z * m).collect();
        let solver = BorderedSolver::new(
            pencil.shifted_operator(mode.sigma),
            Some(Border {
                row,
                column: mass_mode.clone(),
            }),
            format!("second-order field at k = {k}"),
        )?;
        Ok(Self {
            k,
            pencil,
            solver,
            mass_mode,
            left,
        })
    }

    /// Returns the adjoint projection of the forcing and the orthogonal response.
    pub fn solve(&self, grid: &RadialGrid, forcing: &ForcingProfile, k1: f64, k2: f64) -> Result<(f64, SecondOrderField)> {
        let mut rhs = self
            .pencil
            .forcing_vector(&forcing.radial, &forcing.azimuthal, &forcing.axial);
        // At k = 0 the radial forcing is balanced by pressure and the axial
        // forcing of a conjugate pair vanishes identically.
        let b0: f64 = self.left.iter().zip(&rhs).map(|(z, f)| z * f).sum();
        for (r, m) in rhs.iter_mut().zip(&self.mass_mode) {
            *r -= b0 * m;
        }
        let x = self.solver.solve(&rhs)?;
        let [u, v, w, p] = self.pencil.profiles(grid, &x);
        let p = match self.pencil.layout {
            Layout::Full { .. } => p,
            Layout::Azimuthal { .. } => vec![0.0; grid.n_points],
        };
        Ok((
            b0,
            SecondOrderField {
                k1,
                k2,
                field: Field::from_profiles(grid, self.k, u, v, w),
                p,
            },
        ))
    }

    /// `<adj, x>` over velocity unknowns of a discrete vector.
    pub fn pin(&self, field: &SecondOrderField) -> f64 {
        let m = SecondOrderField::mode_like(field);
        let x = self.pencil.vector_of(&m);
        self.left
            .iter()
            .zip(&x)
            .zip(&self.pencil.mass)
            .map(|((z, x), m)| z * x * m)
            .sum()
    }

    pub fn operator_residual(&self, field: &SecondOrderField, sigma: f64, forcing: &ForcingProfile, b0: f64) -> f64 {
        let x = self.pencil.vector_of(&SecondOrderField::mode_like(field));
        let ax = apply(&self.pencil.shifted_operator(sigma), &x);
        let f = self
            .pencil
            .forcing_vector(&forcing.radial, &forcing.azimuthal, &forcing.axial);
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        ax.iter()
            .zip(&f)
            .zip(&self.mass_mode)
            .fold(0.0f64, |m, ((a, f), mm)| m.max((a - (f - b0 * mm)).abs()))
            / scale
    }
}

impl SecondOrderField {
    fn mode_like(&self) -> EigenMode {
        EigenMode {
            k: self.field.k,
            sigma: 0.0,
            u: self.field.u.clone(),
            v: self.field.v.clone(),
            w: self.field.w.clone(),
            p: self.p.clone(),
            normalization: crate::stability::Normalization::UnitWeightedEnergy,
            phase: PhaseConvention::MidGapAzimuthalPositive,
        }
    }
}

/// One-shot second-order field for a single pair; returns `(b0, U2)`.
pub fn second_order_field(
    cfg: &FlowConfig,
    grid: &RadialGrid,
    mode1: &EigenMode,
    mode2: &EigenMode,
    sum_mode: &EigenMode,
    sum_adjoint: &AdjointMode,
) -> Result<(f64, SecondOrderField)> {
    let label = format!("({}, {})", mode1.k, mode2.k);
    if (mode1.k + mode2.k - sum_mode.k).abs() > 1e-9 {
        return Err(Error::Dependency(format!("mode at k = {} for pair {label}", mode1.k + mode2.k)));
    }
    let f = quadratic_forcing(cfg, grid, mode1, mode2).map_err(|e| e.at(label.clone()))?;
    SecondOrderSolver::new(cfg, grid, sum_mode, sum_adjoint)
        .and_then(|s| s.solve(grid, &f, mode1.k, mode2.k))
        .map_err(|e| e.at(label))
}

/// Symmetrised cubic kernel `c(k1, k2, k3)` from first- and second-order fields.
pub fn cubic_kernel(
    grid: &RadialGrid,
    reynolds: f64,
    adjoint: &AdjointMode,
    first: [&Field; 3],
    second: [&Field; 3],
) -> f64 {
    // second[i] is U2 of the pair complementary to first[i].
    let s: f64 = (0..3)
        .map(|i| project_symmetric(grid, adjoint, first[i], second[i]))
        .sum();
    -reynolds * s / 3.0
}

/// Leading modes and adjoints on `k = j dk`, `|j| <= half`.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub half: usize,
    pub dk: f64,
    pub modes: Vec<EigenMode>,
    pub adjoints: Vec<AdjointMode>,
    pub fields: Vec<Field>,
}

impl ModeSet {
    pub fn build<E: Executor>(
        cfg: &FlowConfig,
        grid: &RadialGrid,
        dk: f64,
        half: usize,
        phase: PhaseConvention,
        exec: &E,
    ) -> Result<Self> {
        let computed = exec.map(half + 1, |j| -> Result<(EigenMode, AdjointMode)> {
            let k = j as f64 * dk;
            let mode = leading_mode_with_phase(cfg, k, grid, phase).map_err(|e| e.at(format!("({k})")))?;
            let adj = adjoint_mode(cfg, grid, &mode).map_err(|e| e.at(format!("({k})")))?;
            Ok((mode, adj))
        });
        let mut pos_modes = Vec::with_capacity(half + 1);
        let mut pos_adj = Vec::with_capacity(half + 1);
        for item in computed {
            let (m, a) = item?;
            pos_modes.push(m);
            pos_adj.push(a);
        }
        check_branch(grid, &pos_modes)?;
        let mut modes = Vec::with_capacity(2 * half + 1);
        let mut adjoints = Vec::with_capacity(2 * half + 1);
        for j in (1..=half).rev() {
            modes.push(pos_modes[j].mirrored());
            adjoints.push(pos_adj[j].mirrored());
        }
        modes.extend(pos_modes);
        adjoints.extend(pos_adj);
        let fields = modes.iter().map(|m| Field::from_mode(grid, m)).collect();
        Ok(Self {
            half,
            dk,
            modes,
            adjoints,
            fields,
        })
    }

    fn slot(&self, j: i64) -> Option<usize> {
        let i = j + self.half as i64;
        (i >= 0 && (i as usize) < self.modes.len()).then_some(i as usize)
    }

    pub fn mode(&self, j: i64) -> Option<&EigenMode> {
        self.slot(j).map(|i| &self.modes[i])
    }

    pub fn adjoint(&self, j: i64) -> Option<&AdjointMode> {
        self.slot(j).map(|i| &self.adjoints[i])
    }

    pub fn field(&self, j: i64) -> Option<&Field> {
        self.slot(j).map(|i| &self.fields[i])
    }

    fn require(&self, j: i64) -> Result<(&EigenMode, &AdjointMode, &Field)> {
        match self.slot(j) {
            Some(i) => Ok((&self.modes[i], &self.adjoints[i], &self.fields[i])),
            None => Err(Error::Dependency(format!(
                "mode/adjoint at k = {}",
                j as f64 * self.dk
            ))),
        }
    }
}

/// Second-order fields for every unordered pair on a k-grid.
#[derive(Debug, Clone)]
pub struct SecondOrderSet {
    pub kgrid: KGrid,
    fields: Vec<SecondOrderField>,
}

fn tri_index(n: usize, i1: usize, i2: usize) -> usize {
    let (a, b) = if i1 <= i2 { (i1, i2) } else { (i2, i1) };
    a * n - a * (a + 1) / 2 + b
}

impl SecondOrderSet {
    /// `U2(k_{i1}, k_{i2})`.
    pub fn get(&self, i1: usize, i2: usize) -> &SecondOrderField {
        &self.fields[tri_index(self.kgrid.len(), i1, i2)]
    }
}

/// What to build and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    pub phase: PhaseConvention,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            phase: PhaseConvention::MidGapAzimuthalPositive,
        }
    }
}

/// Inputs the tables were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProvenance {
    pub flow: FlowConfig,
    pub n_points: usize,
    pub k_max: f64,
    pub dk: f64,
    pub phase: PhaseConvention,
    pub code_version: String,
}

/// Growth rates and interaction kernels on a k-grid.
///
/// `b0`, `b1` are `n x n` over incoming indices `(i1, i2)`; `c` is `n^3`
/// over `(i1, i2, i3)`. Entries whose sum falls off the grid are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTables {
    pub kgrid: KGrid,
    pub provenance: TableProvenance,
    /// Expansion parameter: the largest linear growth rate.
    pub epsilon: f64,
    pub a: Vec<f64>,
    pub b0: Vec<f64>,
    pub b1: Vec<f64>,
    pub c: Vec<f64>,
    /// `d v2/dr (k, -k)` at the inner wall, per grid index of `k`.
    pub wall_dv2: Vec<f64>,
    /// `d v1/dr (0)` at the inner wall.
    pub wall_dv1_zero: f64,
}

impl KernelTables {
    pub fn n(&self) -> usize {
        self.kgrid.len()
    }

    /// Index of `k_{i1} + k_{i2}`, if on the grid.
    #[inline]
    pub fn sum_index(&self, i1: usize, i2: usize) -> Option<usize> {
        let s = i1 + i2;
        let h = self.kgrid.half;
        (s >= h && s - h < self.n()).then(|| s - h)
    }

    /// `b = b0 + eps b1`.
    #[inline]
    pub fn b(&self, i1: usize, i2: usize) -> f64 {
        let n = self.n();
        self.b0[i1 * n + i2] + self.epsilon * self.b1[i1 * n + i2]
    }

    #[inline]
    pub fn c(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        let n = self.n();
        self.c[(i1 * n + i2) * n + i3]
    }

    /// A copy with the growth-rate-mismatch correction removed.
    pub fn without_b1(&self) -> Self {
        let mut t = self.clone();
        t.b1.iter_mut().for_each(|x| *x = 0.0);
        t
    }
}

/// Tables together with the modes and second-order fields behind them.
#[derive(Debug, Clone)]
pub struct KernelBuild {
    pub tables: KernelTables,
    pub modes: ModeSet,
    pub second: SecondOrderSet,
}

/// Builds all tables with the default executor and options.
pub fn assemble_tables(cfg: &FlowConfig, kgrid: &KGrid, grid: &RadialGrid) -> Result<KernelTables> {
    Ok(build_kernels(cfg, kgrid, grid, TableOptions::default(), &crate::exec::Serial)?.tables)
}

pub fn build_kernels<E: Executor>(
    cfg: &FlowConfig,
    kgrid: &KGrid,
    grid: &RadialGrid,
    opts: TableOptions,
    exec: &E,
) -> Result<KernelBuild> {
    let h = kgrid.half;
    let n = kgrid.len();
    let dk = kgrid.dk;
    let re = cfg.reynolds;
    // Pair sums reach 2K, so the mode set spans twice the table range.
    let modes = ModeSet::build(cfg, grid, dk, 2 * h, opts.phase, exec)?;
    let a: Vec<f64> = (0..n).map(|i| modes.mode(kgrid.signed(i)).map(|m| m.sigma).unwrap_or(0.0)).collect();
    let (_, epsilon) = max_growth(cfg, grid, dk, kgrid.k_max())?;

    // Second-order fields, grouped by sum wavenumber so one LU serves a group.
    let sums = 4 * h + 1;
    let groups = exec.map(sums, |si| -> Result<Vec<(usize, usize, f64, SecondOrderField)>> {
        let s = si as i64 - 2 * h as i64;
        let (sm, sa, _) = modes.require(s)?;
        let solver = SecondOrderSolver::new(cfg, grid, sm, sa).map_err(|e| e.at(format!("({})", sm.k)))?;
        let mut out = Vec::new();
        for i1 in 0..n {
            let j2 = s - kgrid.signed(i1);
            let Some(i2) = kgrid.index(j2) else { continue };
            if i2 < i1 {
                continue;
            }
            let (f1, f2) = (&modes.fields[i1 + h], &modes.fields[i2 + h]);
            let label = format!("({}, {})", f1.k, f2.k);
            let f = pair_forcing(grid, re, f1, f2);
            let (b0, u2) = solver.solve(grid, &f, f1.k, f2.k).map_err(|e| e.at(label))?;
            out.push((i1, i2, b0, u2));
        }
        Ok(out)
    });

    let mut b0 = vec![0.0; n * n];
    let mut b1 = vec![0.0; n * n];
    let mut slots: Vec<Option<SecondOrderField>> = (0..n * (n + 1) / 2).map(|_| None).collect();
    for group in groups {
        for (i1, i2, proj, u2) in group? {
            let j = kgrid.signed(i1) + kgrid.signed(i2);
            if let Some(is) = kgrid.index(j) {
                let adj = modes.adjoint(j).expect("sum within mode set");
                let pin = adj.project(grid, &u2.field.u, &u2.field.v, &u2.field.w);
                let mismatch = (a[is] - a[i1] - a[i2]) / epsilon;
                for (p, q) in [(i1, i2), (i2, i1)] {
                    b0[p * n + q] = proj;
                    b1[p * n + q] = mismatch * pin;
                }
            }
            slots[tri_index(n, i1, i2)] = Some(u2);
        }
    }
    let fields: Vec<SecondOrderField> = slots
        .into_iter()
        .map(|s| s.expect("every unordered pair solved"))
        .collect();
    let second = SecondOrderSet {
        kgrid: *kgrid,
        fields,
    };

    // Cubic kernels over sorted triples, scattered to all orderings.
    let rows = exec.map(n, |i1| {
        let mut out = Vec::new();
        for i2 in i1..n {
            for i3 in i2..n {
                let j = kgrid.signed(i1) + kgrid.signed(i2) + kgrid.signed(i3);
                if kgrid.index(j).is_none() {
                    continue;
                }
                let adj = modes.adjoint(j).expect("sum within mode set");
                let first = [
                    &modes.fields[i1 + h],
                    &modes.fields[i2 + h],
                    &modes.fields[i3 + h],
                ];
                let sec = [
                    &second.get(i2, i3).field,
                    &second.get(i1, i3).field,
                    &second.get(i1, i2).field,
                ];
                out.push((i2, i3, cubic_kernel(grid, re, adj, first, sec)));
            }
        }
        out
    });
    let mut c = vec![0.0; n * n * n];
    for (i1, row) in rows.into_iter().enumerate() {
        for (i2, i3, v) in row {
            for (p, q, r) in [
                (i1, i2, i3),
                (i1, i3, i2),
                (i2, i1, i3),
                (i2, i3, i1),
                (i3, i1, i2),
                (i3, i2, i1),
            ] {
                c[(p * n + q) * n + r] = v;
            }
        }
    }

    let wall_dv2 = (0..n)
        .map(|i| second.get(i, kgrid.mirror(i)).field.dv[0])
        .collect();
    let wall_dv1_zero = modes.field(0).expect("k = 0 mode").dv[0];

    let tables = KernelTables {
        kgrid: *kgrid,
        provenance: TableProvenance {
            flow: *cfg,
            n_points: grid.n_points,
            k_max: kgrid.k_max(),
            dk,
            phase: opts.phase,
            code_version: String::from(env!("CARGO_PKG_VERSION")),
        },
        epsilon,
        a,
        b0,
        b1,
        c,
        wall_dv2,
        wall_dv1_zero,
    };
    Ok(KernelBuild {
        tables,
        modes,
        second,
    })
}
