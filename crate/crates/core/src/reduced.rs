//! Limiting models of the amplitude-density equation: the Landau equation of
//! a monochromatic wave, Ginzburg-Landau coefficients at the critical point,
//! and the two-amplitude model coupling a wave to the mean-flow distortion.
//!
//! Amplitudes here are physical wave amplitudes. On the k-grid a delta of
//! weight `w` at `k0` is the density `w / dk` at that grid point, so the
//! Landau amplitude equals `A(k0) dk`. In the mean-flow model the k = 0
//! density carries `A0 + conj(A0) = 2 A0`.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelTables;

fn grid_pair(tables: &KernelTables, k0: f64) -> Result<(usize, usize)> {
    let i = tables
        .kgrid
        .index_of(k0)
        .ok_or_else(|| Error::Config(format!("k0 = {k0} is not on the k-grid")))?;
    Ok((i, tables.kgrid.mirror(i)))
}

/// `a1 = c(k0, -k0, k0) + c(-k0, k0, k0) + c(k0, k0, -k0)`.
pub fn landau_constant(tables: &KernelTables, k0: f64) -> Result<f64> {
    let (i, m) = grid_pair(tables, k0)?;
    Ok(tables.c(i, m, i) + tables.c(m, i, i) + tables.c(i, i, m))
}

/// `dA/dt = a A + a1 |A|^2 A` for a real amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauModel {
    pub k0: f64,
    pub a: f64,
    pub a1: f64,
}

impl LandauModel {
    pub fn from_tables(tables: &KernelTables, k0: f64) -> Result<Self> {
        let (i, _) = grid_pair(tables, k0)?;
        Ok(Self {
            k0,
            a: tables.a[i],
            a1: landau_constant(tables, k0)?,
        })
    }

    pub fn rhs(&self, x: f64) -> f64 {
        self.a * x + self.a1 * x * x * x
    }

    /// Supercritical equilibrium `sqrt(-a / a1)`, zero when none exists.
    pub fn equilibrium(&self) -> f64 {
        if self.a > 0.0 && self.a1 < 0.0 {
            libm::sqrt(-self.a / self.a1)
        } else {
            0.0
        }
    }
}

/// One row of the monochromatic equilibrium curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauPoint {
    pub k: f64,
    pub a: f64,
    pub a1: f64,
    pub amplitude: f64,
}

/// Landau equilibria at every positive grid wavenumber.
pub fn landau_curve(tables: &KernelTables) -> Vec<LandauPoint> {
    let kg = tables.kgrid;
    (kg.half + 1..kg.len())
        .map(|i| {
            let m = LandauModel::from_tables(tables, kg.k(i)).expect("grid point");
            LandauPoint {
                k: m.k0,
                a: m.a,
                a1: m.a1,
                amplitude: m.equilibrium(),
            }
        })
        .collect()
}

fn rk4<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], y: &[f64; N], h: f64) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        let mut o = *a;
        for i in 0..N {
            o[i] += s * b[i];
        }
        o
    };
    let k1 = f(y);
    let k2 = f(&add(y, &k1, 0.5 * h));
    let k3 = f(&add(y, &k2, 0.5 * h));
    let k4 = f(&add(y, &k3, h));
    let mut o = *y;
    for i in 0..N {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    o
}

fn check_span(t_end: f64, steps: usize) -> Result<()> {
    if !(t_end >= 0.0 && t_end.is_finite()) || steps == 0 {
        return Err(Error::Config(format!(
            "ODE span needs t_end >= 0 and at least one step (t_end = {t_end}, steps = {steps})"
        )));
    }
    Ok(())
}

/// Classical RK4 on `[0, t_end]` with `steps` equal steps; returns `(t, A)`
/// after every step, starting with the initial value.
pub fn landau_evolution(model: &LandauModel, amp0: f64, t_end: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    check_span(t_end, steps)?;
    let h = t_end / steps as f64;
    let mut y = [amp0];
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, amp0));
    for s in 1..=steps {
        y = rk4(|y| [model.rhs(y[0])], &y, h);
        out.push((s as f64 * h, y[0]));
    }
    Ok(out)
}

/// Coefficients of the envelope equation
/// `dA/dt = a A + a1 |A|^2 A + a2 d^2A/dz^2` at `k_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GinzburgLandauCoefficients {
    pub k_c: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
}

/// `-(1/2) a''(k_c)` by a centred second difference of step `h`.
pub fn diffusion_coefficient(a: impl Fn(f64) -> Result<f64>, k_c: f64, h: f64) -> Result<f64> {
    let (lo, mid, hi) = (a(k_c - h)?, a(k_c)?, a(k_c + h)?);
    Ok(-0.5 * (hi - 2.0 * mid + lo) / (h * h))
}

/// Coefficients from the tables, with `k_c` snapped to the nearest grid point.
pub fn gl_coefficients(tables: &KernelTables, k_c: f64) -> Result<GinzburgLandauCoefficients> {
    let kg = tables.kgrid;
    let j = libm::round(k_c / kg.dk) as i64;
    let i = kg
        .index(j)
        .filter(|&i| i > 0 && i + 1 < kg.len())
        .ok_or_else(|| Error::Config(format!("k_c = {k_c} is too close to the grid edge")))?;
    let k = kg.k(i);
    let a2 = diffusion_coefficient(
        |x| Ok(tables.a[kg.index_of(x).expect("neighbour on grid")]),
        k,
        kg.dk,
    )?;
    Ok(GinzburgLandauCoefficients {
        k_c: k,
        a: tables.a[i],
        a1: landau_constant(tables, k)?,
        a2,
    })
}

/// Wave amplitude `A` coupled to the mean-flow amplitude `A0`:
///
/// ```text
/// dA/dt  = a(k0) A + a31 A0 A + (a41 A^2 + a42 A0^2) A
/// dA0/dt = a(0) A0 + b31 A0^2 + b32 A^2 + (b41 A^2 + b42 A0^2) A0
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFlowCoupledModel {
    pub k0: f64,
    pub a_k0: f64,
    pub a_0: f64,
    pub a31: f64,
    pub a41: f64,
    pub a42: f64,
    pub b31: f64,
    pub b32: f64,
    pub b41: f64,
    pub b42: f64,
}

/// Collects the two-amplitude coefficients from the kernels: the engine
/// restricted to `{-k0, 0, k0}` with `A(0) dk = 2 A0` and `A(k0) dk = A`.
pub fn meanflow_coupled_coefficients(tables: &KernelTables, k0: f64) -> Result<MeanFlowCoupledModel> {
    let (i, m) = grid_pair(tables, k0)?;
    let z = tables.kgrid.half;
    if i == z {
        return Err(Error::Config("k0 must be nonzero".into()));
    }
    Ok(MeanFlowCoupledModel {
        k0,
        a_k0: tables.a[i],
        a_0: tables.a[z],
        a31: 4.0 * tables.b(i, z),
        a41: landau_constant(tables, k0)?,
        a42: 12.0 * tables.c(i, z, z),
        b31: 2.0 * tables.b(z, z),
        b32: tables.b(i, m),
        b41: 6.0 * tables.c(z, i, m),
        b42: 4.0 * tables.c(z, z, z),
    })
}

impl MeanFlowCoupledModel {
    /// `(dA0/dt, dA/dt)`.
    pub fn rhs(&self, a0: f64, ak: f64) -> (f64, f64) {
        let dk = self.a_k0 * ak + self.a31 * a0 * ak + (self.a41 * ak * ak + self.a42 * a0 * a0) * ak;
        let d0 = self.a_0 * a0
            + self.b31 * a0 * a0
            + self.b32 * ak * ak
            + (self.b41 * ak * ak + self.b42 * a0 * a0) * a0;
        (d0, dk)
    }

    /// The same model with every wave/mean-flow exchange term removed; the
    /// wave equation is then the Landau equation.
    pub fn without_coupling(&self) -> Self {
        Self {
            a31: 0.0,
            a42: 0.0,
            b32: 0.0,
            b41: 0.0,
            ..*self
        }
    }

    pub fn landau(&self) -> LandauModel {
        LandauModel {
            k0: self.k0,
            a: self.a_k0,
            a1: self.a41,
        }
    }

    fn wave_squared(&self, a0: f64) -> f64 {
        -(self.a_k0 + self.a31 * a0 + self.a42 * a0 * a0) / self.a41
    }

    fn mean_balance(&self, a0: f64) -> f64 {
        let ak2 = self.wave_squared(a0);
        self.a_0 * a0 + self.b31 * a0 * a0 + (self.b32 + self.b41 * a0) * ak2 + self.b42 * a0 * a0 * a0
    }

    /// Fixed point with a nonzero wave, by Newton iteration on the mean-flow
    /// balance after eliminating the wave amplitude. Returns `(A0, A)`.
    pub fn equilibrium(&self) -> Result<(f64, f64)> {
        let start = self.landau().equilibrium();
        if start == 0.0 {
            return Err(Error::SearchRange(format!("no supercritical wave at k0 = {}", self.k0)));
        }
        let mut x = -self.b32 * start * start / self.a_0;
        for _ in 0..100 {
            let f = self.mean_balance(x);
            let h = 1e-7 * x.abs().max(1e-6);
            let df = (self.mean_balance(x + h) - self.mean_balance(x - h)) / (2.0 * h);
            let dx = f / df;
            x -= dx;
            if !x.is_finite() {
                break;
            }
            if dx.abs() <= 1e-15 * x.abs().max(1e-12) {
                let ak2 = self.wave_squared(x);
                if ak2 > 0.0 {
                    return Ok((x, libm::sqrt(ak2)));
                }
                break;
            }
        }
        Err(Error::SearchRange(format!(
            "coupled mean-flow equilibrium not found at k0 = {}",
            self.k0
        )))
    }
}

/// RK4 on `[0, t_end]`; returns `(t, A0, A)` after every step.
pub fn meanflow_coupled_evolution(
    model: &MeanFlowCoupledModel,
    a0_init: f64,
    ak_init: f64,
    t_end: f64,
    steps: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    check_span(t_end, steps)?;
    let h = t_end / steps as f64;
    let mut y = [a0_init, ak_init];
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, a0_init, ak_init));
    for s in 1..=steps {
        y = rk4(
            |y| {
                let (d0, dk) = model.rhs(y[0], y[1]);
                [d0, dk]
            },
            &y,
            h,
        );
        out.push((s as f64 * h, y[0], y[1]));
    }
    Ok(out)
}
