//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use couette_core::kernels::{quadratic_forcing, KernelTables};
use couette_core::stability::{leading_mode, EigenMode};
use couette_core::{FlowConfig, RadialGrid};
use num_complex::Complex64;

pub fn trapezoid(x: i64, lo: i64, hi: i64) -> f64 {
    if lo == hi {
        0.0
    } else if x == lo || x == hi {
        0.5
    } else {
        1.0
    }
}

/// Direct double and triple sums over signed wavenumber indices.
pub fn brute(t: &KernelTables, a: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let kg = t.kgrid;
    let h = kg.half as i64;
    let dk = kg.dk;
    let idx = |j: i64| kg.index(j).unwrap();
    let mut i1 = vec![Complex64::new(0.0, 0.0); kg.len()];
    let mut i2 = i1.clone();
    for s in -h..=h {
        let (lo, hi) = ((-h).max(s - h), h.min(s + h));
        for p in lo..=hi {
            let q = s - p;
            i1[idx(s)] += a[idx(p)] * a[idx(q)] * t.b(idx(p), idx(q)) * trapezoid(p, lo, hi) * dk;
        }
        for p in -h..=h {
            let rest = s - p;
            let (lo, hi) = ((-h).max(rest - h), h.min(rest + h));
            for q in lo..=hi {
                let r = rest - q;
                let w = trapezoid(p, -h, h) * trapezoid(q, lo, hi);
                i2[idx(s)] +=
                    a[idx(p)] * a[idx(q)] * a[idx(r)] * t.c(idx(p), idx(q), idx(r)) * w * dk * dk;
            }
        }
    }
    (i1, i2)
}

pub fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm())) / scale
}

/// Physical velocity of `sum_k U(k) e^{ikz}` over the given modes and their
/// mirrors, sampled on `nz` equispaced points of one period `2 pi`.
pub struct Physical {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
}

pub fn synthesize(modes: &[&EigenMode], nr: usize, nz: usize) -> Physical {
    let mut out = Physical {
        u: vec![vec![0.0; nr]; nz],
        v: vec![vec![0.0; nr]; nz],
        w: vec![vec![0.0; nr]; nz],
    };
    for iz in 0..nz {
        let z = 2.0 * std::f64::consts::PI * iz as f64 / nz as f64;
        for m in modes {
            let e = Complex64::from_polar(1.0, m.k * z);
            for j in 0..nr {
                // U(k) e^{ikz} + conj, with w = i w_hat.
                out.u[iz][j] += 2.0 * (m.u[j] * e).re;
                out.v[iz][j] += 2.0 * (m.v[j] * e).re;
                out.w[iz][j] += 2.0 * (Complex64::new(0.0, m.w[j]) * e).re;
            }
        }
    }
    out
}

pub fn dft(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    (0..n)
        .map(|m| {
            samples
                .iter()
                .enumerate()
                .map(|(j, &x)| x * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (m * j) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

pub fn spectral_dz(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let c = dft(samples);
    (0..n)
        .map(|j| {
            let z = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            (0..n)
                .map(|m| {
                    let wave = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                    if 2 * m == n {
                        return 0.0;
                    }
                    (c[m] * Complex64::new(0.0, wave) * Complex64::from_polar(1.0, wave * z)).re
                })
                .sum()
        })
        .collect()
}

/// Relative mismatch between the tabulated quadratic forcing of modes at
/// `k1` and `k2` (distinct positive integers) and pseudo-spectral advection of their
/// synthesized field.
pub fn forcing_mismatch(cfg: &FlowConfig, g: &RadialGrid, k1: usize, k2: usize) -> f64 {
    let m1 = leading_mode(cfg, k1 as f64, g).unwrap();
    let m2 = leading_mode(cfg, k2 as f64, g).unwrap();
    let nz = 4 * (k1 + k2);
    let nr = g.n_points;
    let phys = synthesize(&[&m1, &m2], nr, nz);

    // Physical-space advection at every (z, r).
    let mut nrad = vec![vec![0.0; nz]; nr];
    let mut nazi = vec![vec![0.0; nz]; nr];
    let mut nax = vec![vec![0.0; nz]; nr];
    let column = |f: &Vec<Vec<f64>>, j: usize| -> Vec<f64> { (0..nz).map(|iz| f[iz][j]).collect() };
    let dr: Vec<[Vec<f64>; 3]> = (0..nz)
        .map(|iz| [g.derivative(&phys.u[iz]), g.derivative(&phys.v[iz]), g.derivative(&phys.w[iz])])
        .collect();
    for j in 0..nr {
        let r = g.nodes[j];
        let (uz, vz, wz) = (
            spectral_dz(&column(&phys.u, j)),
            spectral_dz(&column(&phys.v, j)),
            spectral_dz(&column(&phys.w, j)),
        );
        for iz in 0..nz {
            let (u, v, w) = (phys.u[iz][j], phys.v[iz][j], phys.w[iz][j]);
            nrad[j][iz] = u * dr[iz][0][j] + w * uz[iz] - v * v / r;
            nazi[j][iz] = u * dr[iz][1][j] + w * vz[iz] + u * v / r;
            nax[j][iz] = u * dr[iz][2][j] + w * wz[iz];
        }
    }

    let f = quadratic_forcing(cfg, g, &m1, &m2).unwrap();
    let scale = -2.0 / cfg.reynolds;
    let mag = f.max_abs() * scale.abs();
    let mut worst: f64 = 0.0;
    for j in 0..nr {
        let (cr, ct, cz) = (dft(&nrad[j])[k1 + k2], dft(&nazi[j])[k1 + k2], dft(&nax[j])[k1 + k2]);
        worst = worst
            .max((cr - Complex64::new(scale * f.radial[j], 0.0)).norm())
            .max((ct - Complex64::new(scale * f.azimuthal[j], 0.0)).norm())
            .max((cz - Complex64::new(0.0, scale * f.axial[j])).norm());
    }
    worst / mag
}

