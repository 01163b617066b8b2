//! Chebyshev-Gauss-Lobatto collocation on the gap `[r_i, r_o]`.
//!
//! Velocity-like fields live on all `n_points` Lobatto nodes (wall values
//! included). Pressure-like fields live on the `n_points - 2` interior nodes
//! and are represented by the polynomial of one degree less that interpolates
//! them there.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

/// Collocation nodes, differentiation matrices and quadrature weights.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub n_points: usize,
    pub r_inner: f64,
    pub r_outer: f64,
    /// Ascending radial nodes, both walls included.
    pub nodes: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    /// Clenshaw-Curtis weights: `sum w_j f(r_j) ~ int f dr`.
    pub quad_weights: Vec<f64>,
    /// Derivative of the interior-node interpolant, evaluated at the interior nodes.
    pub d_interior: DMatrix<f64>,
    bary_full: Vec<f64>,
    bary_interior: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n_points: usize, r_inner: f64, r_outer: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::Config(format!(
                "radial grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        if !(r_outer > r_inner) {
            return Err(Error::Config(format!(
                "empty radial interval [{r_inner}, {r_outer}]"
            )));
        }
        let n = n_points - 1;
        let half = 0.5 * (r_outer - r_inner);
        let theta = |j: usize| j as f64 * PI / n as f64;
        // x_j = cos(theta_j) descends from 1 to -1; r ascends.
        let x: Vec<f64> = (0..=n).map(|j| libm::cos(theta(j))).collect();
        let nodes: Vec<f64> = x.iter().map(|&xj| r_inner + half * (1.0 - xj)).collect();
        // x_i - x_j without cancellation.
        let dx = |i: usize, j: usize| {
            2.0 * libm::sin(0.5 * (theta(i) + theta(j))) * libm::sin(0.5 * (theta(j) - theta(i)))
        };

        let bary_full: Vec<f64> = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let scale = -1.0 / half;
        let d1 = diff_matrix(&bary_full, dx, scale);
        let d2 = &d1 * &d1;

        let bary_interior: Vec<f64> = (1..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                let t = libm::sin(theta(j));
                s * t * t
            })
            .collect();
        let d_interior = diff_matrix(&bary_interior, |i, j| dx(i + 1, j + 1), scale);

        let quad_weights = clenshaw_curtis(n).into_iter().map(|w| w * half).collect();

        Ok(Self {
            n_points,
            r_inner,
            r_outer,
            nodes,
            d1,
            d2,
            quad_weights,
            d_interior,
            bary_full,
            bary_interior,
        })
    }

    /// Number of interior nodes.
    pub fn interior_len(&self) -> usize {
        self.n_points - 2
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.n_points - 1]
    }

    pub fn interior_weights(&self) -> &[f64] {
        &self.quad_weights[1..self.n_points - 1]
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.quad_weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.d1, f)
    }

    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.d2, f)
    }

    /// Value at `r` of the polynomial interpolating nodal values `f`.
    pub fn interpolate(&self, f: &[f64], r: f64) -> f64 {
        barycentric(&self.nodes, &self.bary_full, f, r)
    }

    /// Value at `r` of the polynomial interpolating interior-node values `f`.
    pub fn interpolate_interior(&self, f: &[f64], r: f64) -> f64 {
        barycentric(self.interior_nodes(), &self.bary_interior, f, r)
    }

    /// Pads interior values with zero wall values.
    pub fn with_walls(&self, interior: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_points);
        out.push(0.0);
        out.extend_from_slice(interior);
        out.push(0.0);
        out
    }

    /// Extends an interior-node field to the walls through its interpolant.
    pub fn extend_interior(&self, interior: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_points);
        out.push(self.interpolate_interior(interior, self.r_inner));
        out.extend_from_slice(interior);
        out.push(self.interpolate_interior(interior, self.r_outer));
        out
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n_points == other.n_points
            && self.r_inner == other.r_inner
            && self.r_outer == other.r_outer
    }
}

fn diff_matrix(weights: &[f64], dx: impl Fn(usize, usize) -> f64, scale: f64) -> DMatrix<f64> {
    let m = weights.len();
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut diag = 0.0;
        for j in 0..m {
            if i != j {
                let v = weights[j] / weights[i] / dx(i, j);
                d[(i, j)] = v * scale;
                diag -= v;
            }
        }
        d[(i, i)] = diag * scale;
    }
    d
}

fn barycentric(nodes: &[f64], weights: &[f64], f: &[f64], r: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &w), &v) in nodes.iter().zip(weights).zip(f) {
        let diff = r - x;
        if diff == 0.0 {
            return v;
        }
        let t = w / diff;
        num += t * v;
        den += t;
    }
    num / den
}

/// Clenshaw-Curtis weights on `cos(j pi / n)`, `j = 0..=n`, for `[-1, 1]`.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = alloc::vec![0.0; n + 1];
    let nf = n as f64;
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
    } else {
        w[0] = 1.0 / (nf * nf);
    }
    w[n] = w[0];
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = j as f64 * PI / nf;
        let mut v = 1.0;
        let half = n / 2;
        if n.is_multiple_of(2) {
            v -= libm::cos(nf * theta) / (nf * nf - 1.0);
            for m in 1..half {
                v -= 2.0 * libm::cos(2.0 * m as f64 * theta) / (4.0 * (m * m) as f64 - 1.0);
            }
        } else {
            for m in 1..=half {
                v -= 2.0 * libm::cos(2.0 * m as f64 * theta) / (4.0 * (m * m) as f64 - 1.0);
            }
        }
        *wj = 2.0 * v / nf;
    }
    w
}

pub(crate) fn apply(m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; m.nrows()];
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in f.iter().enumerate() {
            s += m[(i, j)] * v;
        }
        *o = s;
    }
    out
}

/// Extra row/column pair closing a singular system: the solution is pinned by
/// `row . x = 0` while `column` absorbs any incompatible forcing component.
#[derive(Debug, Clone)]
pub struct Border {
    pub row: Vec<f64>,
    pub column: Vec<f64>,
}

/// LU-factored linear system, optionally bordered, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct BorderedSolver {
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    size: usize,
    bordered: bool,
    label: String,
}

/// Pivot ratio below which an unbordered system counts as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-11;
const RESIDUAL_TOL: f64 = 1e-9;

impl BorderedSolver {
    pub fn new(operator: DMatrix<f64>, border: Option<Border>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let size = operator.nrows();
        if operator.ncols() != size {
            return Err(Error::Config(format!("non-square operator for {label}")));
        }
        let bordered = border.is_some();
        let matrix = match border {
            None => operator,
            Some(b) => {
                if b.row.len() != size || b.column.len() != size {
                    return Err(Error::Config(format!("border length mismatch for {label}")));
                }
                let mut m = DMatrix::zeros(size + 1, size + 1);
                m.view_mut((0, 0), (size, size)).copy_from(&operator);
                for i in 0..size {
                    m[(size, i)] = b.row[i];
                    m[(i, size)] = b.column[i];
                }
                m
            }
        };
        let lu = matrix.clone().lu();
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows() {
            let p = u[(i, i)].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        if !(lo > SINGULAR_PIVOT_RATIO * hi) {
            return Err(Error::Singular { label });
        }
        Ok(Self {
            matrix,
            lu,
            size,
            bordered,
            label,
        })
    }

    /// Solves for `x`; the bordered multiplier is discarded.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (x, _) = self.solve_with_multiplier(rhs)?;
        Ok(x)
    }

    /// Solves and also returns the border multiplier (zero when the forcing
    /// is already compatible).
    pub fn solve_with_multiplier(&self, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        if rhs.len() != self.size {
            return Err(Error::Config(format!("rhs length mismatch for {}", self.label)));
        }
        let mut b = DVector::zeros(self.matrix.nrows());
        for (i, v) in rhs.iter().enumerate() {
            b[i] = *v;
        }
        let x = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::Singular { label: self.label.clone() })?;
        let r = &self.matrix * &x - &b;
        let scale = b.amax().max(self.matrix.amax() * x.amax()).max(f64::MIN_POSITIVE);
        let residual = r.amax() / scale;
        if !(residual < RESIDUAL_TOL) {
            return Err(Error::Residual {
                label: self.label.clone(),
                residual,
            });
        }
        let multiplier = if self.bordered { x[self.size] } else { 0.0 };
        Ok((x.iter().take(self.size).copied().collect(), multiplier))
    }
}

/// One-shot bordered solve.
pub fn solve_bordered(
    operator: DMatrix<f64>,
    rhs: &[f64],
    border: Option<Border>,
    label: &str,
) -> Result<Vec<f64>> {
    BorderedSolver::new(operator, border, label)?.solve(rhs)
}
