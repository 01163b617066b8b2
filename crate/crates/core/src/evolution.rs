//! Time integration of the amplitude-density equation
//! `dA/dt = a(k) A + I1(k) + I2(k)` on a truncated uniform k-grid.
//!
//! Convolutions use the trapezoidal rule over the interval of admissible
//! partner wavenumbers (both inside `[-K, K]`), with half weights at its ends
//! and zero weight when the interval collapses to a point. Time stepping is
//! implicit Euler with Picard iteration, the linear term kept implicit in the
//! denominator.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kernels::KernelTables;
use crate::kgrid::KGrid;

/// Amplitude densities on a k-grid at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumState {
    pub kgrid: KGrid,
    pub t: f64,
    pub step: u64,
    pub amplitudes: Vec<Complex64>,
}

impl SpectrumState {
    pub fn zeros(kgrid: KGrid) -> Self {
        Self {
            kgrid,
            t: 0.0,
            step: 0,
            amplitudes: vec![Complex64::new(0.0, 0.0); kgrid.len()],
        }
    }

    /// `background` everywhere, then each `(k, density)` seed and its mirror.
    pub fn seeded(kgrid: KGrid, seeds: &[(f64, f64)], background: f64) -> Result<Self> {
        let mut s = Self::zeros(kgrid);
        s.amplitudes.iter_mut().for_each(|a| *a = Complex64::new(background, 0.0));
        for &(k, d) in seeds {
            let i = kgrid.index_of(k).ok_or_else(|| {
                Error::Config(alloc::format!("seed wavenumber {k} is not on the grid"))
            })?;
            s.amplitudes[i] = Complex64::new(d, 0.0);
            s.amplitudes[kgrid.mirror(i)] = Complex64::new(d, 0.0);
        }
        Ok(s)
    }

    /// Physical amplitudes `|A(k)| dk`.
    pub fn physical(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm() * self.kgrid.dk).collect()
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }

    /// Largest `|A(k) - conj A(-k)|`.
    pub fn hermitian_drift(&self) -> f64 {
        let n = self.amplitudes.len();
        (0..n).fold(0.0, |m, i| {
            m.max((self.amplitudes[i] - self.amplitudes[n - 1 - i].conj()).norm())
        })
    }
}

/// Stepping and termination controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Threshold on `max_k |a A + I1 + I2| dk`.
    pub equil_tol: f64,
    pub t_max: f64,
    pub snapshot_every: u64,
    /// How many times a step whose fixed-point iteration fails may be split
    /// in half. Zero keeps the step size fixed.
    #[serde(default)]
    pub max_halvings: u32,
    /// Grid indices kept nonzero; everything else is zeroed every iterate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<usize>>,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            dt: 0.01,
            picard_tol: 1e-10,
            picard_max: 50,
            equil_tol: 1e-8,
            t_max: 200.0,
            snapshot_every: 1000,
            max_halvings: 0,
            mask: None,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self, tables: &KernelTables) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(alloc::format!("evolution parameters: {m}")));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.picard_tol > 0.0 && self.equil_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.picard_max == 0 {
            return bad("picard_max must be at least 1");
        }
        if !(self.t_max >= 0.0) {
            return bad("t_max must be non-negative");
        }
        let amax = tables.a.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        if self.dt * amax >= 1.0 {
            return bad("dt * max a(k) must stay below 1");
        }
        if let Some(mask) = &self.mask {
            if mask.iter().any(|&i| i >= tables.n()) {
                return bad("mask index outside the grid");
            }
        }
        Ok(())
    }
}

/// Why an evolution stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    Horizon,
}

/// Summary of the state an evolution ended in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub dominant_k: f64,
    /// Physical amplitudes `|A(k)| dk` on the whole grid.
    pub amplitudes: Vec<f64>,
    /// `(m k_f, amplitude)` for `m = 1, 2, ...` while on the grid.
    pub harmonics: Vec<(f64, f64)>,
    /// `A(0) dk`.
    pub mean_flow: f64,
    pub residual: f64,
    pub reason: Termination,
    pub t: f64,
    pub steps: u64,
}

impl EquilibriumReport {
    pub fn from_state(state: &SpectrumState, residual: f64, reason: Termination) -> Self {
        let kg = state.kgrid;
        let amplitudes = state.physical();
        let mut best = kg.half + 1;
        for i in kg.half + 1..kg.len() {
            // Strict comparison breaks ties toward smaller k.
            if amplitudes[i] > amplitudes[best] {
                best = i;
            }
        }
        let dominant_k = if kg.half == 0 { 0.0 } else { kg.k(best) };
        let j = kg.signed(best);
        let harmonics = (1..)
            .map_while(|m: i64| kg.index(m * j).map(|i| (kg.k(i), amplitudes[i])))
            .collect();
        Self {
            dominant_k,
            mean_flow: state.amplitudes[kg.half].re * kg.dk,
            amplitudes,
            harmonics,
            residual,
            reason,
            t: state.t,
            steps: state.step,
        }
    }

    pub fn amplitude_at(&self, kgrid: &KGrid, k: f64) -> Option<f64> {
        kgrid.index_of(k).map(|i| self.amplitudes[i])
    }
}

trait Amp: Copy + Add<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + Default {
    fn is_zero(&self) -> bool;
    fn abs(&self) -> f64;
}

impl Amp for f64 {
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
}

impl Amp for Complex64 {
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn abs(&self) -> f64 {
        self.norm()
    }
}

/// Trapezoid weight of `x` on the integer interval `[lo, hi]`.
#[inline]
fn weight(x: i64, lo: i64, hi: i64) -> f64 {
    if lo == hi {
        0.0
    } else if x == lo || x == hi {
        0.5
    } else {
        1.0
    }
}

/// Contiguous run of convolution terms: `sum_t coef[off + t] x[x0 + t] y[y0 + t]`
/// with `y` the reversed amplitude vector.
#[derive(Debug, Clone, Copy)]
struct Span {
    x0: usize,
    y0: usize,
    off: usize,
    len: usize,
}

/// Four-way unrolled weighted dot product with a fixed summation order.
#[inline]
fn dot3<T: Amp>(coef: &[f64], x: &[T], y: &[T]) -> T {
    let n = coef.len();
    let (x, y) = (&x[..n], &y[..n]);
    let mut acc = [T::default(); 4];
    let body = n / 4 * 4;
    let mut j = 0;
    while j < body {
        for l in 0..4 {
            acc[l] = acc[l] + x[j + l] * y[j + l] * coef[j + l];
        }
        j += 4;
    }
    let mut tail = T::default();
    while j < n {
        tail = tail + x[j] * y[j] * coef[j];
        j += 1;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Kernel data laid out along anti-diagonals, trapezoid weights and powers
/// of `dk` folded in.
struct Engine<'a> {
    h: i64,
    n: usize,
    dk: f64,
    a: &'a [f64],
    b: Vec<f64>,
    c: &'a [f64],
    triad_spans: Vec<Span>,
    triad_coef: Vec<f64>,
    /// Indexed `s * n + p`.
    quartet_spans: Vec<Span>,
    quartet_coef: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(tables: &'a KernelTables) -> Self {
        let n = tables.n();
        let h = tables.kgrid.half as i64;
        let dk = tables.kgrid.dk;
        let b: Vec<f64> = (0..n * n).map(|p| tables.b(p / n, p % n)).collect();
        let idx = |j: i64| (j + h) as usize;
        let span = |rest: i64, off: usize| {
            let (lo, hi) = ((-h).max(rest - h), h.min(rest + h));
            let len = if hi > lo { (hi - lo + 1) as usize } else { 0 };
            (
                lo,
                hi,
                Span {
                    x0: idx(lo),
                    y0: n - 1 - idx(rest - lo),
                    off,
                    len,
                },
            )
        };
        let mut triad_spans = Vec::with_capacity(n);
        let mut triad_coef = Vec::new();
        for s in -h..=h {
            let (lo, hi, sp) = span(s, triad_coef.len());
            for q in lo..lo + sp.len as i64 {
                triad_coef.push(weight(q, lo, hi) * b[idx(q) * n + idx(s - q)] * dk);
            }
            triad_spans.push(sp);
        }
        let mut quartet_spans = Vec::with_capacity(n * n);
        let mut quartet_coef = Vec::new();
        for s in -h..=h {
            for p in -h..=h {
                let w1 = weight(p, -h, h) * dk * dk;
                let rest = s - p;
                let (lo, hi, sp) = span(rest, quartet_coef.len());
                let row = &tables.c[idx(p) * n * n..(idx(p) + 1) * n * n];
                for q in lo..lo + sp.len as i64 {
                    quartet_coef.push(w1 * weight(q, lo, hi) * row[idx(q) * n + idx(rest - q)]);
                }
                quartet_spans.push(sp);
            }
        }
        Self {
            h,
            n,
            dk,
            a: &tables.a,
            b,
            c: &tables.c,
            triad_spans,
            triad_coef,
            quartet_spans,
            quartet_coef,
        }
    }

    #[inline]
    fn idx(&self, j: i64) -> usize {
        (j + self.h) as usize
    }

    fn support<T: Amp>(&self, amp: &[T]) -> Vec<i64> {
        (-self.h..=self.h).filter(|&j| !amp[self.idx(j)].is_zero()).collect()
    }

    fn triad<T: Amp>(&self, amp: &[T], out: &mut [T]) {
        let h = self.h;
        let support = self.support(amp);
        out.iter_mut().for_each(|x| *x = T::default());
        if 2 * support.len() < self.n {
            for &p in &support {
                for &q in &support {
                    let s = p + q;
                    if s.abs() > h {
                        continue;
                    }
                    let w = weight(p, (-h).max(s - h), h.min(s + h));
                    let (ip, iq) = (self.idx(p), self.idx(q));
                    let term = amp[ip] * amp[iq] * (w * self.b[ip * self.n + iq] * self.dk);
                    out[self.idx(s)] = out[self.idx(s)] + term;
                }
            }
        } else {
            let rev: Vec<T> = amp.iter().rev().copied().collect();
            for (o, sp) in out.iter_mut().zip(&self.triad_spans) {
                *o = dot3(
                    &self.triad_coef[sp.off..sp.off + sp.len],
                    &amp[sp.x0..],
                    &rev[sp.y0..],
                );
            }
        }
    }

    fn quartet<T: Amp>(&self, amp: &[T], out: &mut [T]) {
        let h = self.h;
        let n = self.n;
        let support = self.support(amp);
        out.iter_mut().for_each(|x| *x = T::default());
        if 2 * support.len() < n {
            let dk2 = self.dk * self.dk;
            for &p in &support {
                let w1 = weight(p, -h, h);
                for &q in &support {
                    for &r in &support {
                        let s = p + q + r;
                        if s.abs() > h {
                            continue;
                        }
                        let rest = s - p;
                        let w2 = weight(q, (-h).max(rest - h), h.min(rest + h));
                        let (ip, iq, ir) = (self.idx(p), self.idx(q), self.idx(r));
                        let term =
                            amp[ip] * amp[iq] * amp[ir] * (w1 * w2 * self.c[(ip * n + iq) * n + ir] * dk2);
                        out[self.idx(s)] = out[self.idx(s)] + term;
                    }
                }
            }
        } else {
            let rev: Vec<T> = amp.iter().rev().copied().collect();
            for (is, o) in out.iter_mut().enumerate() {
                let mut acc = T::default();
                for ip in 0..n {
                    let sp = self.quartet_spans[is * n + ip];
                    if sp.len == 0 || amp[ip].is_zero() {
                        continue;
                    }
                    let inner = dot3(
                        &self.quartet_coef[sp.off..sp.off + sp.len],
                        &amp[sp.x0..],
                        &rev[sp.y0..],
                    );
                    acc = acc + amp[ip] * inner;
                }
                *o = acc;
            }
        }
    }

    fn nonlinear<T: Amp>(&self, amp: &[T], out: &mut [T], scratch: &mut [T]) {
        self.triad(amp, out);
        self.quartet(amp, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o = *o + *s;
        }
    }

    fn residual<T: Amp>(&self, amp: &[T]) -> f64 {
        let mut nl = vec![T::default(); self.n];
        let mut scratch = vec![T::default(); self.n];
        self.nonlinear(amp, &mut nl, &mut scratch);
        (0..self.n).fold(0.0f64, |m, i| m.max((amp[i] * self.a[i] + nl[i]).abs())) * self.dk
    }

    fn apply_mask<T: Amp>(mask: Option<&[bool]>, x: &mut [T]) {
        if let Some(mask) = mask {
            for (v, &keep) in x.iter_mut().zip(mask) {
                if !keep {
                    *v = T::default();
                }
            }
        }
    }

    /// One implicit Euler step; returns the new amplitudes.
    fn step<T: Amp>(&self, prev: &[T], dt: f64, params: &EvolutionParams, mask: Option<&[bool]>, t: f64) -> Result<Vec<T>> {
        let n = self.n;
        let mut x = prev.to_vec();
        let mut next = vec![T::default(); n];
        let mut nl = vec![T::default(); n];
        let mut scratch = vec![T::default(); n];
        let mut update = f64::INFINITY;
        for _ in 0..params.picard_max {
            self.nonlinear(&x, &mut nl, &mut scratch);
            for i in 0..n {
                next[i] = (prev[i] + nl[i] * dt) * (1.0 / (1.0 - dt * self.a[i]));
            }
            Self::apply_mask(mask, &mut next);
            let mut scale = 1.0f64;
            update = 0.0;
            for i in 0..n {
                let d = (next[i] + x[i] * -1.0).abs();
                // NaN must not be swallowed by max.
                update = if d.is_nan() { f64::NAN } else { update.max(d) };
                scale = scale.max(next[i].abs());
            }
            if !update.is_finite() || !scale.is_finite() {
                return Err(Error::StepFailure {
                    t,
                    dt,
                    iterations: params.picard_max,
                    update,
                });
            }
            core::mem::swap(&mut x, &mut next);
            if update <= params.picard_tol * scale {
                return Ok(x);
            }
        }
        Err(Error::StepFailure {
            t,
            dt,
            iterations: params.picard_max,
            update,
        })
    }
}

impl Engine<'_> {
    /// One step of `dt`; when the fixed-point iteration fails, the step is
    /// retried as two half steps, at most `halvings` levels deep.
    fn step_halving<T: Amp>(
        &self,
        prev: &[T],
        dt: f64,
        params: &EvolutionParams,
        mask: Option<&[bool]>,
        t: f64,
        halvings: u32,
    ) -> Result<Vec<T>> {
        match self.step(prev, dt, params, mask, t) {
            Err(Error::StepFailure { .. }) if halvings > 0 => {
                let h = 0.5 * dt;
                let mid = self.step_halving(prev, h, params, mask, t, halvings - 1)?;
                self.step_halving(&mid, h, params, mask, t + h, halvings - 1)
            }
            r => r,
        }
    }
}

fn check_grid(state: &SpectrumState, tables: &KernelTables) -> Result<()> {
    if state.kgrid != tables.kgrid || state.amplitudes.len() != tables.n() {
        return Err(Error::GridMismatch(alloc::format!(
            "state on {} points (dk = {}), tables on {} points (dk = {})",
            state.amplitudes.len(),
            state.kgrid.dk,
            tables.n(),
            tables.kgrid.dk
        )));
    }
    Ok(())
}

/// `I1(k)` for the current state.
pub fn triad_integral(state: &SpectrumState, tables: &KernelTables) -> Result<Vec<Complex64>> {
    check_grid(state, tables)?;
    let mut out = vec![Complex64::default(); tables.n()];
    Engine::new(tables).triad(&state.amplitudes, &mut out);
    Ok(out)
}

/// `I2(k)` for the current state.
pub fn quartet_integral(state: &SpectrumState, tables: &KernelTables) -> Result<Vec<Complex64>> {
    check_grid(state, tables)?;
    let mut out = vec![Complex64::default(); tables.n()];
    Engine::new(tables).quartet(&state.amplitudes, &mut out);
    Ok(out)
}

/// `max_k |a A + I1 + I2| dk`.
pub fn equilibrium_residual(state: &SpectrumState, tables: &KernelTables) -> Result<f64> {
    check_grid(state, tables)?;
    let e = Engine::new(tables);
    Ok(if state.is_real() {
        let re: Vec<f64> = state.amplitudes.iter().map(|a| a.re).collect();
        e.residual(&re)
    } else {
        e.residual(&state.amplitudes)
    })
}

/// Stepper bound to one set of tables.
pub struct Stepper<'a> {
    engine: Engine<'a>,
    params: EvolutionParams,
    mask: Option<Vec<bool>>,
}

impl<'a> Stepper<'a> {
    pub fn new(tables: &'a KernelTables, params: &EvolutionParams) -> Result<Self> {
        params.validate(tables)?;
        let mask = params.mask.as_ref().map(|keep| {
            let mut m = vec![false; tables.n()];
            keep.iter().for_each(|&i| m[i] = true);
            m
        });
        Ok(Self {
            engine: Engine::new(tables),
            params: params.clone(),
            mask,
        })
    }

    /// Advances the state by one step and re-imposes Hermitian symmetry.
    pub fn step(&self, state: &mut SpectrumState) -> Result<()> {
        let dt = self.params.dt;
        let mask = self.mask.as_deref();
        let mut next: Vec<Complex64> = if state.is_real() {
            let re: Vec<f64> = state.amplitudes.iter().map(|a| a.re).collect();
            self.engine
                .step_halving(&re, dt, &self.params, mask, state.t, self.params.max_halvings)?
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect()
        } else {
            self.engine
                .step_halving(&state.amplitudes, dt, &self.params, mask, state.t, self.params.max_halvings)?
        };
        let n = next.len();
        let scale = next.iter().fold(1.0f64, |m, a| m.max(a.norm()));
        let mut drift = 0.0f64;
        for i in 0..n / 2 + 1 {
            let m = n - 1 - i;
            drift = drift.max((next[i] - next[m].conj()).norm());
            let avg = (next[i] + next[m].conj()) * 0.5;
            next[i] = avg;
            next[m] = avg.conj();
        }
        if drift > 1e-12 * scale {
            return Err(Error::SymmetryDrift { t: state.t, drift });
        }
        state.amplitudes = next;
        state.t += dt;
        state.step += 1;
        Ok(())
    }

    pub fn residual(&self, state: &SpectrumState) -> f64 {
        if state.is_real() {
            let re: Vec<f64> = state.amplitudes.iter().map(|a| a.re).collect();
            self.engine.residual(&re)
        } else {
            self.engine.residual(&state.amplitudes)
        }
    }

    pub fn params(&self) -> &EvolutionParams {
        &self.params
    }
}

/// One implicit Euler step.
pub fn step(state: &SpectrumState, tables: &KernelTables, params: &EvolutionParams) -> Result<SpectrumState> {
    check_grid(state, tables)?;
    let mut s = state.clone();
    Stepper::new(tables, params)?.step(&mut s)?;
    Ok(s)
}

/// Steps until the residual drops below `equil_tol` or `t_max` is reached,
/// calling `on_step` after every step. Returns the final state and report.
pub fn evolve_with<F>(
    initial: SpectrumState,
    tables: &KernelTables,
    params: &EvolutionParams,
    mut on_step: F,
) -> Result<(SpectrumState, EquilibriumReport)>
where
    F: FnMut(&SpectrumState) -> Result<()>,
{
    check_grid(&initial, tables)?;
    let stepper = Stepper::new(tables, params)?;
    let mut state = initial;
    let residual = stepper.residual(&state);
    if residual <= params.equil_tol {
        let report = EquilibriumReport::from_state(&state, residual, Termination::Converged);
        return Ok((state, report));
    }
    let dk = tables.kgrid.dk;
    let mut residual = residual;
    while state.t < params.t_max - 0.5 * params.dt {
        let before = state.amplitudes.clone();
        stepper.step(&mut state)?;
        on_step(&state)?;
        // The step itself estimates the residual; confirm exactly when small.
        let estimate = before
            .iter()
            .zip(&state.amplitudes)
            .fold(0.0f64, |m, (a, b)| m.max((b - a).norm()))
            * dk
            / params.dt;
        if estimate <= 10.0 * params.equil_tol {
            residual = stepper.residual(&state);
            if residual <= params.equil_tol {
                let report = EquilibriumReport::from_state(&state, residual, Termination::Converged);
                return Ok((state, report));
            }
        } else {
            residual = estimate;
        }
    }
    let residual = stepper.residual(&state).min(residual.max(0.0));
    let report = EquilibriumReport::from_state(&state, residual, Termination::Horizon);
    Ok((state, report))
}

/// Evolves and keeps every `sample_every`-th state (plus the first and last).
pub fn evolve(
    initial: SpectrumState,
    tables: &KernelTables,
    params: &EvolutionParams,
    sample_every: u64,
) -> Result<(Vec<SpectrumState>, EquilibriumReport)> {
    let every = sample_every.max(1);
    let mut samples = vec![initial.clone()];
    let (last, report) = evolve_with(initial, tables, params, |s| {
        if s.step % every == 0 {
            samples.push(s.clone());
        }
        Ok(())
    })?;
    if samples.last().map(|s| s.step) != Some(last.step) {
        samples.push(last);
    }
    Ok((samples, report))
}

/// How a seeded wave ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionOutcome {
    StableAsSeeded,
    DecayedToHarmonic,
    DecayedToBandInterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub seed: f64,
    pub dominant_k: f64,
    pub amplitude: f64,
    pub outcome: SelectionOutcome,
    pub report: EquilibriumReport,
}

/// Single-seed runs: each seed gets `density`, every other point `background`.
pub fn selection_sweep<E: Executor>(
    tables: &KernelTables,
    params: &EvolutionParams,
    seeds: &[f64],
    density: f64,
    background: f64,
    exec: &E,
) -> Result<Vec<SelectionRow>> {
    let kg = tables.kgrid;
    let rows = exec.map(seeds.len(), |i| -> Result<SelectionRow> {
        let seed = seeds[i];
        let init = SpectrumState::seeded(kg, &[(seed, density)], background)?;
        let (_, report) = evolve_with(init, tables, params, |_| Ok(()))?;
        let kf = report.dominant_k;
        let close = |x: f64| (kf - x).abs() < 0.5 * kg.dk;
        let outcome = if close(seed) {
            SelectionOutcome::StableAsSeeded
        } else if (2..=8).any(|m| close(m as f64 * seed)) {
            SelectionOutcome::DecayedToHarmonic
        } else {
            SelectionOutcome::DecayedToBandInterior
        };
        Ok(SelectionRow {
            seed,
            dominant_k: kf,
            amplitude: report.amplitude_at(&kg, kf).unwrap_or(0.0),
            outcome,
            report,
        })
    });
    rows.into_iter().collect()
}
