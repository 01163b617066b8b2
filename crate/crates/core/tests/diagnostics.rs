use std::f64::consts::PI;
use std::sync::OnceLock;

use couette_core::diagnostics::{
    couette_wall_shear, perturbation_kinetic_energy, reconstruct_velocity, torque_envelope,
    torque_from_amplitudes, torque_ratio, torque_vs_reynolds, Truncation,
};
use couette_core::evolution::{evolve_with, EvolutionParams, SpectrumState};
use couette_core::kernels::{build_kernels, KernelBuild, TableOptions};
use couette_core::{Error, FlowConfig, KGrid, RadialGrid, Serial};
use num_complex::Complex64;

fn cfg() -> FlowConfig {
    FlowConfig::new(0.5, 0.0, 88.1).unwrap()
}

fn grid() -> RadialGrid {
    RadialGrid::new(24, 1.0, 2.0).unwrap()
}

fn kgrid() -> KGrid {
    KGrid::new(6.0, 0.25).unwrap()
}

fn build() -> &'static KernelBuild {
    static B: OnceLock<KernelBuild> = OnceLock::new();
    B.get_or_init(|| build_kernels(&cfg(), &kgrid(), &grid(), TableOptions::default(), &Serial).unwrap())
}

fn state_with(entries: &[(f64, Complex64)]) -> SpectrumState {
    let kg = kgrid();
    let mut s = SpectrumState::zeros(kg);
    for &(k, a) in entries {
        let i = kg.index_of(k).unwrap();
        s.amplitudes[i] = a;
        s.amplitudes[kg.mirror(i)] = a.conj();
    }
    s
}

fn z_period(k: f64, nz: usize) -> Vec<f64> {
    (0..nz).map(|j| 2.0 * PI / k * j as f64 / nz as f64).collect()
}

/// Torque ratio from the reconstructed, z-averaged azimuthal velocity.
fn torque_from_field(s: &SpectrumState, order: Truncation, period_k: f64) -> f64 {
    let g = grid();
    let f = reconstruct_velocity(s, build(), &g, &cfg(), &g.nodes, &z_period(period_k, 32), order).unwrap();
    let base = cfg().base_flow();
    let dist: Vec<f64> = f
        .mean_azimuthal()
        .iter()
        .zip(&g.nodes)
        .map(|(v, &r)| v - base.velocity(r))
        .collect();
    1.0 + g.derivative(&dist)[0] / couette_wall_shear(&cfg())
}

#[test]
fn couette_wall_shear_closed_form() {
    // eta = 1/2, mu = 0: V = -r/3 + 4/(3r), so r d(V/r)/dr = -8/(3 r^2).
    assert!((couette_wall_shear(&cfg()) + 8.0 / 3.0).abs() < 1e-14);
    let t = &build().tables;
    let rep = torque_from_amplitudes(t, &cfg(), 3.0, 1.0, 0.0).unwrap();
    assert!((rep.mean_term + 0.375 * t.wall_dv1_zero).abs() < 1e-14);
    assert!(torque_from_amplitudes(t, &cfg(), 3.1, 1.0, 0.0).is_err());
}

#[test]
fn wave_pair_torque_matches_reconstruction() {
    let t = &build().tables;
    let wave = 0.08;
    let s = state_with(&[(3.0, Complex64::from_polar(wave / kgrid().dk, 0.4))]);
    let formula = torque_from_amplitudes(t, &cfg(), 3.0, 0.0, wave).unwrap();
    let field = torque_from_field(&s, Truncation::Second, 3.0);
    assert!((formula.ratio - field).abs() < 1e-6, "{} vs {field}", formula.ratio);
    assert!(formula.pair_term > 0.0);
}

#[test]
fn mean_flow_torque_matches_reconstruction() {
    let t = &build().tables;
    let mean = -0.03;
    let s = state_with(&[(0.0, Complex64::new(mean / kgrid().dk, 0.0))]);
    let formula = torque_from_amplitudes(t, &cfg(), 3.0, mean, 0.0).unwrap();
    let field = torque_from_field(&s, Truncation::First, 1.0);
    assert!((formula.ratio - field).abs() < 1e-6, "{} vs {field}", formula.ratio);
}

#[test]
fn kinetic_energy_matches_field_quadrature() {
    let t = &build().tables;
    let p = EvolutionParams::default();
    let init = SpectrumState::seeded(kgrid(), &[(3.0, 0.1)], 0.0).unwrap();
    let (_, report) = evolve_with(init, t, &p, |_| Ok(())).unwrap();
    let ke = perturbation_kinetic_energy(&report, &kgrid()).unwrap();
    let wave = report.amplitude_at(&kgrid(), 3.0).unwrap();
    let s = state_with(&[(3.0, Complex64::new(wave / kgrid().dk, 0.0))]);
    let g = grid();
    let nz = 16;
    let f = reconstruct_velocity(&s, build(), &g, &cfg(), &g.nodes, &z_period(3.0, nz), Truncation::First).unwrap();
    let base = cfg().base_flow();
    let mut total = 0.0;
    for iz in 0..nz {
        let dens: Vec<f64> = g
            .nodes
            .iter()
            .enumerate()
            .map(|(ir, &r)| {
                let [u, v, w] = f.at(iz, ir);
                let v = v - base.velocity(r);
                0.5 * r * (u * u + v * v + w * w)
            })
            .collect();
        total += g.integrate(&dens) / nz as f64;
    }
    assert!((total - ke).abs() < 1e-6 * ke, "{total} vs {ke}");
    assert!(f.imag_residue < 1e-14);
}

#[test]
fn torque_of_an_equilibrium_uses_its_dominant_wave() {
    let t = &build().tables;
    let init = SpectrumState::seeded(kgrid(), &[(3.5, 0.1)], 0.0).unwrap();
    let (_, report) = evolve_with(init, t, &EvolutionParams::default(), |_| Ok(())).unwrap();
    let rep = torque_ratio(&report, t, &cfg()).unwrap();
    assert_eq!(rep.k_f, 3.5);
    assert!(rep.ratio > 1.0);
    assert!((rep.ratio - 1.0 - rep.mean_term - rep.pair_term).abs() < 1e-15);
}

#[test]
fn reconstruction_rejects_points_outside_the_gap() {
    let g = grid();
    let s = state_with(&[(3.0, Complex64::new(0.1, 0.0))]);
    let err = reconstruct_velocity(&s, build(), &g, &cfg(), &[0.9], &[0.0], Truncation::First).unwrap_err();
    assert!(matches!(err, Error::Domain { .. }));
}

#[test]
fn reconstruction_satisfies_wall_conditions() {
    let g = grid();
    let s = state_with(&[(3.0, Complex64::new(0.3, 0.1)), (6.0, Complex64::new(0.05, 0.0))]);
    let f = reconstruct_velocity(&s, build(), &g, &cfg(), &[1.0, 2.0], &z_period(3.0, 8), Truncation::Second).unwrap();
    for iz in 0..8 {
        let [u, v, w] = f.at(iz, 0);
        assert!(u.abs() < 1e-12 && (v - 1.0).abs() < 1e-12 && w.abs() < 1e-12);
        let [u, v, w] = f.at(iz, 1);
        assert!(u.abs() < 1e-12 && v.abs() < 1e-12 && w.abs() < 1e-12);
    }
}

#[test]
fn envelope_spans_rows() {
    let t = &build().tables;
    let rows: Vec<_> = [(0.01, 0.05), (-0.02, 0.08), (0.0, 0.02)]
        .iter()
        .map(|&(m, w)| torque_from_amplitudes(t, &cfg(), 3.0, m, w).unwrap())
        .collect();
    let (lo, hi) = torque_envelope(&rows).unwrap();
    assert!(rows.iter().all(|r| r.ratio >= lo && r.ratio <= hi));
    assert!(torque_envelope(&[]).is_none());
}

#[test]
fn torque_grows_with_reynolds_number() {
    let rs = [60.0, 75.0, 88.1];
    let samples =
        torque_vs_reynolds(&cfg(), &rs, &grid(), &kgrid(), 3.25, 0.1, &EvolutionParams::default(), &Serial)
            .unwrap();
    assert!((samples[0].torque.ratio - 1.0).abs() < 1e-6);
    assert!(samples[0].amplitude < 1e-6);
    assert!(samples[1].torque.ratio > samples[0].torque.ratio);
    assert!(samples[2].torque.ratio > samples[1].torque.ratio);
}
