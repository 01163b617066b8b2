mod oracles;

use std::sync::OnceLock;

use couette_core::kernels::{
    build_kernels, quadratic_forcing, second_order_field, Field, KernelBuild, KernelTables,
    TableOptions,
};
use couette_core::stability::{
    adjoint_mode, growth_curve, leading_mode, PhaseConvention,
};
use couette_core::{Error, FlowConfig, KGrid, RadialGrid, Serial};

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

fn flipped() -> &'static KernelTables {
    static B: OnceLock<KernelTables> = OnceLock::new();
    B.get_or_init(|| {
        let opts = TableOptions {
            phase: PhaseConvention::MidGapAzimuthalNegative,
        };
        build_kernels(&cfg(), &kgrid(), &grid(), opts, &Serial).unwrap().tables
    })
}

#[test]
fn forcing_matches_pseudo_spectral_advection() {
    let (cfg, g) = (cfg(), grid());
    for (k1, k2) in [(1, 2), (2, 3), (4, 1)] {
        let err = oracles::forcing_mismatch(&cfg, &g, k1, k2);
        assert!(err < 1e-8, "({k1}, {k2}): relative mismatch {err}");
    }
}

#[test]
fn zero_mode_gives_zero_forcing() {
    let (cfg, g) = (cfg(), grid());
    let m = leading_mode(&cfg, 3.0, &g).unwrap();
    let f = quadratic_forcing(&cfg, &g, &m, &m.zero_like()).unwrap();
    assert_eq!(f.max_abs(), 0.0);
}

#[test]
fn forcing_is_symmetric_in_its_arguments() {
    let (cfg, g) = (cfg(), grid());
    let a = leading_mode(&cfg, 2.5, &g).unwrap();
    let b = leading_mode(&cfg, -1.25, &g).unwrap();
    let f = quadratic_forcing(&cfg, &g, &a, &b).unwrap();
    let h = quadratic_forcing(&cfg, &g, &b, &a).unwrap();
    assert_eq!(f, h);
}

#[test]
fn forcing_rejects_grid_mismatch() {
    let (cfg, g) = (cfg(), grid());
    let a = leading_mode(&cfg, 3.0, &g).unwrap();
    let b = leading_mode(&cfg, 3.0, &RadialGrid::new(20, 1.0, 2.0).unwrap()).unwrap();
    assert!(matches!(
        quadratic_forcing(&cfg, &g, &a, &b),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn conjugate_pair_has_no_axial_mean_forcing() {
    let (cfg, g) = (cfg(), grid());
    let a = leading_mode(&cfg, 3.0, &g).unwrap();
    let f = quadratic_forcing(&cfg, &g, &a, &a.mirrored()).unwrap();
    let ax = f.axial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(ax < 1e-12 * f.max_abs());
}

#[test]
fn second_order_field_is_pinned_and_solves_the_forced_problem() {
    let (cfg, g) = (cfg(), grid());
    let m1 = leading_mode(&cfg, 2.0, &g).unwrap();
    let m2 = leading_mode(&cfg, 1.5, &g).unwrap();
    let ms = leading_mode(&cfg, 3.5, &g).unwrap();
    let adj = adjoint_mode(&cfg, &g, &ms).unwrap();
    let (b0, u2) = second_order_field(&cfg, &g, &m1, &m2, &ms, &adj).unwrap();
    let (b0s, u2s) = second_order_field(&cfg, &g, &m2, &m1, &ms, &adj).unwrap();
    assert_eq!(b0, b0s);
    assert_eq!(u2.field, u2s.field);

    let pin = adj.project(&g, &u2.field.u, &u2.field.v, &u2.field.w);
    let size = u2.field.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(pin.abs() < 1e-8 * size.max(1.0), "pin {pin}");

    // b0 is the adjoint projection of the forcing.
    let f = quadratic_forcing(&cfg, &g, &m1, &m2).unwrap();
    let proj = adj.project(&g, &f.radial, &f.azimuthal, &f.axial);
    assert!((proj - b0).abs() < 1e-10 * b0.abs());
}

#[test]
fn mean_flow_correction_has_no_radial_velocity() {
    let (cfg, g) = (cfg(), grid());
    let m = leading_mode(&cfg, 3.0, &g).unwrap();
    let m0 = leading_mode(&cfg, 0.0, &g).unwrap();
    let adj = adjoint_mode(&cfg, &g, &m0).unwrap();
    let (_, u2) = second_order_field(&cfg, &g, &m, &m.mirrored(), &m0, &adj).unwrap();
    // Du + u/r = 0 with u(r_i) = 0 integrates to u = 0.
    assert!(u2.field.u.iter().all(|&x| x == 0.0));
    assert!(u2.field.w.iter().all(|&x| x == 0.0));
    assert!(u2.field.v.iter().any(|&x| x != 0.0));
}

#[test]
fn second_order_field_needs_the_sum_mode() {
    let (cfg, g) = (cfg(), grid());
    let m1 = leading_mode(&cfg, 2.0, &g).unwrap();
    let ms = leading_mode(&cfg, 3.0, &g).unwrap();
    let adj = adjoint_mode(&cfg, &g, &ms).unwrap();
    let err = second_order_field(&cfg, &g, &m1, &m1, &ms, &adj).unwrap_err();
    assert!(matches!(err.root(), Error::Dependency(_)));
}

#[test]
fn table_sizes_follow_grid_arithmetic() {
    let t = &build().tables;
    let n = t.n();
    assert_eq!(n, 49);
    assert_eq!(t.a.len(), n);
    assert_eq!(t.b0.len(), n * n);
    assert_eq!(t.c.len(), n * n * n);
    // Pairs with an off-grid sum carry nothing.
    let last = n - 1;
    assert_eq!(t.b(last, last), 0.0);
    assert!(t.sum_index(last, last).is_none());
    assert_eq!(t.sum_index(last, 0), Some(n / 2));
}

#[test]
fn growth_column_matches_growth_curve() {
    let t = &build().tables;
    let ks = kgrid().wavenumbers();
    let pos: Vec<f64> = ks.iter().copied().filter(|&k| k >= 0.0).collect();
    let curve = growth_curve(&cfg(), &pos, &grid()).unwrap();
    let h = kgrid().half;
    for (j, s) in curve.iter().enumerate() {
        assert_eq!(t.a[h + j].to_bits(), s.to_bits());
        assert_eq!(t.a[h - j].to_bits(), s.to_bits());
    }
}

#[test]
fn kernels_have_exchange_and_conjugation_symmetry() {
    let t = &build().tables;
    let kg = kgrid();
    let n = t.n();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(t.b(i, j), t.b(j, i));
            let (mi, mj) = (kg.mirror(i), kg.mirror(j));
            let scale = t.b(i, j).abs().max(1.0);
            assert!((t.b(i, j) - t.b(mi, mj)).abs() < 1e-9 * scale);
            for l in 0..n {
                let c = t.c(i, j, l);
                for p in [t.c(i, l, j), t.c(j, i, l), t.c(j, l, i), t.c(l, i, j), t.c(l, j, i)] {
                    assert_eq!(c, p);
                }
                let cm = t.c(mi, mj, kg.mirror(l));
                assert!((c - cm).abs() < 1e-9 * c.abs().max(1.0));
            }
        }
    }
}

#[test]
fn landau_constant_is_negative_across_the_band() {
    let t = &build().tables;
    let kg = kgrid();
    for i in kg.index_of(1.75).unwrap()..=kg.index_of(5.5).unwrap() {
        let m = kg.mirror(i);
        let a1 = t.c(i, m, i) + t.c(m, i, i) + t.c(i, i, m);
        assert!(t.a[i] > 0.0);
        assert!(a1 < 0.0, "k = {}: a1 = {a1}", kg.k(i));
    }
}

#[test]
fn growth_mismatch_correction_vanishes_with_adjoint_orthogonal_fields() {
    // b1 carries <adj, U2>, which the uniqueness condition sets to zero.
    let t = &build().tables;
    let b0max = t.b0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let b1max = t.b1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(b1max < 1e-9 * b0max);
    assert_eq!(t.without_b1().b0, t.b0);
}

/// Third differences against local curvature along one grid line.
fn assert_smooth(line: &[f64], what: &str) {
    if line.len() < 4 {
        return;
    }
    let d2: Vec<f64> = line.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let mean = d2.iter().map(|x| x.abs()).sum::<f64>() / d2.len() as f64;
    let floor = 1e-9 * line.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..d2.len() - 1 {
        let d3 = (d2[i + 1] - d2[i]).abs();
        assert!(
            d3 <= 10.0 * (d2[i].abs() + mean) + floor,
            "{what}: jump at {i}: {d3} vs {} / {mean}",
            d2[i]
        );
    }
}

#[test]
fn kernels_are_smooth_along_grid_lines() {
    let t = &build().tables;
    let n = t.n();
    for j in 0..n {
        let valid: Vec<usize> = (0..n).filter(|&i| t.sum_index(i, j).is_some()).collect();
        let line: Vec<f64> = valid.iter().map(|&i| t.b(i, j)).collect();
        assert_smooth(&line, &format!("b(., {j})"));
        for l in (0..n).step_by(4) {
            let valid: Vec<usize> = (0..n)
                .filter(|&i| t.sum_index(i, j).and_then(|s| t.sum_index(s, l)).is_some())
                .collect();
            let line: Vec<f64> = valid.iter().map(|&i| t.c(i, j, l)).collect();
            assert_smooth(&line, &format!("c(., {j}, {l})"));
        }
    }
}

#[test]
fn phase_flip_negates_triads_and_keeps_quartets() {
    let t = &build().tables;
    let f = flipped();
    for (x, y) in t.b0.iter().zip(&f.b0) {
        assert!((x + y).abs() < 1e-9 * x.abs().max(1.0));
    }
    for (x, y) in t.c.iter().zip(&f.c) {
        assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
    }
    assert_eq!(t.a, f.a);
}

#[test]
fn wall_tables_come_from_the_fields() {
    let b = build();
    let kg = kgrid();
    let i = kg.index_of(3.0).unwrap();
    let u2 = b.second.get(i, kg.mirror(i));
    assert_eq!(b.tables.wall_dv2[i], u2.field.dv[0]);
    assert_eq!(b.tables.wall_dv2[i], b.tables.wall_dv2[kg.mirror(i)]);
    let m0 = b.modes.mode(0).unwrap();
    let f0 = Field::from_mode(&grid(), m0);
    assert_eq!(b.tables.wall_dv1_zero, f0.dv[0]);
}
