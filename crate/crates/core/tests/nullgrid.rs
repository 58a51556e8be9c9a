use std::f64::consts::PI;

use mkg_lab::nullgrid::{GridSpec, LeafKind, NullGrid, RegionSpec};
use proptest::prelude::*;

fn grid(v_max: f64, n: usize, r: f64) -> NullGrid {
    NullGrid::new(GridSpec { v_max, n, r_foliation: r }).unwrap()
}

#[test]
fn coordinates_of_a_lattice_point() {
    let g = grid(8.0, 16, 2.0);
    assert_eq!(g.h(), 1.0);
    let a = g.lattice_index(0.0).unwrap();
    let b = g.lattice_index(5.0).unwrap();
    assert!(g.contains(a, b));
    assert_eq!(g.r(a, b), 5.0);
    assert_eq!(g.t(a, b), 5.0);
}

#[test]
fn points_below_the_initial_slice_are_excluded() {
    let g = grid(8.0, 16, 2.0);
    let a = g.lattice_index(-5.0).unwrap();
    let b = g.lattice_index(4.0).unwrap();
    assert!(!g.contains(a, b));
}

#[test]
fn leaf_at_zero_starts_at_the_junction() {
    let g = grid(8.0, 16, 2.0);
    let l = g.leaf(0.0).unwrap();
    assert_eq!((l.u_tau, l.v_tau), (-1.0, 1.0));
    assert_eq!(l.kind, LeafKind::Interior);
    assert!(l.flat.is_some());
    assert_eq!(l.r1, 2.0);
}

#[test]
fn exterior_leaf_is_a_bare_cone() {
    let g = grid(8.0, 16, 2.0);
    let l = g.leaf(-4.0).unwrap();
    assert_eq!(l.kind, LeafKind::Exterior);
    assert_eq!((l.u_tau, l.v_tau), (-3.0, 3.0));
    assert_eq!(l.r1, 6.0);
    assert!(l.flat.is_none());
    let (a, b) = l.cone.points[0];
    assert_eq!((g.u(a), g.v(b)), (-3.0, 3.0));
    let (_, b_last) = *l.cone.points.last().unwrap();
    assert_eq!(g.v(b_last), 8.0);
}

#[test]
fn interior_leaves_have_flat_parts() {
    let g = grid(8.0, 16, 2.0);
    for tau in [0.0, 6.0] {
        let l = g.leaf(tau).unwrap();
        let flat = l.flat.as_ref().unwrap();
        for &(a, b) in &flat.points {
            assert_eq!(g.t(a, b), tau);
            assert!(g.r(a, b) <= 2.0);
        }
        assert_eq!(flat.points.first().map(|&(a, b)| g.r(a, b)), Some(0.0));
        assert_eq!(flat.points.last().map(|&(a, b)| g.r(a, b)), Some(2.0));
    }
}

#[test]
fn invalid_grids_are_rejected() {
    let bad = |v_max, n, r| NullGrid::new(GridSpec { v_max, n, r_foliation: r });
    assert!(bad(8.0, 16, 1.0).is_err());
    assert!(bad(8.0, 16, 0.5).is_err());
    assert!(bad(2.0, 16, 2.0).is_err());
    assert!(bad(8.0, 16, 3.0).is_err(), "R / h must be an even integer");
}

#[test]
fn exterior_region_volume_matches_closed_form() {
    // ∫₀^T ∫_{r₁+t}^{r₂-t} 4π r² dr dt with T = (r₂ - r₁)/2.
    let (r1, r2) = (4.0f64, 8.0f64);
    let m = 0.5 * (r1 + r2);
    let exact = PI / 3.0 * (r2.powi(4) + r1.powi(4) - 2.0 * m.powi(4));
    let g = grid(8.0, 256, 2.0);
    let region = g.region(RegionSpec::Exterior { r1, r2 }).unwrap();
    let vol = region.integrate(|a, b| 8.0 * PI * g.r(a, b).powi(2));
    assert!(((vol - exact) / exact).abs() <= 1e-3, "{vol} vs {exact}");
}

#[test]
fn constant_current_closes() {
    let g = grid(16.0, 128, 2.0);
    let specs = [
        RegionSpec::Slab { tau1: 0.0, tau2: 5.0 },
        RegionSpec::Slab { tau1: 2.0, tau2: 9.0 },
        RegionSpec::ConeSlab { tau1: 1.0, tau2: 7.0 },
        RegionSpec::Exterior { r1: 3.0, r2: 10.0 },
    ];
    for spec in specs {
        let region = g.region(spec).unwrap();
        let c = region.boundary_flux(|_, _| (1.3, -0.7));
        assert!(c.abs() < 1e-12, "{spec:?}: {c}");
    }
}

#[test]
fn leaf_quadrature_converges_at_second_order() {
    // Cone: ∫ sin v dv from v_τ to v_max. Flat part: ∫₀^R r² dr.
    let errs: Vec<(f64, f64)> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let g = grid(8.0, n, 2.0);
            let l = g.leaf(3.0).unwrap();
            let cone = l.cone.integrate(|_, b| g.v(b).sin());
            let cone_exact = l.v_tau.cos() - 8f64.cos();
            let flat = l.flat.as_ref().unwrap().integrate(|a, b| g.r(a, b).powi(2));
            ((cone - cone_exact).abs(), (flat - 8.0 / 3.0).abs())
        })
        .collect();
    for w in errs.windows(2) {
        for (e0, e1) in [(w[0].0, w[1].0), (w[0].1, w[1].1)] {
            let order = (e0 / e1).log2();
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }
}

#[test]
fn lattice_taus_respect_spacing_and_bounds() {
    let g = grid(16.0, 128, 2.0);
    let taus = g.lattice_taus(0.0, 10.0, 1.0);
    assert_eq!(taus.first(), Some(&0.0));
    assert_eq!(taus.last(), Some(&10.0));
    assert!(taus.windows(2).all(|w| (w[1] - w[0] - 1.0).abs() < 1e-12));
    for &t in &taus {
        assert!(g.leaf(t).is_ok());
    }
}

proptest! {
    #[test]
    fn every_lattice_point_satisfies_r_and_t_relations(a in 0usize..=64, b in 0usize..=64) {
        let g = grid(8.0, 64, 2.0);
        if g.contains(a, b) {
            let (u, v) = (g.u(a), g.v(b));
            prop_assert!((g.r(a, b) - (v - u)).abs() < 1e-12);
            prop_assert!((g.t(a, b) - (u + v)).abs() < 1e-12);
            prop_assert!(g.r(a, b) >= 0.0 && g.t(a, b) >= 0.0);
            prop_assert_eq!(g.try_idx(a as isize, b as isize), Some(g.idx(a, b)));
        } else {
            prop_assert!(g.try_idx(a as isize, b as isize).is_none());
        }
    }

    #[test]
    fn slab_boundaries_close_for_any_leaf_pair(t1 in 0usize..14, dt in 1usize..14) {
        let g = grid(16.0, 64, 2.0);
        let s = g.tau_step();
        let (tau1, tau2) = (t1 as f64 * s, (t1 + dt) as f64 * s);
        let region = g.region(RegionSpec::Slab { tau1, tau2 }).unwrap();
        prop_assert!(region.boundary_flux(|_, _| (1.0, 1.0)).abs() < 1e-12);
    }
}
