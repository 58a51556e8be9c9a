use std::f64::consts::PI;
use std::sync::Arc;

use mkg_lab::evolve::{startup, Startup};
use mkg_lab::initdata::{Coulomb, DataProfile, FreeWave, InitialSlice, ProfileFamily};
use mkg_lab::nullgrid::{GridSpec, NullGrid};
use proptest::prelude::*;

fn grid(v_max: f64, n: usize) -> NullGrid {
    NullGrid::new(GridSpec { v_max, n, r_foliation: 2.0 }).unwrap()
}

#[test]
fn zero_amplitude_has_no_energy_or_charge() {
    let g = grid(32.0, 512);
    let s = InitialSlice::from_profile(DataProfile { amplitude: 0.0, ..Default::default() }, &g, 1.0).unwrap();
    assert_eq!(s.q0, 0.0);
    assert_eq!(s.weighted_energy(1.0).unwrap(), 0.0);
}

#[test]
fn zero_winding_is_chargeless_with_positive_energy() {
    let g = grid(32.0, 512);
    let s = InitialSlice::from_profile(DataProfile { winding: 0, ..Default::default() }, &g, 1.0).unwrap();
    assert_eq!(s.q0, 0.0);
    assert!(s.weighted_energy(1.0).unwrap() > 0.0);
}

#[test]
fn gaussian_charge_matches_closed_form() {
    // q₀ = -mλ ∫ r² e^{-2(r-6)²} dr = -√(π/2) (6² + 1/4), the tail below r = 0 being e^{-72}.
    let exact = -(PI / 2.0).sqrt() * 36.25;
    let g = grid(32.0, 2048);
    let p = DataProfile { family: ProfileFamily::Gaussian, ..Default::default() };
    let s = InitialSlice::from_profile(p, &g, 1.0).unwrap();
    assert!(((s.q0 - exact) / exact).abs() <= 1e-6, "{} vs {exact}", s.q0);
}

#[test]
fn compact_bump_charge_matches_closed_form() {
    // ∫₅⁷ r² (1 - (r-6)²)⁸ dr = 36 B + C with B = ∫(1-x²)⁸ = 2·(16!!)/(17!!), C = ∫x²(1-x²)⁸ = B/19.
    let b = 2.0 * (1..=8).map(|k| (2 * k) as f64).product::<f64>() / (1..=8).map(|k| (2 * k + 1) as f64).product::<f64>();
    let exact = -(36.0 * b + b / 19.0);
    let g = grid(32.0, 2048);
    let s = InitialSlice::from_profile(DataProfile::default(), &g, 1.0).unwrap();
    assert!(((s.q0 - exact) / exact).abs() <= 1e-10, "{} vs {exact}", s.q0);
    assert!((s.q0 + 21.598).abs() < 1e-3);
}

/// Composite Simpson with `m` (even) intervals.
fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn weighted_energy_matches_independent_quadrature() {
    // Bump on [5, 7]: |ψ₀' - ψ₀/r|² = r² s'², |π₀|² = r² s², and q̃ = -q₀ on [R, 5].
    let s = |r: f64| {
        let x = r - 6.0;
        if x.abs() >= 1.0 { 0.0 } else { (1.0 - x * x).powi(4) }
    };
    let s1 = |r: f64| {
        let x = r - 6.0;
        if x.abs() >= 1.0 { 0.0 } else { -8.0 * x * (1.0 - x * x).powi(3) }
    };
    let gamma0 = 1.0;
    let w = |r: f64| (1.0 + r).powf(1.0 + gamma0);
    let q = |r: f64| -simpson_fn(|x| x * x * s(x).powi(2), 5.0, r.clamp(5.0, 7.0), 2000);
    let q0 = q(7.0);
    let scalar = simpson_fn(|r| w(r) * r * r * (s1(r).powi(2) + s(r).powi(2)), 5.0, 7.0, 20000);
    let field = simpson_fn(|r| w(r) * q0 * q0 / (r * r), 2.0, 5.0, 20000)
        + simpson_fn(|r| w(r) * (q(r) - q0).powi(2) / (r * r), 5.0, 7.0, 2000);
    let exact = 4.0 * PI * (scalar + field);

    let g = grid(32.0, 2048);
    let e = InitialSlice::from_profile(DataProfile::default(), &g, gamma0).unwrap().weighted_energy(gamma0).unwrap();
    assert!(((e - exact) / exact).abs() <= 1e-5, "{e} vs {exact}");
}

#[test]
fn weighted_energy_grows_with_the_weight() {
    let g = grid(32.0, 1024);
    let s = InitialSlice::from_profile(DataProfile::default(), &g, 1.0).unwrap();
    let es: Vec<f64> = [0.1, 0.3, 0.5, 0.8, 1.0].iter().map(|&x| s.weighted_energy(x).unwrap()).collect();
    assert!(es.windows(2).all(|w| w[1] >= w[0]), "{es:?}");
    assert!(s.weighted_energy(0.0).is_err());
    assert!(s.weighted_energy(1.5).is_err());
}

#[test]
fn slowly_decaying_tails_are_rejected() {
    let g = grid(32.0, 512);
    let p = DataProfile { family: ProfileFamily::PolynomialTail, tail_exponent: 2.0, center: 0.0, ..Default::default() };
    let e = InitialSlice::from_profile(p, &g, 1.0).err().unwrap();
    assert!(e.to_string().contains("diverge"), "{e}");
}

#[test]
fn bump_reaching_the_origin_is_rejected() {
    let g = grid(32.0, 512);
    let p = DataProfile { center: 1.0, width: 1.0, ..Default::default() };
    assert!(InitialSlice::from_profile(p, &g, 1.0).is_err());
}

#[test]
fn gauss_constraint_residual_is_second_order() {
    let res: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| InitialSlice::from_profile(DataProfile::default(), &grid(32.0, n), 1.0).unwrap().gauss_residual())
        .collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.4..=4.6).contains(&ratio), "{res:?}");
    }
}

#[test]
fn coulomb_slice_carries_the_point_charge() {
    let g = grid(16.0, 256);
    let s = InitialSlice::build(Arc::new(Coulomb { q0: -4.0 }), &g).unwrap();
    assert!(s.q.iter().all(|&q| q == -4.0));
    assert_eq!(s.charge_by_quadrature(), -4.0);
}

fn t_equals(g: &NullGrid, t: f64) -> Vec<(usize, usize)> {
    let mut out = vec![];
    for a in 0..=g.n() {
        for b in g.row_start(a)..=g.n() {
            if (g.t(a, b) - t).abs() < 1e-12 {
                out.push((a, b));
            }
        }
    }
    out
}

#[test]
fn free_wave_startup_error_is_second_order_or_better() {
    let fw = FreeWave::default();
    for method in [Startup::Taylor2, Startup::DAlembert] {
        let err = |n: usize| {
            let g = grid(16.0, n);
            let s = InitialSlice::build(Arc::new(fw), &g).unwrap();
            let st = startup(&g, &s, method);
            t_equals(&g, g.h())
                .into_iter()
                .map(|(a, b)| (st.psi[g.idx(a, b)].re - fw.psi(g.u(a), g.v(b))).abs())
                .fold(0.0, f64::max)
        };
        let (e0, e1) = (err(256), err(512));
        assert!(e0 / e1 >= 3.4, "{method:?}: {e0} {e1}");
    }
}

#[test]
fn zero_data_starts_from_zero_rows() {
    let g = grid(16.0, 128);
    let p = DataProfile { amplitude: 0.0, ..Default::default() };
    let s = InitialSlice::from_profile(p, &g, 1.0).unwrap();
    let st = startup(&g, &s, Startup::Taylor2);
    assert!(st.psi.iter().all(|z| z.norm() == 0.0));
    assert!(st.q.iter().all(|&q| q == 0.0));
    assert!(st.a_u.iter().all(|&a| a == 0.0));
}

#[test]
fn coulomb_startup_rows_are_static() {
    let g = grid(16.0, 128);
    let s = InitialSlice::build(Arc::new(Coulomb { q0: 2.5 }), &g).unwrap();
    let st = startup(&g, &s, Startup::Taylor2);
    for t in [0.0, g.h()] {
        for (a, b) in t_equals(&g, t) {
            let i = g.idx(a, b);
            assert_eq!(st.q[i], 2.5);
            assert_eq!(st.psi[i].norm(), 0.0);
        }
    }
}

proptest! {
    #[test]
    fn charge_agrees_between_quadratures(
        amp in 0.1f64..2.0,
        center in 4.0f64..10.0,
        width in 0.5f64..2.0,
        winding in -3i32..=3,
        lambda in 0.1f64..2.0,
    ) {
        let g = grid(32.0, 1024);
        let p = DataProfile { amplitude: amp, center, width, winding, lambda, ..Default::default() };
        let s = InitialSlice::from_profile(p, &g, 1.0).unwrap();
        let scale = s.q0.abs().max(1e-300);
        prop_assert!((s.charge_by_quadrature() - s.q0).abs() <= 1e-10 * scale.max(1.0));
        prop_assert!(s.q0 * (winding as f64) <= 0.0);
    }
}
