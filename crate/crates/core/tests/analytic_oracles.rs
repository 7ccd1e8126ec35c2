#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use uhlmann::analytic::{
    angle_integral, compute_angles, discrete_holonomy, interferometric_phase, phase_dominance_gap,
    uhlmann_phase, uhlmann_phase_arctan, uhlmann_phase_unitary, v_d, PathSpec,
};
use uhlmann::transport::transport_ode;

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err < tol || depth == 0 {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol / 2.0, depth - 1) + adaptive(f, m, b, tol / 2.0, depth - 1)
}

fn quadrature_angle(spec: &PathSpec, tau_k: f64, delta: f64) -> f64 {
    let k = 8.0 * spec.gamma_over_omega / 3.0;
    let r2 = spec.r0 * spec.r0;
    let f = move |t: f64| (1.0 - r2 * (-k * t).exp()).max(0.0).sqrt();
    0.5 * delta - 0.5 * adaptive(&f, tau_k, tau_k + delta, 1e-14, 40)
}

#[test]
fn angles_match_quadrature() {
    for &(g, r0) in &[
        (0.2, 1.0),
        (0.2, 0.5),
        (0.01, 1.0),
        (1.5, 0.9),
        (1e-4, 1.0),
        (0.7, 0.05),
    ] {
        for &phi in &[0.4, FRAC_PI_2, 2.7] {
            let s = PathSpec::new(phi, g, r0).unwrap();
            let a = compute_angles(&s);
            let q = [
                quadrature_angle(&s, 0.0, FRAC_PI_2),
                quadrature_angle(&s, FRAC_PI_2, phi),
                quadrature_angle(&s, phi + FRAC_PI_2, FRAC_PI_2),
            ];
            for (x, y) in [a.mu, a.kappa, a.chi].iter().zip(q) {
                assert!((x - y).abs() < 1e-12, "{s:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn closed_form_matches_discrete_transport() {
    for &(phi, g, r0) in &[
        (FRAC_PI_2, 0.0, 1.0),
        (FRAC_PI_2, 0.1, 1.0),
        (FRAC_PI_2, 0.5, 0.5),
        (2.5, 0.05, 0.8),
        (1.0, 1.0, 1.0),
    ] {
        let s = PathSpec::new(phi, g, r0).unwrap();
        let oracle = discrete_holonomy(&s, 100_000).unwrap();
        let analytic = uhlmann_phase(&s);
        assert!(
            (oracle.phase - analytic).abs() < 1e-3,
            "{s:?}: {} vs {analytic}",
            oracle.phase
        );
    }
}

#[test]
fn closed_form_matches_transport_ode() {
    for &(phi, g, r0) in &[(FRAC_PI_2, 0.1, 1.0), (3.0, 2.0, 0.3), (0.2, 0.0, 0.6)] {
        let s = PathSpec::new(phi, g, r0).unwrap();
        let v = transport_ode(&s, 0.0, s.duration(), 20_000).unwrap();
        let err = (v - v_d(&s)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{s:?}: {err:e}");
    }
}

#[test]
fn unitary_mixed_value() {
    let s = PathSpec::new(FRAC_PI_2, 0.0, 0.5).unwrap();
    let oracle = discrete_holonomy(&s, 100_000).unwrap().phase;
    let value = uhlmann_phase(&s);
    assert!((oracle - value).abs() < 1e-6);
    assert!((value - -0.058249173217756946).abs() < 1e-15);
}

#[test]
fn fig2_curve_values() {
    let phase = |g: f64| uhlmann_phase(&PathSpec::new(FRAC_PI_2, g, 1.0).unwrap());
    assert!((phase(1.0) - -0.0014053).abs() < 1e-7);
    assert!((phase(2.0) - -1.078e-5).abs() < 1e-8);
    for g in [0.25, 1.0, 2.0] {
        let s = PathSpec::new(FRAC_PI_2, g, 1.0).unwrap();
        assert!((discrete_holonomy(&s, 100_000).unwrap().phase - phase(g)).abs() < 1e-3);
    }
}

#[test]
fn angle_integral_additive() {
    let s = PathSpec::new(2.0, 0.3, 0.9).unwrap();
    let whole = angle_integral(&s, 0.5, 2.0);
    let parts = angle_integral(&s, 0.5, 0.7) + angle_integral(&s, 1.2, 1.3);
    assert!((whole - parts).abs() < 1e-14);
}

proptest! {
    #[test]
    fn uhlmann_never_exceeds_interferometric(r0 in 0.0..1.0f64, phi in 0.01..PI) {
        prop_assert!(phase_dominance_gap(r0, phi) >= -1e-12);
        prop_assert!(uhlmann_phase_unitary(r0, phi).abs() <= interferometric_phase(r0, phi).abs() + 1e-12);
    }

    #[test]
    fn pure_start_phase_bounded(phi in 0.01..PI, g in 0.0..3.0f64) {
        let s = PathSpec::new(phi, g, 1.0).unwrap();
        prop_assert!(uhlmann_phase(&s).abs() <= phi / 2.0 + 1e-12);
    }

    #[test]
    fn arctan_form_consistent(phi in 0.01..PI, g in 0.0..3.0f64, r0 in 0.01..=1.0f64) {
        let s = PathSpec::new(phi, g, r0).unwrap();
        prop_assert!((uhlmann_phase(&s) - uhlmann_phase_arctan(&s)).abs() < 1e-10);
    }

    #[test]
    fn decoherence_shrinks_angles(phi in 0.01..PI, g in 0.0..3.0f64, dg in 0.01..1.0f64, r0 in 0.05..=1.0f64) {
        let a = compute_angles(&PathSpec::new(phi, g, r0).unwrap());
        let b = compute_angles(&PathSpec::new(phi, g + dg, r0).unwrap());
        prop_assert!(b.mu <= a.mu && b.kappa <= a.kappa && b.chi <= a.chi);
    }
}
