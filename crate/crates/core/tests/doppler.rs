mod common;

use common::{c, crel, gaussian_trapezoid};
use lambda_spectra::doppler::{doppler_average, QuadratureSpec, Rule, Scheme, VelocityQuadrature};
use lambda_spectra::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn lorentzian(g: f64) -> impl Fn(f64) -> Complex64 {
    move |d| common::I / c(g, d)
}

fn oracle(g: f64, big_delta: f64, ku: f64) -> Complex64 {
    gaussian_trapezoid(|x| lorentzian(g)(big_delta - ku * x), 6.0, 100_001)
}

#[test]
fn constant_is_preserved() {
    let k = c(-2.5, 0.75);
    for spec in [QuadratureSpec::gauss_hermite(8), QuadratureSpec::gauss_hermite(64), QuadratureSpec::gauss_hermite(129)] {
        let v = doppler_average(|_| k, 3.0, 100.0, &spec).unwrap();
        assert!(crel(v, k) < 1e-12);
    }
    let v = doppler_average(|_| k, 3.0, 100.0, &QuadratureSpec::trapezoid(4001, 8.0)).unwrap();
    assert!(crel(v, k) < 1e-12);
}

#[test]
fn zero_width_returns_the_bare_response() {
    let f = lorentzian(1.3);
    let v = doppler_average(&f, 0.4, 0.0, &QuadratureSpec::default()).unwrap();
    assert_eq!(v, f(0.4));
}

#[test]
fn gauss_hermite_matches_dense_trapezoid_for_pressure_broadened_line() {
    let (g, ku) = (2.0 * PI * 153.0, 2.0 * PI * 250.0);
    for big_delta in [0.0, 0.3 * ku, ku, 4.0 * ku] {
        let v = doppler_average(lorentzian(g), big_delta, ku, &QuadratureSpec::default()).unwrap();
        assert!(crel(v, oracle(g, big_delta, ku)) < 1e-5, "Δ = {big_delta}");
    }
}

// A 3 MHz line sits between the 64 Gauss–Hermite nodes of a 250 MHz
// Maxwellian, so the rule cannot reach the oracle at line centre.
#[test]
#[should_panic(expected = "line-centre error")]
fn gauss_hermite_resolves_narrow_line_at_centre() {
    let (g, ku) = (2.0 * PI * 3.0, 2.0 * PI * 250.0);
    let v = doppler_average(lorentzian(g), 0.0, ku, &QuadratureSpec::default()).unwrap();
    let e = crel(v, oracle(g, 0.0, ku));
    assert!(e < 1e-6, "line-centre error {e:.3e}");
}

#[test]
fn dense_trapezoid_resolves_narrow_line() {
    let (g, ku) = (2.0 * PI * 3.0, 2.0 * PI * 250.0);
    let v = doppler_average(lorentzian(g), 0.0, ku, &QuadratureSpec::trapezoid(20_001, 6.0)).unwrap();
    assert!(crel(v, oracle(g, 0.0, ku)) < 1e-6);
}

#[test]
fn refinement_converges_for_smooth_integrands() {
    let (g, ku) = (1.0, 1.0);
    let reference = oracle(g, 0.5, ku);
    let errs: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&n| crel(doppler_average(lorentzian(g), 0.5, ku, &QuadratureSpec::gauss_hermite(n)).unwrap(), reference))
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] / 4.0 || w[1] < 1e-12, "{errs:?}");
    }
}

#[test]
fn refinement_check_flags_under_resolved_lines() {
    let spec = QuadratureSpec { verify_refinement: true, ..QuadratureSpec::default() };
    let q = VelocityQuadrature::new(spec).unwrap();
    assert_eq!(q.refined().unwrap().len(), 128);
    match q.average(lorentzian(0.01), 0.0, 1.0) {
        Err(Error::QuadratureDivergence { relative }) => assert!(relative > 1e-4),
        other => panic!("expected divergence, got {other:?}"),
    }
    assert!(q.average(lorentzian(1.0), 0.0, 1.0).is_ok());
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(QuadratureSpec::gauss_hermite(7).validate().is_err());
    assert!(QuadratureSpec::trapezoid(101, 2.9).validate().is_err());
    assert!(QuadratureSpec::trapezoid(101, 3.0).validate().is_ok());
    assert!(doppler_average(|_| c(1.0, 0.0), 0.0, -1.0, &QuadratureSpec::default()).is_err());
    assert!(doppler_average(|_| c(1.0, 0.0), 0.0, f64::NAN, &QuadratureSpec::default()).is_err());
}

#[test]
fn rules_are_symmetric() {
    for (scheme, n) in [(Scheme::GaussHermite, 64), (Scheme::GaussHermite, 33), (Scheme::Trapezoid, 101)] {
        let r = Rule::new(scheme, n, 6.0);
        for i in 0..n {
            assert!((r.nodes[i] + r.nodes[n - 1 - i]).abs() <= 1e-14);
            assert!((r.weights[i] - r.weights[n - 1 - i]).abs() <= 1e-12 * r.weights[i]);
        }
    }
}

proptest! {
    #![proptest_config(common::proptest_config(256))]

    #[test]
    fn averaging_is_linear(
        a in -5.0f64..5.0, b in -5.0f64..5.0,
        g1 in 0.1f64..10.0, g2 in 0.1f64..10.0,
        big_delta in -20.0f64..20.0, ku in 0.1f64..10.0,
    ) {
        let spec = QuadratureSpec::default();
        let (f1, f2) = (lorentzian(g1), lorentzian(g2));
        let lhs = doppler_average(|d| f1(d) * a + f2(d) * b, big_delta, ku, &spec).unwrap();
        let v1 = doppler_average(&f1, big_delta, ku, &spec).unwrap();
        let v2 = doppler_average(&f2, big_delta, ku, &spec).unwrap();
        let rhs = v1 * a + v2 * b;
        let scale = (v1 * a).norm() + (v2 * b).norm();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn absorption_is_even_in_detuning(g in 0.1f64..10.0, big_delta in 0.0f64..30.0, ku in 0.1f64..10.0) {
        let spec = QuadratureSpec::default();
        let f = lorentzian(g);
        let plus = doppler_average(&f, big_delta, ku, &spec).unwrap();
        let minus = doppler_average(&f, -big_delta, ku, &spec).unwrap();
        prop_assert!((plus.im - minus.im).abs() <= 1e-13 * plus.im.abs());
        prop_assert!((plus.re + minus.re).abs() <= 1e-13 * plus.norm());
    }
}
