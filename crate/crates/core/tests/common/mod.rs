#![allow(dead_code)]

//! Reference implementations used only by the tests.

use lambda_spectra::model::Rates;
use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|a − b| / |b|`, with a zero reference compared absolutely.
pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn crel(a: Complex64, b: Complex64) -> f64 {
    if b.norm() == 0.0 {
        a.norm()
    } else {
        (a - b).norm() / b.norm()
    }
}

/// Rotating-frame Hamiltonian of the Λ system in the basis (a, b, c).
pub fn hamiltonian(omega_d: Complex64, omega_p: Complex64, big_delta: f64, small_delta: f64) -> Matrix3<Complex64> {
    let mut h = Matrix3::zeros();
    h[(0, 0)] = c(big_delta + small_delta, 0.0);
    h[(2, 2)] = c(small_delta, 0.0);
    h[(0, 1)] = -omega_p;
    h[(1, 0)] = -omega_p.conj();
    h[(0, 2)] = -omega_d;
    h[(2, 0)] = -omega_d.conj();
    h
}

/// `dρ/dt = −i[H, ρ]` plus population transfer and coherence decay.
pub fn master_equation(
    rates: &Rates,
    h: &Matrix3<Complex64>,
    rho: &Matrix3<Complex64>,
) -> Matrix3<Complex64> {
    let mut d = (h * rho - rho * h) * (-I);
    let (gr, gbc, g) = (rates.gamma_r(), rates.gamma_bc(), rates.gamma());
    d[(0, 0)] -= 2.0 * gr * rho[(0, 0)];
    d[(1, 1)] += gr * rho[(0, 0)] - gbc * rho[(1, 1)] + gbc * rho[(2, 2)];
    d[(2, 2)] += gr * rho[(0, 0)] - gbc * rho[(2, 2)] + gbc * rho[(1, 1)];
    for (i, j, rate) in [(0, 1, g), (1, 0, g), (0, 2, g), (2, 0, g), (1, 2, gbc), (2, 1, gbc)] {
        d[(i, j)] -= rate * rho[(i, j)];
    }
    d
}

/// Dense steady-state solve: the generator is assembled column by column
/// from the master equation, the `ρ_aa` row replaced by the trace.
pub fn oracle_steady_state(
    rates: &Rates,
    omega_d: Complex64,
    omega_p: Complex64,
    big_delta: f64,
    small_delta: f64,
) -> Matrix3<Complex64> {
    let h = hamiltonian(omega_d, omega_p, big_delta, small_delta);
    let mut l = DMatrix::<Complex64>::zeros(9, 9);
    for col in 0..9 {
        let mut e = Matrix3::zeros();
        e[(col / 3, col % 3)] = c(1.0, 0.0);
        let d = master_equation(rates, &h, &e);
        for row in 0..9 {
            l[(row, col)] = d[(row / 3, row % 3)];
        }
    }
    for col in 0..9 {
        l[(0, col)] = if col % 4 == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
    }
    let mut rhs = DVector::<Complex64>::zeros(9);
    rhs[0] = c(1.0, 0.0);
    let x = l.lu().solve(&rhs).expect("oracle system is singular");
    Matrix3::from_fn(|i, j| x[3 * i + j])
}

/// Composite trapezoid of `f(x) e^{−x²}/√π` on `[−t, t]` with `n` points.
pub fn gaussian_trapezoid<F: Fn(f64) -> Complex64>(f: F, t: f64, n: usize) -> Complex64 {
    let h = 2.0 * t / (n - 1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let x = -t + h * i as f64;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += f(x) * (w * (-x * x).exp());
    }
    acc * (h / std::f64::consts::PI.sqrt())
}

pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..Default::default()
    }
}
