//! Boundary unit conversions.
//!
//! Everything inside the library is SI with rates and detunings as angular
//! frequencies (rad/s). Config files and CSV use ordinary frequency.

use std::f64::consts::PI;

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

pub fn from_mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

pub fn to_mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}

pub fn from_khz(f: f64) -> f64 {
    2.0 * PI * f * 1e3
}

pub fn to_khz(w: f64) -> f64 {
    w / (2.0 * PI * 1e3)
}

/// Number density per cm^3 to per m^3.
pub fn from_per_cm3(n: f64) -> f64 {
    n * 1e6
}

pub fn to_per_cm3(n: f64) -> f64 {
    n * 1e-6
}

pub fn from_cm(l: f64) -> f64 {
    l * 1e-2
}

pub fn to_cm(l: f64) -> f64 {
    l * 1e2
}

pub fn from_nm(l: f64) -> f64 {
    l * 1e-9
}

pub fn to_nm(l: f64) -> f64 {
    l * 1e9
}
