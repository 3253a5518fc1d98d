//! Closed-form lineshape quantities of the weak-probe Λ model: absorption
//! profile, light shift, resonance width, the symmetric/antisymmetric
//! amplitudes of the two-photon resonance and the density-narrowed width.

use crate::error::{Error, Result};
use crate::model::{Fields, Medium, Rates};

/// Parameters of the empirical two-photon lineshape
/// `f(δ) = γ̃ (A γ̃ + B (δ − δ₀)) / (γ̃² + (δ − δ₀)²) + C`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineshapeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma_tilde: f64,
    pub delta0: f64,
}

impl LineshapeParams {
    pub fn evaluate(&self, delta: f64) -> f64 {
        let u = delta - self.delta0;
        let g = self.gamma_tilde;
        g * (self.a * g + self.b * u) / (g * g + u * u) + self.c
    }

    pub fn polar(&self) -> PolarForm {
        let (d, phi) = to_polar(self.a, self.b);
        PolarForm { d, phi, c: self.c }
    }
}

/// Amplitude/angle form of the lineshape: `A = D cos φ`, `B = D sin φ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PolarForm {
    pub d: f64,
    pub phi: f64,
    pub c: f64,
}

impl PolarForm {
    pub fn to_cartesian(&self) -> (f64, f64) {
        (self.d * self.phi.cos(), self.d * self.phi.sin())
    }
}

/// `(A, B) → (D, φ)` with `φ = atan2(B, A) ∈ (−π, π]`; the origin maps to
/// `(0, 0)`.
pub fn to_polar(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 && b == 0.0 {
        return (0.0, 0.0);
    }
    let mut phi = b.atan2(a);
    // atan2 returns −π for (negative, −0.0); fold onto the half-open range.
    if phi <= -std::f64::consts::PI {
        phi = std::f64::consts::PI;
    }
    (a.hypot(b), phi)
}

fn pumping_denominator(rates: &Rates, fields: &Fields) -> Result<f64> {
    let den = 2.0 * rates.gamma_bc() * fields.big_delta.powi(2)
        + rates.gamma() * fields.omega_d.powi(2);
    if den == 0.0 || !den.is_finite() {
        Err(Error::DegenerateRates)
    } else {
        Ok(den)
    }
}

/// Optical-pumping redistribution factor η.
pub fn eta(rates: &Rates, fields: &Fields) -> Result<f64> {
    let den = pumping_denominator(rates, fields)?;
    Ok((rates.gamma_bc() * fields.big_delta.powi(2) + rates.gamma() * fields.omega_d.powi(2)) / den)
}

/// ac-Stark shift of the two-photon resonance: `|Ω_d|² Δ / (γ² + Δ²)`.
pub fn ac_stark_shift(big_delta: f64, omega_d: f64, gamma: f64) -> f64 {
    omega_d * omega_d * big_delta / (gamma * gamma + big_delta * big_delta)
}

/// Effective width of the two-photon resonance.
pub fn resonance_width(big_delta: f64, omega_d: f64, gamma: f64, gamma_bc: f64) -> f64 {
    let s = gamma * gamma + big_delta * big_delta;
    (gamma * gamma * omega_d.powi(4) + gamma_bc * gamma_bc * big_delta * big_delta * s).sqrt() / s
}

/// Absorption coefficient (per metre) of a weak probe as a function of the
/// two-photon detuning `fields.small_delta`.
pub fn absorption_profile(rates: &Rates, fields: &Fields, medium: &Medium) -> Result<f64> {
    let g = rates.gamma();
    let g_bc = rates.gamma_bc();
    let dd = fields.big_delta;
    let w = fields.omega_d * fields.omega_d;
    let kappa = medium.kappa(rates.gamma_r());
    let eta = eta(rates, fields)?;
    let delta0 = ac_stark_shift(dd, fields.omega_d, g);
    let width = resonance_width(dd, fields.omega_d, g, g_bc);
    let x = fields.small_delta - delta0;
    let num = g_bc * w + g * fields.small_delta.powi(2);
    Ok(kappa / (g * g + dd * dd) * eta * num / (width * width + x * x))
}

/// Thin-medium lineshape amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta: f64,
}

pub fn lineshape_coefficients(
    rates: &Rates,
    fields: &Fields,
    medium: &Medium,
) -> Result<LineshapeCoefficients> {
    let g = rates.gamma();
    let g_bc = rates.gamma_bc();
    let dd = fields.big_delta;
    let w = fields.omega_d * fields.omega_d;
    let s = g * g + dd * dd;
    let shared = g * g * w * w + g_bc * g_bc * dd * dd * s;
    if shared == 0.0 || !shared.is_finite() {
        return Err(Error::DegenerateRates);
    }
    let eta = eta(rates, fields)?;
    let kl = medium.kappa(rates.gamma_r()) * medium.length;
    let a = kl * eta * w / s * (g * w * (g * g - dd * dd) - g_bc * s * s) / shared;
    let b = -kl * eta * dd / s;
    let c = 1.0 - kl * eta * g / s;
    Ok(LineshapeCoefficients { a, b, c, eta })
}

/// Numerator of the symmetric amplitude; it carries the sign of `A`.
fn a_sign_numerator(big_delta: f64, omega_d: f64, gamma: f64, gamma_bc: f64) -> f64 {
    let s = gamma * gamma + big_delta * big_delta;
    gamma * omega_d * omega_d * (gamma * gamma - big_delta * big_delta) - gamma_bc * s * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChange {
    /// Root of `A(Δ)` found by bisection.
    pub root: f64,
    /// Closed-form estimate `γ − 2 γ_bc γ² / |Ω_d|²`.
    pub approximation: f64,
}

/// Positive one-photon detuning at which the symmetric amplitude turns from
/// transmission to absorption. Bisection on `[0, 10γ]` to `1e-9 γ`.
pub fn sign_change_detuning(rates: &Rates, fields: &Fields) -> Result<SignChange> {
    let g = rates.gamma();
    let g_bc = rates.gamma_bc();
    let od = fields.omega_d;
    if g <= 0.0 || od <= 0.0 {
        return Err(Error::NoSignChange);
    }
    let f = |x: f64| a_sign_numerator(x, od, g, g_bc);
    let (mut lo, mut hi) = (0.0, 10.0 * g);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::NoSignChange);
    }
    while hi - lo > 1e-9 * g {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SignChange {
        root: 0.5 * (lo + hi),
        approximation: g - 2.0 * g_bc * g * g / (od * od),
    })
}

/// Resonance width of an optically dense medium in which only the
/// velocity group resonant with the fields contributes.
///
/// Anchored at `Δ = 0` to `|Ω_d|² / sqrt(γ γ_r) · ((3/8π) N λ² L)^(−1/2)` and
/// growing as `exp(Δ² / 2(ku)²)`.
pub fn density_narrowed_width(medium: &Medium, rates: &Rates, fields: &Fields) -> Result<f64> {
    let optical_depth_factor =
        3.0 / (8.0 * std::f64::consts::PI) * medium.density * medium.wavelength.powi(2) * medium.length;
    if optical_depth_factor <= 0.0 {
        return Err(Error::InvalidInput(
            "density-narrowed width needs N L > 0".into(),
        ));
    }
    let gg = rates.gamma() * rates.gamma_r();
    if gg <= 0.0 {
        return Err(Error::InvalidInput(
            "density-narrowed width needs gamma * gamma_r > 0".into(),
        ));
    }
    let base = fields.omega_d.powi(2) / gg.sqrt() / optical_depth_factor.sqrt();
    let dd = fields.big_delta;
    if medium.ku == 0.0 {
        return Ok(if dd == 0.0 { base } else { f64::INFINITY });
    }
    Ok(base * (dd * dd / (2.0 * medium.ku * medium.ku)).exp())
}
