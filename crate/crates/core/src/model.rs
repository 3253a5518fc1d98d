//! Closed three-level Λ system: steady-state density matrix and probe
//! susceptibility.
//!
//! Levels: `a` is the excited state, `b` and `c` the two ground states. The
//! probe couples `b`–`a`, the drive couples `c`–`a`. All rates and detunings
//! are angular frequencies (rad/s).

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rank tolerance of the constrained Liouvillian, relative to its largest
/// singular value.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Relaxation rates of the Λ system.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Rates {
    gamma_r: f64,
    gamma_deph: f64,
    gamma_bc: f64,
}

impl Rates {
    pub fn new(gamma_r: f64, gamma_deph: f64, gamma_bc: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma_r", gamma_r),
            ("gamma_deph", gamma_deph),
            ("gamma_bc", gamma_bc),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(Rates {
            gamma_r,
            gamma_deph,
            gamma_bc,
        })
    }

    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    pub fn gamma_deph(&self) -> f64 {
        self.gamma_deph
    }

    pub fn gamma_bc(&self) -> f64 {
        self.gamma_bc
    }

    /// Total optical polarization decay rate.
    pub fn gamma(&self) -> f64 {
        self.gamma_r + self.gamma_deph
    }

    pub fn with_gamma_bc(&self, gamma_bc: f64) -> Result<Self> {
        Rates::new(self.gamma_r, self.gamma_deph, gamma_bc)
    }
}

/// Field parameters seen by one velocity class.
///
/// Rabi frequencies are magnitudes; `big_delta` is the one-photon detuning
/// and `small_delta` the two-photon (Raman) detuning.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Fields {
    pub omega_d: f64,
    pub omega_p: f64,
    pub big_delta: f64,
    pub small_delta: f64,
}

impl Fields {
    pub fn new(omega_d: f64, omega_p: f64, big_delta: f64, small_delta: f64) -> Result<Self> {
        let f = Fields {
            omega_d,
            omega_p,
            big_delta,
            small_delta,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_d.is_finite() && self.omega_d >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "omega_d must be finite and >= 0, got {}",
                self.omega_d
            )));
        }
        if !(self.omega_p.is_finite() && self.omega_p >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "omega_p must be finite and >= 0, got {}",
                self.omega_p
            )));
        }
        if !self.big_delta.is_finite() || !self.small_delta.is_finite() {
            return Err(Error::InvalidInput("detunings must be finite".into()));
        }
        Ok(())
    }

    pub fn with_small_delta(mut self, small_delta: f64) -> Self {
        self.small_delta = small_delta;
        self
    }

    pub fn with_big_delta(mut self, big_delta: f64) -> Self {
        self.big_delta = big_delta;
        self
    }
}

/// Properties of the vapor cell.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Medium {
    /// Atomic number density, m^-3.
    pub density: f64,
    /// Cell length, m.
    pub length: f64,
    /// Probe wavelength, m.
    pub wavelength: f64,
    /// Doppler width `k u`, rad/s.
    pub ku: f64,
}

impl Medium {
    pub fn new(density: f64, length: f64, wavelength: f64, ku: f64) -> Result<Self> {
        let m = Medium {
            density,
            length,
            wavelength,
            ku,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("density", self.density),
            ("length", self.length),
            ("wavelength", self.wavelength),
            ("ku", self.ku),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Coupling constant `(3/8π) N λ² γ_r`, in s^-1 m^-1. Always derived,
    /// never stored.
    pub fn kappa(&self, gamma_r: f64) -> f64 {
        3.0 / (8.0 * std::f64::consts::PI) * self.density * self.wavelength.powi(2) * gamma_r
    }
}

/// Complex decay rates of the coherences `ρ_ab`, `ρ_ca` and `ρ_cb`.
///
/// `ρ_ca` rotates at the drive detuning with the opposite sense to `ρ_ab`,
/// so its rate is `γ − iΔ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedRates {
    pub gamma_ab: Complex64,
    pub gamma_ca: Complex64,
    pub gamma_cb: Complex64,
}

impl GeneralizedRates {
    pub fn new(rates: &Rates, big_delta: f64, small_delta: f64) -> Self {
        let g = rates.gamma();
        GeneralizedRates {
            gamma_ab: Complex64::new(g, big_delta + small_delta),
            gamma_ca: Complex64::new(g, -big_delta),
            gamma_cb: Complex64::new(rates.gamma_bc(), small_delta),
        }
    }
}

/// Level index within [`DensityMatrix3`].
pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;

/// 3×3 density matrix in the basis (a, b, c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3 {
    pub rho: [[Complex64; 3]; 3],
}

impl DensityMatrix3 {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[i][j]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.rho[i][i].re
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[A][A] + self.rho[B][B] + self.rho[C][C]
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        worst
    }

    fn from_real(x: &[f64; 9]) -> Self {
        let re = |v: f64| Complex64::new(v, 0.0);
        let ab = Complex64::new(x[3], x[4]);
        let ca = Complex64::new(x[5], x[6]);
        let cb = Complex64::new(x[7], x[8]);
        let mut rho = [[Complex64::default(); 3]; 3];
        rho[A][A] = re(x[0]);
        rho[B][B] = re(x[1]);
        rho[C][C] = re(x[2]);
        rho[A][B] = ab;
        rho[B][A] = ab.conj();
        rho[C][A] = ca;
        rho[A][C] = ca.conj();
        rho[C][B] = cb;
        rho[B][C] = cb.conj();
        DensityMatrix3 { rho }
    }
}

// Ordering of the vectorized density matrix.
const AA: usize = 0;
const BB: usize = 1;
const CC: usize = 2;
const AB: usize = 3;
const BA: usize = 4;
const CA: usize = 5;
const AC: usize = 6;
const CB: usize = 7;
const BC: usize = 8;

type Liouvillian = [[Complex64; 9]; 9];

/// Linear generator of the equations of motion, including the conjugate
/// coherences and the closure equation for `ρ_aa`.
fn liouvillian(
    rates: &Rates,
    omega_d: Complex64,
    omega_p: Complex64,
    big_delta: f64,
    small_delta: f64,
) -> Liouvillian {
    let gr = GeneralizedRates::new(rates, big_delta, small_delta);
    let (g_r, g_bc) = (rates.gamma_r(), rates.gamma_bc());
    let (od, op) = (omega_d, omega_p);
    let (odc, opc) = (omega_d.conj(), omega_p.conj());
    let re = |x: f64| Complex64::new(x, 0.0);

    let mut l = [[Complex64::default(); 9]; 9];

    l[BB][AB] = I * opc;
    l[BB][BA] = -I * op;
    l[BB][AA] = re(g_r);
    l[BB][BB] = re(-g_bc);
    l[BB][CC] = re(g_bc);

    l[CC][AC] = I * odc;
    l[CC][CA] = -I * od;
    l[CC][AA] = re(g_r);
    l[CC][CC] = re(-g_bc);
    l[CC][BB] = re(g_bc);

    for k in 0..9 {
        l[AA][k] = -(l[BB][k] + l[CC][k]);
    }

    l[AB][AB] = -gr.gamma_ab;
    l[AB][BB] = I * op;
    l[AB][AA] = -I * op;
    l[AB][CB] = I * od;

    l[CA][CA] = -gr.gamma_ca;
    l[CA][AA] = I * odc;
    l[CA][CC] = -I * odc;
    l[CA][CB] = -I * opc;

    l[CB][CB] = -gr.gamma_cb;
    l[CB][CA] = -I * op;
    l[CB][AB] = I * odc;

    l[BA][BA] = -gr.gamma_ab.conj();
    l[BA][BB] = -I * opc;
    l[BA][AA] = I * opc;
    l[BA][BC] = -I * odc;

    l[AC][AC] = -gr.gamma_ca.conj();
    l[AC][AA] = -I * od;
    l[AC][CC] = I * od;
    l[AC][BC] = I * op;

    l[BC][BC] = -gr.gamma_cb.conj();
    l[BC][AC] = I * opc;
    l[BC][BA] = -I * od;

    l
}

/// Replace the (redundant) `ρ_aa` equation by the trace condition. With
/// `coherence == false` the ground-state coherence is pinned to zero.
fn constrained_system(mut l: Liouvillian, coherence: bool) -> Liouvillian {
    l[AA] = [Complex64::default(); 9];
    l[AA][AA] = Complex64::new(1.0, 0.0);
    l[AA][BB] = Complex64::new(1.0, 0.0);
    l[AA][CC] = Complex64::new(1.0, 0.0);
    if !coherence {
        for row in [CB, BC] {
            l[row] = [Complex64::default(); 9];
            l[row][row] = Complex64::new(1.0, 0.0);
        }
    }
    l
}

/// Real form of the constrained system. Unknowns are
/// `(ρ_aa, ρ_bb, ρ_cc, Re ρ_ab, Im ρ_ab, Re ρ_ca, Im ρ_ca, Re ρ_cb, Im ρ_cb)`;
/// rows are the trace, the `ρ_bb` and `ρ_cc` equations and the real and
/// imaginary parts of the three coherence equations.
fn real_system(m: &Liouvillian) -> ([[f64; 9]; 9], [f64; 9]) {
    let mut out = [[0.0; 9]; 9];
    let rows = [(AA, false), (BB, false), (CC, false), (AB, false), (AB, true), (CA, false), (CA, true), (CB, false), (CB, true)];
    for (r, &(src, imag)) in rows.iter().enumerate() {
        let c = &m[src];
        let cols = [
            c[AA],
            c[BB],
            c[CC],
            c[AB] + c[BA],
            I * (c[AB] - c[BA]),
            c[CA] + c[AC],
            I * (c[CA] - c[AC]),
            c[CB] + c[BC],
            I * (c[CB] - c[BC]),
        ];
        for (k, v) in cols.iter().enumerate() {
            out[r][k] = if imag { v.im } else { v.re };
        }
    }
    let mut rhs = [0.0; 9];
    rhs[0] = 1.0;
    (out, rhs)
}

/// Gaussian elimination with partial pivoting. Returns the solution and the
/// ratio of the smallest to the largest pivot magnitude.
fn solve9(mut m: [[f64; 9]; 9], mut rhs: [f64; 9]) -> ([f64; 9], f64) {
    let mut pmin = f64::INFINITY;
    let mut pmax: f64 = 0.0;
    for col in 0..9 {
        let mut piv = col;
        let mut best = m[col][col].abs();
        for row in col + 1..9 {
            let v = m[row][col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if piv != col {
            m.swap(piv, col);
            rhs.swap(piv, col);
        }
        let p = m[col][col];
        pmin = pmin.min(best);
        pmax = pmax.max(best);
        if p == 0.0 {
            continue;
        }
        let inv = 1.0 / p;
        for row in col + 1..9 {
            let f = m[row][col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col + 1..9 {
                m[row][k] -= f * m[col][k];
            }
            m[row][col] = 0.0;
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 9];
    for row in (0..9).rev() {
        let mut s = rhs[row];
        for k in row + 1..9 {
            s -= m[row][k] * x[k];
        }
        x[row] = if m[row][row] == 0.0 { f64::NAN } else { s / m[row][row] };
    }
    let ratio = if pmax > 0.0 { pmin / pmax } else { 0.0 };
    (x, ratio)
}

fn singular_value_ratio(m: &Liouvillian) -> f64 {
    let mat = SMatrix::<Complex64, 9, 9>::from_fn(|i, j| m[i][j]);
    let sv = mat.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Steady state with explicit complex Rabi frequencies.
///
/// `check_rank` selects the SVD-based rank test; otherwise the pivot ratio of
/// the elimination is used as a cheaper proxy.
pub(crate) fn solve_steady_state(
    rates: &Rates,
    omega_d: Complex64,
    omega_p: Complex64,
    big_delta: f64,
    small_delta: f64,
    coherence: bool,
    check_rank: bool,
) -> Result<DensityMatrix3> {
    let l = liouvillian(rates, omega_d, omega_p, big_delta, small_delta);
    let m = constrained_system(l, coherence);
    if check_rank {
        let ratio = singular_value_ratio(&m);
        if ratio.is_nan() || ratio < RANK_TOLERANCE {
            return Err(Error::SingularSystem { ratio });
        }
    }
    let (real, real_rhs) = real_system(&m);
    let (x, pivot_ratio) = solve9(real, real_rhs);
    if !check_rank && (pivot_ratio.is_nan() || pivot_ratio < RANK_TOLERANCE) {
        return Err(Error::SingularSystem { ratio: pivot_ratio });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem { ratio: pivot_ratio });
    }
    Ok(DensityMatrix3::from_real(&x))
}

/// Steady-state density matrix of the Λ system.
pub fn steady_state(rates: &Rates, fields: &Fields) -> Result<DensityMatrix3> {
    steady_state_with_phases(rates, fields, 0.0, 0.0)
}

/// As [`steady_state`], with the drive and probe Rabi frequencies carrying
/// the phases `phase_d` and `phase_p`.
pub fn steady_state_with_phases(
    rates: &Rates,
    fields: &Fields,
    phase_d: f64,
    phase_p: f64,
) -> Result<DensityMatrix3> {
    fields.validate()?;
    solve_steady_state(
        rates,
        Complex64::from_polar(fields.omega_d, phase_d),
        Complex64::from_polar(fields.omega_p, phase_p),
        fields.big_delta,
        fields.small_delta,
        true,
        true,
    )
}

/// Steady state with the ground-state coherence suppressed (`ρ_cb ≡ 0`):
/// the `|δ| → ∞` limit of the Raman structure with the optical pumping left
/// intact.
pub fn steady_state_incoherent(rates: &Rates, fields: &Fields) -> Result<DensityMatrix3> {
    fields.validate()?;
    solve_steady_state(
        rates,
        Complex64::new(fields.omega_d, 0.0),
        Complex64::new(fields.omega_p, 0.0),
        fields.big_delta,
        fields.small_delta,
        false,
        true,
    )
}

/// Right-hand sides of the equations of motion, written out term by term.
///
/// Order of the returned entries: aa, bb, cc, ab, ba, ca, ac, cb, bc.
pub fn time_derivatives(
    rates: &Rates,
    omega_d: Complex64,
    omega_p: Complex64,
    big_delta: f64,
    small_delta: f64,
    rho: &DensityMatrix3,
) -> [Complex64; 9] {
    let gr = GeneralizedRates::new(rates, big_delta, small_delta);
    let r = |i: usize, j: usize| rho.rho[i][j];
    let (od, op) = (omega_d, omega_p);
    let (g_r, g_bc) = (rates.gamma_r(), rates.gamma_bc());

    let d_bb = I * op.conj() * r(A, B) - I * op * r(B, A) + g_r * r(A, A) - g_bc * r(B, B)
        + g_bc * r(C, C);
    let d_cc = I * od.conj() * r(A, C) - I * od * r(C, A) + g_r * r(A, A) - g_bc * r(C, C)
        + g_bc * r(B, B);
    let d_ab = -gr.gamma_ab * r(A, B) + I * op * (r(B, B) - r(A, A)) + I * od * r(C, B);
    let d_ca = -gr.gamma_ca * r(C, A) + I * od.conj() * (r(A, A) - r(C, C))
        - I * op.conj() * r(C, B);
    let d_cb = -gr.gamma_cb * r(C, B) - I * op * r(C, A) + I * od.conj() * r(A, B);
    let d_aa = -(d_bb + d_cc);

    [
        d_aa,
        d_bb,
        d_cc,
        d_ab,
        d_ab.conj(),
        d_ca,
        d_ca.conj(),
        d_cb,
        d_cb.conj(),
    ]
}

/// Largest frequency scale of the problem, used to make residuals relative.
pub fn rate_scale(rates: &Rates, fields: &Fields) -> f64 {
    [
        rates.gamma(),
        rates.gamma_bc(),
        fields.omega_d,
        fields.omega_p,
        fields.big_delta.abs(),
        fields.small_delta.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Probe susceptibility from the exact steady state, normalized so that it
/// coincides with [`susceptibility_analytic`] for a weak probe:
/// `χ = κ ρ_ab / Ω_p`.
pub fn susceptibility_numeric(rates: &Rates, fields: &Fields, medium: &Medium) -> Result<Complex64> {
    susceptibility_numeric_with_phases(rates, fields, medium, 0.0, 0.0)
}

pub fn susceptibility_numeric_with_phases(
    rates: &Rates,
    fields: &Fields,
    medium: &Medium,
    phase_d: f64,
    phase_p: f64,
) -> Result<Complex64> {
    if fields.omega_p <= 0.0 {
        return Err(Error::InvalidInput(
            "susceptibility_numeric needs omega_p > 0".into(),
        ));
    }
    let rho = steady_state_with_phases(rates, fields, phase_d, phase_p)?;
    let omega_p = Complex64::from_polar(fields.omega_p, phase_p);
    Ok(medium.kappa(rates.gamma_r()) * rho.get(A, B) / omega_p)
}

/// Strong-drive population differences `(ρ_aa − ρ_bb, ρ_aa − ρ_cc)`.
pub fn population_differences(rates: &Rates, fields: &Fields) -> Result<(f64, f64)> {
    let g = rates.gamma();
    let g_bc = rates.gamma_bc();
    let d2 = fields.big_delta * fields.big_delta;
    let w = fields.omega_d * fields.omega_d;
    let den = 2.0 * g_bc * d2 + g * w;
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateRates);
    }
    Ok((-(g_bc * d2 + g * w) / den, -(g_bc * (d2 + g * g)) / den))
}

/// Weak-probe closed form of the probe susceptibility with strong-drive
/// populations.
///
/// The relative sign of the two numerator terms follows from the equations
/// of motion: `Γ_cb (ρ_bb − ρ_aa) + (|Ω_d|²/Γ_ca)(ρ_aa − ρ_cc)`.
pub fn susceptibility_analytic(rates: &Rates, fields: &Fields, medium: &Medium) -> Result<Complex64> {
    let (aa_bb, aa_cc) = population_differences(rates, fields)?;
    let gr = GeneralizedRates::new(rates, fields.big_delta, fields.small_delta);
    let w = fields.omega_d * fields.omega_d;
    let kappa = medium.kappa(rates.gamma_r());
    let num = gr.gamma_cb * (-aa_bb) + w / gr.gamma_ca * aa_cc;
    let den = gr.gamma_ab * gr.gamma_cb + w;
    Ok(I * kappa * num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{from_khz, from_mhz};

    fn medium() -> Medium {
        Medium::new(2.5e17, 0.025, 795e-9, from_mhz(250.0)).unwrap()
    }

    #[test]
    fn gamma_is_sum_of_parts() {
        let r = Rates::new(1.5, 2.25, 0.1).unwrap();
        assert_eq!(r.gamma(), 3.75);
        assert!(Rates::new(-1.0, 0.0, 0.0).is_err());
        assert!(Rates::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn generalized_rates_real_parts() {
        let r = Rates::new(1.0, 2.0, 0.01).unwrap();
        let g = GeneralizedRates::new(&r, 5.0, -0.5);
        assert_eq!(g.gamma_ab.re, 3.0);
        assert_eq!(g.gamma_ca.re, 3.0);
        assert_eq!(g.gamma_cb.re, 0.01);
        assert_eq!(g.gamma_ab.im, 4.5);
        assert_eq!(g.gamma_ca.im, -5.0);
        assert_eq!(g.gamma_cb.im, -0.5);
    }

    #[test]
    fn no_fields_equilibrates_ground_states() {
        let r = Rates::new(1.0, 0.5, 0.01).unwrap();
        let f = Fields::new(0.0, 0.0, 3.0, 0.2).unwrap();
        let rho = steady_state(&r, &f).unwrap();
        assert!((rho.population(B) - 0.5).abs() < 1e-14);
        assert!((rho.population(C) - 0.5).abs() < 1e-14);
        assert!(rho.population(A).abs() < 1e-14);
        for (i, j) in [(A, B), (A, C), (B, C)] {
            assert!(rho.get(i, j).norm() < 1e-14);
        }
    }

    #[test]
    fn dark_state_limit_pumps_into_b() {
        let r = Rates::new(1.0, 0.0, 0.0).unwrap();
        for big_delta in [0.0, 0.7, -4.0] {
            let f = Fields::new(0.5, 1e-4, big_delta, 0.0).unwrap();
            let rho = steady_state(&r, &f).unwrap();
            let eps = (f.omega_p / f.omega_d).powi(2);
            assert!((1.0 - rho.population(B)) < 10.0 * eps, "Δ={big_delta}: {rho:?}");
        }
    }

    #[test]
    fn without_any_relaxation_the_system_is_singular() {
        let r = Rates::new(0.0, 1.0, 0.0).unwrap();
        let f = Fields::new(0.5, 0.1, 0.0, 0.0).unwrap();
        assert!(matches!(
            steady_state(&r, &f),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn residuals_vanish() {
        let r = Rates::new(from_mhz(3.0), from_mhz(150.0), from_khz(0.7)).unwrap();
        let f = Fields::new(from_mhz(2.5), from_mhz(0.5), from_mhz(300.0), from_khz(5.0)).unwrap();
        let rho = steady_state(&r, &f).unwrap();
        let d = time_derivatives(
            &r,
            Complex64::new(f.omega_d, 0.0),
            Complex64::new(f.omega_p, 0.0),
            f.big_delta,
            f.small_delta,
            &rho,
        );
        let scale = rate_scale(&r, &f);
        for v in d {
            assert!(v.norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn two_level_limit_of_numeric_susceptibility() {
        let r = Rates::new(1.0, 0.3, 0.05).unwrap();
        let m = medium();
        let kappa = m.kappa(r.gamma_r());
        let f = Fields::new(0.0, 1e-3, 0.8, 0.0).unwrap();
        let chi = susceptibility_numeric(&r, &f, &m).unwrap();
        let rho = steady_state(&r, &f).unwrap();
        let gab = GeneralizedRates::new(&r, f.big_delta, 0.0).gamma_ab;
        let expected = I * kappa * (rho.population(B) - rho.population(A)) / gab;
        assert!((chi - expected).norm() < 1e-12 * expected.norm());
        let g = r.gamma();
        let absorption = kappa * g / (g * g + 0.64) * (rho.population(B) - rho.population(A));
        assert!((chi.im - absorption).abs() < 1e-12 * absorption);
    }

    #[test]
    fn perfect_eit_without_ground_decay() {
        let r = Rates::new(1.0, 0.0, 0.0).unwrap();
        let f = Fields::new(1.0, 1e-3, 0.4, 0.0).unwrap();
        let chi = susceptibility_numeric(&r, &f, &medium()).unwrap();
        let kappa = medium().kappa(1.0);
        assert!(chi.norm() < 1e-10 * kappa);
    }

    #[test]
    fn numeric_needs_a_probe() {
        let r = Rates::new(1.0, 0.0, 0.1).unwrap();
        let f = Fields::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(susceptibility_numeric(&r, &f, &medium()).is_err());
    }

    #[test]
    fn population_difference_limits() {
        let r = Rates::new(1.0, 0.0, 1e-4).unwrap();
        let f = Fields::new(0.5, 0.0, 0.0, 0.0).unwrap();
        let (p1, p2) = population_differences(&r, &f).unwrap();
        assert_eq!(p1, -1.0);
        assert!((p2 + 1e-4 / 0.25).abs() < 1e-15);

        let r0 = Rates::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(population_differences(&r0, &f).unwrap(), (-1.0, 0.0));

        let far = Fields::new(0.5, 0.0, 1e9, 0.0).unwrap();
        let (p1, p2) = population_differences(&r, &far).unwrap();
        assert!((p1 + 0.5).abs() < 1e-9 && (p2 + 0.5).abs() < 1e-9);

        let none = Fields::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(
            population_differences(&r, &none),
            Err(Error::DegenerateRates)
        );
    }

    #[test]
    fn analytic_eta_limits() {
        // η = −(ρ_aa − ρ_bb): 1 on resonance, 1/2 far off resonance.
        let r = Rates::new(1.0, 2.0, 1e-4).unwrap();
        let on = Fields::new(0.3, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(population_differences(&r, &on).unwrap().0, -1.0);
        let off = Fields::new(0.3, 0.0, 1e8, 0.0).unwrap();
        assert!((population_differences(&r, &off).unwrap().0 + 0.5).abs() < 1e-6);
    }
}
