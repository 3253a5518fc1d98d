//! Ground-state dark and bright superpositions of the `m = ±1` Zeeman
//! sublevels for a linearly polarized field, and the magnetic-field
//! equivalent of the two-photon detuning.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{BOHR_MAGNETON, HBAR};

const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// `F = 2 → F' = 1`
    TwoToOne,
    /// `F = 2 → F' = 2`
    TwoToTwo,
}

impl Transition {
    pub const ALL: [Transition; 2] = [Transition::TwoToOne, Transition::TwoToTwo];

    pub fn label(self) -> &'static str {
        match self {
            Transition::TwoToOne => "2->1",
            Transition::TwoToTwo => "2->2",
        }
    }
}

/// Superposition `c₊|+1⟩ + c₋|−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanState {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

impl ZeemanState {
    /// Requires unit norm to 1e-12.
    pub fn new(c_plus: Complex64, c_minus: Complex64) -> Result<Self> {
        let s = ZeemanState { c_plus, c_minus };
        if (s.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "state norm^2 is {}, expected 1",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    /// Scales `(c_plus, c_minus)` to unit norm.
    pub fn normalized(c_plus: Complex64, c_minus: Complex64) -> Result<Self> {
        let n = (c_plus.norm_sqr() + c_minus.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero state".into()));
        }
        Ok(ZeemanState { c_plus: c_plus / n, c_minus: c_minus / n })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_plus.norm_sqr() + self.c_minus.norm_sqr()
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let u = Complex64::from_polar(1.0, phase);
        ZeemanState { c_plus: self.c_plus * u, c_minus: self.c_minus * u }
    }
}

/// Relative signs of the `m = +1` and `m = −1` matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionSigns {
    pub plus: i8,
    pub minus: i8,
}

impl TransitionSigns {
    pub fn new(plus: i8, minus: i8) -> Result<Self> {
        if plus.abs() != 1 || minus.abs() != 1 {
            return Err(Error::InvalidInput(format!(
                "signs must be +1 or -1, got ({plus}, {minus})"
            )));
        }
        Ok(TransitionSigns { plus, minus })
    }

    pub fn of(transition: Transition) -> Self {
        match transition {
            Transition::TwoToOne => TransitionSigns { plus: 1, minus: -1 },
            Transition::TwoToTwo => TransitionSigns { plus: 1, minus: 1 },
        }
    }
}

pub fn dark_state(transition: Transition) -> ZeemanState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match transition {
        Transition::TwoToOne => ZeemanState { c_plus: h, c_minus: h },
        Transition::TwoToTwo => ZeemanState { c_plus: h, c_minus: -h },
    }
}

/// `⟨s1|s2⟩`, antilinear in the first argument.
pub fn overlap(s1: &ZeemanState, s2: &ZeemanState) -> Complex64 {
    s1.c_plus.conj() * s2.c_plus + s1.c_minus.conj() * s2.c_minus
}

/// Coupling of `state` to a transition with the given sign pattern, in
/// `[0, 1]`.
pub fn brightness_with_signs(state: &ZeemanState, signs: TransitionSigns) -> f64 {
    let sum = state.c_plus * f64::from(signs.plus) + state.c_minus * f64::from(signs.minus);
    sum.norm() * FRAC_1_SQRT_2
}

pub fn brightness(state: &ZeemanState, transition: Transition) -> f64 {
    brightness_with_signs(state, TransitionSigns::of(transition))
}

/// Two-photon detuning `2 μ_B B / ħ` (rad/s) of the `m = ±1` pair in a
/// field of `b_tesla`.
pub fn zeeman_detuning(b_tesla: f64) -> f64 {
    2.0 * BOHR_MAGNETON * b_tesla / HBAR
}

/// Dark states, their overlap and the brightness matrix as a text table.
pub fn report() -> String {
    let mut out = String::new();
    let fmt = |c: Complex64| format!("{:+.6}{:+.6}i", c.re, c.im);
    let _ = writeln!(out, "dark states (c_plus, c_minus):");
    for t in Transition::ALL {
        let s = dark_state(t);
        let _ = writeln!(out, "  {:<5} ({}, {})", t.label(), fmt(s.c_plus), fmt(s.c_minus));
    }
    let o = overlap(&dark_state(Transition::TwoToOne), &dark_state(Transition::TwoToTwo));
    let _ = writeln!(out, "overlap(dark 2->1, dark 2->2) = {}", fmt(o));
    let _ = writeln!(out, "brightness (rows: dark state of, columns: probed transition):");
    let _ = writeln!(out, "  {:<8}{:>8}{:>8}", "", "2->1", "2->2");
    for row in Transition::ALL {
        let s = dark_state(row);
        let _ = writeln!(
            out,
            "  {:<8}{:>8.4}{:>8.4}",
            row.label(),
            brightness(&s, Transition::TwoToOne),
            brightness(&s, Transition::TwoToTwo)
        );
    }
    let _ = writeln!(out, "zeeman detuning per microtesla: {:.6e} rad/s", zeeman_detuning(1e-6));
    out
}
