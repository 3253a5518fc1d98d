//! Probe transmission spectra of a three-level Λ system in warm vapor with
//! buffer gas, and extraction of resonance descriptors from them.
//!
//! All rates, detunings and Rabi frequencies are angular frequencies in
//! rad/s and all lengths are in metres. Conversions from laboratory units
//! live in [`units`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod doppler;
pub mod error;
pub mod fitting;
pub mod hanle;
pub mod model;
pub mod propagation;
pub mod scan;
pub mod units;

pub use error::{Error, Result};
