//! Sweep harness: for each one-photon detuning, simulate the probe
//! spectrum, normalize it, fit the lineshape and collect descriptors.
//!
//! Two-photon detunings on the harness side (grids, spectrum files, `δ₀`)
//! use the Raman axis `δ_ext = −δ`, where `δ` is the detuning of
//! [`crate::model`]. On this axis the fitted angle is positive where the
//! resonance turns into an absorption peak at positive one-photon detuning.

pub mod config;
pub mod io;
pub mod presets;
pub mod svg;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{GridMode, ScanConfig};

use crate::analytic::{ac_stark_shift, resonance_width};
use crate::doppler::QuadratureSpec;
use crate::error::{Error, Result};
use crate::fitting::{fit_lineshape, initial_guess, FitResult};
use crate::model::{Fields, Medium, Rates};
use crate::propagation::{normalize, transmit, SlabConfig, Spectrum};
use crate::units::{from_khz, from_mhz, to_khz};

pub const THREADS_ENV: &str = "LAMBDA_SPECTRA_THREADS";

/// Auto grids are re-centred on the located resonance until the span
/// changes by less than `GRID_SETTLE` (relative), at most this many times.
pub const MAX_GRID_PASSES: usize = 4;
const GRID_SETTLE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DescriptorRow {
    pub big_delta_mhz: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub phi: f64,
    pub gamma_tilde_khz: f64,
    pub delta0_khz: f64,
    pub residual_rms: f64,
    pub converged: bool,
    pub gain_flag: bool,
}

impl DescriptorRow {
    pub fn from_fit(big_delta_mhz: f64, fit: &FitResult, gain_flag: bool) -> Self {
        let p = &fit.params;
        DescriptorRow {
            big_delta_mhz,
            a: p.a,
            b: p.b,
            c: p.c,
            d: fit.polar.d,
            phi: fit.polar.phi,
            gamma_tilde_khz: to_khz(p.gamma_tilde),
            delta0_khz: to_khz(p.delta0),
            residual_rms: fit.residual_rms,
            converged: fit.converged,
            gain_flag,
        }
    }

    pub fn failed(big_delta_mhz: f64, gain_flag: bool) -> Self {
        DescriptorRow {
            big_delta_mhz,
            a: f64::NAN,
            b: f64::NAN,
            c: f64::NAN,
            d: f64::NAN,
            phi: f64::NAN,
            gamma_tilde_khz: f64::NAN,
            delta0_khz: f64::NAN,
            residual_rms: f64::NAN,
            converged: false,
            gain_flag,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct DescriptorCurve {
    pub rows: Vec<DescriptorRow>,
}

/// Outcome of one sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub big_delta_mhz: f64,
    /// Normalized spectrum on the Raman axis, if the simulation succeeded.
    pub spectrum: Option<Spectrum>,
    pub fit: Result<FitResult>,
    pub row: DescriptorRow,
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub curve: DescriptorCurve,
    pub points: Vec<PointResult>,
}

/// Physical and numerical setup shared by all sweep points.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub rates: Rates,
    pub fields: Fields,
    pub medium: Medium,
    pub quadrature: QuadratureSpec,
    pub slabs: SlabConfig,
    pub grid: config::GridConfig,
}

fn linspace(center: f64, half_span: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * half_span / (points - 1) as f64;
    (0..points).map(|i| center - half_span + step * i as f64).collect()
}

impl Simulation {
    pub fn from_config(cfg: &ScanConfig) -> Result<Self> {
        Ok(Simulation {
            rates: cfg.rates()?,
            fields: cfg.fields()?,
            medium: cfg.medium()?,
            quadrature: cfg.quadrature(),
            slabs: cfg.slabs(),
            grid: cfg.delta_grid.clone(),
        })
    }

    /// Raw transmission on a Raman-axis grid (rad/s, increasing).
    pub fn transmit_raman(&self, big_delta: f64, raman_grid: &[f64]) -> Result<Spectrum> {
        let model_grid: Vec<f64> = raman_grid.iter().rev().map(|d| -d).collect();
        let fields = self.fields.with_big_delta(big_delta);
        let mut s = transmit(&self.rates, &fields, &self.medium, &self.quadrature, &self.slabs, &model_grid)?;
        s.transmission.reverse();
        s.delta_grid = raman_grid.to_vec();
        Ok(s)
    }

    /// Normalized spectrum at `big_delta` on the configured grid.
    pub fn spectrum(&self, big_delta: f64) -> Result<Spectrum> {
        let g = &self.grid;
        match g.mode {
            GridMode::Fixed => {
                let grid = linspace(from_khz(g.center_khz), 0.5 * from_khz(g.span_khz), g.points);
                normalize(&self.transmit_raman(big_delta, &grid)?)
            }
            GridMode::Auto => {
                let gamma = self.rates.gamma();
                let od = self.fields.omega_d;
                let width = resonance_width(big_delta, od, gamma, self.rates.gamma_bc());
                if !(width > 0.0) || !width.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "no resonance width to size the grid at big_delta = {big_delta:.6e}"
                    )));
                }
                let mut centre = -ac_stark_shift(big_delta, od, gamma);
                let mut half = 0.5 * g.probe_span_widths * width;
                let mut points = g.probe_points;
                let mut spectrum = None;
                for pass in 0..MAX_GRID_PASSES {
                    let grid = linspace(centre, half, points);
                    let s = normalize(&self.transmit_raman(big_delta, &grid)?)?;
                    let guess = match initial_guess(&s) {
                        Ok(p) => p,
                        Err(_) => return Ok(s),
                    };
                    let target = 0.5 * g.span_widths * guess.gamma_tilde;
                    let settled = pass > 0 && (target / half - 1.0).abs() <= GRID_SETTLE;
                    spectrum = Some(s);
                    if settled || !(target > 0.0) || !target.is_finite() {
                        break;
                    }
                    centre = guess.delta0;
                    half = target;
                    points = g.points;
                }
                Ok(spectrum.expect("at least one pass"))
            }
        }
    }

    pub fn point(&self, big_delta_mhz: f64) -> PointResult {
        let spectrum = self.spectrum(from_mhz(big_delta_mhz));
        let (spectrum, fit) = match spectrum {
            Ok(s) => {
                let fit = fit_lineshape(&s);
                (Some(s), fit)
            }
            Err(e) => (None, Err(e)),
        };
        let gain = spectrum.as_ref().is_some_and(|s| s.gain_flag);
        let row = match &fit {
            Ok(f) => DescriptorRow::from_fit(big_delta_mhz, f, gain),
            Err(e) => {
                log::warn!("big_delta = {big_delta_mhz} MHz: {e}");
                DescriptorRow::failed(big_delta_mhz, gain)
            }
        };
        PointResult { big_delta_mhz, spectrum, fit, row }
    }
}

/// Runs the sweep. Failures at individual points are recorded in their rows.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanOutput> {
    cfg.validate()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    let sim = Simulation::from_config(cfg)?;
    let points: Vec<PointResult> = cfg.sweep_mhz().into_par_iter().map(|d| sim.point(d)).collect();
    let curve = DescriptorCurve {
        rows: points.iter().map(|p| p.row).collect(),
    };
    Ok(ScanOutput { curve, points })
}

pub const MANIFEST: &str = "manifest.toml";
pub const DESCRIPTORS: &str = "descriptors.csv";
pub const SPECTRA_DIR: &str = "spectra";
pub const PLOT: &str = "descriptors.svg";

pub fn spectrum_file_name(index: usize) -> String {
    format!("spectrum_{index:03}.csv")
}

/// Accepts an absent or empty directory, or one holding the output of the
/// same configuration.
fn prepare_output_dir(dir: &Path, manifest: &str) -> Result<()> {
    if dir.exists() {
        let existing = dir.join(MANIFEST);
        if existing.exists() {
            let previous = std::fs::read_to_string(&existing).map_err(|e| Error::io(&existing, e))?;
            if previous != manifest {
                return Err(Error::Config(format!(
                    "{} holds a scan made with a different configuration; refusing to mix outputs",
                    dir.display()
                )));
            }
        } else {
            let mut entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
            if entries.next().is_some() {
                return Err(Error::Config(format!(
                    "{} is not empty and has no {MANIFEST}; refusing to write into it",
                    dir.display()
                )));
            }
        }
    }
    std::fs::create_dir_all(dir.join(SPECTRA_DIR)).map_err(|e| Error::io(dir, e))
}

/// Writes manifest, descriptor CSV, spectra and optional plot into `dir`.
pub fn write_outputs(cfg: &ScanConfig, out: &ScanOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest = cfg.to_toml_string();
    prepare_output_dir(dir, &manifest)?;
    let mut written = Vec::new();
    let path = dir.join(MANIFEST);
    std::fs::write(&path, &manifest).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    let path = dir.join(DESCRIPTORS);
    io::export_descriptors_csv(&out.curve, &path)?;
    written.push(path);
    if cfg.output.spectra {
        for (i, p) in out.points.iter().enumerate() {
            if let Some(s) = &p.spectrum {
                let path = dir.join(SPECTRA_DIR).join(spectrum_file_name(i));
                io::export_spectrum_csv(s, &path)?;
                written.push(path);
            }
        }
    }
    if cfg.output.svg {
        let path = dir.join(PLOT);
        std::fs::write(&path, svg::descriptor_plot(&out.curve)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Caps the global thread pool from `LAMBDA_SPECTRA_THREADS` (0 or unset
/// means one thread per core). Returns the cap applied, if any.
pub fn configure_threads() -> Result<Option<usize>> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => return Ok(None),
    };
    if n == 0 {
        return Ok(None);
    }
    // A pool that is already built keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}
