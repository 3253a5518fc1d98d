//! Scan configuration: a TOML document, optionally layered over a named
//! preset. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::doppler::{QuadratureSpec, Scheme};
use crate::error::{Error, Result};
use crate::model::{Fields, Medium, Rates};
use crate::propagation::SlabConfig;
use crate::units::{from_cm, from_khz, from_mhz, from_nm, from_per_cm3};

use super::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub density_per_cm3: f64,
    pub length_cm: f64,
    pub wavelength_nm: f64,
    pub ku_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub gamma_r_mhz: f64,
    pub gamma_deph_mhz: f64,
    pub gamma_bc_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    pub omega_d_mhz: f64,
    pub omega_p_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Centre and span follow the resonance at each one-photon detuning.
    Auto,
    /// The same grid for every one-photon detuning.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub mode: GridMode,
    pub points: usize,
    /// Auto mode: full span of the final grid in resonance widths.
    pub span_widths: f64,
    /// Auto mode: points and span of the locating pass.
    pub probe_points: usize,
    pub probe_span_widths: f64,
    /// Fixed mode.
    pub center_khz: f64,
    pub span_khz: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            mode: GridMode::Auto,
            points: 201,
            span_widths: 30.0,
            probe_points: 101,
            probe_span_widths: 40.0,
            center_khz: 0.0,
            span_khz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub quadrature: Scheme,
    pub nodes: usize,
    pub truncation: f64,
    pub verify_refinement: bool,
    pub slabs: usize,
    pub richardson_check: bool,
    pub drive_attenuation: bool,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        let s = SlabConfig::default();
        NumericsConfig {
            quadrature: q.scheme,
            nodes: q.node_count,
            truncation: q.truncation,
            verify_refinement: q.verify_refinement,
            slabs: s.slab_count,
            richardson_check: s.richardson_check,
            drive_attenuation: s.drive_attenuation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub spectra: bool,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("scan_output"),
            spectra: true,
            svg: false,
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub medium: MediumConfig,
    pub rates: RatesConfig,
    pub fields: FieldsConfig,
    pub delta_grid: GridConfig,
    pub sweep: SweepConfig,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
}

// Partial documents, merged key by key over the preset.

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    density_per_cm3: Option<f64>,
    length_cm: Option<f64>,
    wavelength_nm: Option<f64>,
    ku_mhz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRates {
    gamma_r_mhz: Option<f64>,
    gamma_deph_mhz: Option<f64>,
    gamma_bc_khz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFields {
    omega_d_mhz: Option<f64>,
    omega_p_mhz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    mode: Option<GridMode>,
    points: Option<usize>,
    span_widths: Option<f64>,
    probe_points: Option<usize>,
    probe_span_widths: Option<f64>,
    center_khz: Option<f64>,
    span_khz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start_mhz: Option<f64>,
    stop_mhz: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    quadrature: Option<Scheme>,
    nodes: Option<usize>,
    truncation: Option<f64>,
    verify_refinement: Option<bool>,
    slabs: Option<usize>,
    richardson_check: Option<bool>,
    drive_attenuation: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    spectra: Option<bool>,
    svg: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawConfig {
    preset: Option<String>,
    #[serde(default)]
    medium: RawMedium,
    #[serde(default)]
    rates: RawRates,
    #[serde(default)]
    fields: RawFields,
    #[serde(default)]
    delta_grid: RawGrid,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    output: RawOutput,
}

macro_rules! overlay {
    ($base:expr, $top:expr; $($f:ident),+) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )+
    };
}

fn required<T>(v: Option<T>, section: &str, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing key `{key}` in [{section}]")))
}

impl RawConfig {
    pub(crate) fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    fn overlay(mut self, top: &RawConfig) -> Self {
        overlay!(self.medium, top.medium; density_per_cm3, length_cm, wavelength_nm, ku_mhz);
        overlay!(self.rates, top.rates; gamma_r_mhz, gamma_deph_mhz, gamma_bc_khz);
        overlay!(self.fields, top.fields; omega_d_mhz, omega_p_mhz);
        overlay!(self.delta_grid, top.delta_grid; mode, points, span_widths, probe_points, probe_span_widths, center_khz, span_khz);
        overlay!(self.sweep, top.sweep; start_mhz, stop_mhz, points);
        overlay!(self.numerics, top.numerics; quadrature, nodes, truncation, verify_refinement, slabs, richardson_check, drive_attenuation);
        overlay!(self.output, top.output; directory, spectra, svg);
        self.preset = top.preset.clone().or(self.preset);
        self
    }

    fn resolve(self) -> Result<ScanConfig> {
        let m = self.medium;
        let r = self.rates;
        let f = self.fields;
        let g = self.delta_grid;
        let s = self.sweep;
        let n = self.numerics;
        let o = self.output;
        let gd = GridConfig::default();
        let nd = NumericsConfig::default();
        let od = OutputConfig::default();
        Ok(ScanConfig {
            preset: self.preset,
            medium: MediumConfig {
                density_per_cm3: required(m.density_per_cm3, "medium", "density_per_cm3")?,
                length_cm: required(m.length_cm, "medium", "length_cm")?,
                wavelength_nm: required(m.wavelength_nm, "medium", "wavelength_nm")?,
                ku_mhz: required(m.ku_mhz, "medium", "ku_mhz")?,
            },
            rates: RatesConfig {
                gamma_r_mhz: required(r.gamma_r_mhz, "rates", "gamma_r_mhz")?,
                gamma_deph_mhz: required(r.gamma_deph_mhz, "rates", "gamma_deph_mhz")?,
                gamma_bc_khz: required(r.gamma_bc_khz, "rates", "gamma_bc_khz")?,
            },
            fields: FieldsConfig {
                omega_d_mhz: required(f.omega_d_mhz, "fields", "omega_d_mhz")?,
                omega_p_mhz: required(f.omega_p_mhz, "fields", "omega_p_mhz")?,
            },
            delta_grid: GridConfig {
                mode: g.mode.unwrap_or(gd.mode),
                points: g.points.unwrap_or(gd.points),
                span_widths: g.span_widths.unwrap_or(gd.span_widths),
                probe_points: g.probe_points.unwrap_or(gd.probe_points),
                probe_span_widths: g.probe_span_widths.unwrap_or(gd.probe_span_widths),
                center_khz: g.center_khz.unwrap_or(gd.center_khz),
                span_khz: g.span_khz.unwrap_or(gd.span_khz),
            },
            sweep: SweepConfig {
                start_mhz: required(s.start_mhz, "sweep", "start_mhz")?,
                stop_mhz: required(s.stop_mhz, "sweep", "stop_mhz")?,
                points: required(s.points, "sweep", "points")?,
            },
            numerics: NumericsConfig {
                quadrature: n.quadrature.unwrap_or(nd.quadrature),
                nodes: n.nodes.unwrap_or(nd.nodes),
                truncation: n.truncation.unwrap_or(nd.truncation),
                verify_refinement: n.verify_refinement.unwrap_or(nd.verify_refinement),
                slabs: n.slabs.unwrap_or(nd.slabs),
                richardson_check: n.richardson_check.unwrap_or(nd.richardson_check),
                drive_attenuation: n.drive_attenuation.unwrap_or(nd.drive_attenuation),
            },
            output: OutputConfig {
                directory: o.directory.unwrap_or(od.directory),
                spectra: o.spectra.unwrap_or(od.spectra),
                svg: o.svg.unwrap_or(od.svg),
            },
        })
    }
}

fn non_negative(section: &str, key: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Config(format!("[{section}] {key} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

fn positive(section: &str, key: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Config(format!("[{section}] {key} must be finite and > 0, got {v}")));
    }
    Ok(())
}

impl ScanConfig {
    /// Parses a configuration document, applying its preset if it names one.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user = RawConfig::parse(text)?;
        let base = match &user.preset {
            Some(name) => presets::raw(name)?,
            None => RawConfig::default(),
        };
        let cfg = base.overlay(&user).resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Canonical form written to the output manifest.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.medium;
        non_negative("medium", "density_per_cm3", m.density_per_cm3)?;
        positive("medium", "length_cm", m.length_cm)?;
        positive("medium", "wavelength_nm", m.wavelength_nm)?;
        non_negative("medium", "ku_mhz", m.ku_mhz)?;
        let r = &self.rates;
        non_negative("rates", "gamma_r_mhz", r.gamma_r_mhz)?;
        non_negative("rates", "gamma_deph_mhz", r.gamma_deph_mhz)?;
        non_negative("rates", "gamma_bc_khz", r.gamma_bc_khz)?;
        if r.gamma_r_mhz == 0.0 && r.gamma_bc_khz == 0.0 {
            return Err(Error::Config(
                "[rates] gamma_r_mhz and gamma_bc_khz cannot both be 0".into(),
            ));
        }
        let f = &self.fields;
        non_negative("fields", "omega_d_mhz", f.omega_d_mhz)?;
        positive("fields", "omega_p_mhz", f.omega_p_mhz)?;
        if f.omega_p_mhz > f.omega_d_mhz {
            return Err(Error::Config(format!(
                "[fields] omega_p_mhz ({}) must not exceed omega_d_mhz ({})",
                f.omega_p_mhz, f.omega_d_mhz
            )));
        }
        let g = &self.delta_grid;
        if g.points < 7 {
            return Err(Error::Config(format!("[delta_grid] points must be >= 7, got {}", g.points)));
        }
        match g.mode {
            GridMode::Auto => {
                positive("delta_grid", "span_widths", g.span_widths)?;
                positive("delta_grid", "probe_span_widths", g.probe_span_widths)?;
                if g.probe_points < 7 {
                    return Err(Error::Config(format!(
                        "[delta_grid] probe_points must be >= 7, got {}",
                        g.probe_points
                    )));
                }
            }
            GridMode::Fixed => {
                positive("delta_grid", "span_khz", g.span_khz)?;
                if !g.center_khz.is_finite() {
                    return Err(Error::Config("[delta_grid] center_khz must be finite".into()));
                }
            }
        }
        let s = &self.sweep;
        if !s.start_mhz.is_finite() || !s.stop_mhz.is_finite() {
            return Err(Error::Config("[sweep] start_mhz and stop_mhz must be finite".into()));
        }
        if s.points == 0 {
            return Err(Error::Config("[sweep] points must be >= 1".into()));
        }
        if s.points > 1 && s.stop_mhz <= s.start_mhz {
            return Err(Error::Config("[sweep] stop_mhz must exceed start_mhz".into()));
        }
        self.quadrature()
            .validate()
            .and_then(|_| self.slabs().validate())
            .map_err(|e| Error::Config(format!("[numerics] {e}")))?;
        Ok(())
    }

    /// Warnings about parameter regimes outside the model's validity.
    pub fn warnings(&self) -> Vec<String> {
        match self.preset.as_deref() {
            Some(name) => presets::warning(name).into_iter().map(String::from).collect(),
            None => Vec::new(),
        }
    }

    pub fn rates(&self) -> Result<Rates> {
        Rates::new(
            from_mhz(self.rates.gamma_r_mhz),
            from_mhz(self.rates.gamma_deph_mhz),
            from_khz(self.rates.gamma_bc_khz),
        )
    }

    /// Entry fields at zero detunings.
    pub fn fields(&self) -> Result<Fields> {
        Fields::new(from_mhz(self.fields.omega_d_mhz), from_mhz(self.fields.omega_p_mhz), 0.0, 0.0)
    }

    pub fn medium(&self) -> Result<Medium> {
        Medium::new(
            from_per_cm3(self.medium.density_per_cm3),
            from_cm(self.medium.length_cm),
            from_nm(self.medium.wavelength_nm),
            from_mhz(self.medium.ku_mhz),
        )
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            scheme: self.numerics.quadrature,
            node_count: self.numerics.nodes,
            truncation: self.numerics.truncation,
            verify_refinement: self.numerics.verify_refinement,
        }
    }

    pub fn slabs(&self) -> SlabConfig {
        SlabConfig {
            slab_count: self.numerics.slabs,
            richardson_check: self.numerics.richardson_check,
            drive_attenuation: self.numerics.drive_attenuation,
        }
    }

    /// One-photon detunings of the sweep, MHz.
    pub fn sweep_mhz(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.points == 1 {
            return vec![s.start_mhz];
        }
        let step = (s.stop_mhz - s.start_mhz) / (s.points - 1) as f64;
        (0..s.points)
            .map(|i| if i + 1 == s.points { s.stop_mhz } else { s.start_mhz + step * i as f64 })
            .collect()
    }
}
