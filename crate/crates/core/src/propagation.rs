//! Propagation of the probe and drive through an optically thick cell and
//! normalization of the resulting transmission spectra.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::doppler::{QuadratureSpec, Rule, VelocityQuadrature};
use crate::error::{Error, Result};
use crate::model::{self, Fields, Medium, Rates, A, B, C};

/// Probe absorption below `−GAIN_THRESHOLD · κ/γ` marks a slab as gaining.
pub const GAIN_THRESHOLD: f64 = 1e-6;

/// Smallest reference transmission accepted by [`normalize`].
pub const MIN_REFERENCE: f64 = 1e-250;

/// Rabi frequencies never drop below this fraction of their entry value, so
/// that `ρ_ab / Ω_p` stays defined in a fully absorbed beam.
const RABI_FLOOR: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlabConfig {
    pub slab_count: usize,
    /// Repeat with twice the slabs and record the largest change.
    pub richardson_check: bool,
    pub drive_attenuation: bool,
}

impl Default for SlabConfig {
    fn default() -> Self {
        SlabConfig {
            slab_count: 128,
            richardson_check: false,
            drive_attenuation: true,
        }
    }
}

impl SlabConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slab_count < 16 {
            return Err(Error::InvalidInput(format!(
                "slab_count must be >= 16, got {}",
                self.slab_count
            )));
        }
        Ok(())
    }
}

/// Everything that determines a simulated spectrum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimulationParams {
    pub rates: Rates,
    pub fields: Fields,
    pub medium: Medium,
    pub quadrature: QuadratureSpec,
    pub slabs: SlabConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub delta_grid: Vec<f64>,
    pub transmission: Vec<f64>,
    /// Transmission with the ground-state coherence suppressed.
    pub reference: Option<f64>,
    /// Some slab at some grid point showed net probe gain.
    pub gain_flag: bool,
    pub metadata: Option<SimulationParams>,
    /// Largest change of any value when the slab count is doubled.
    pub richardson_error: Option<f64>,
}

impl Spectrum {
    pub fn new(delta_grid: Vec<f64>, transmission: Vec<f64>) -> Result<Self> {
        let s = Spectrum {
            delta_grid,
            transmission,
            reference: None,
            gain_flag: false,
            metadata: None,
            richardson_error: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_grid.len() != self.transmission.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} points but transmission has {}",
                self.delta_grid.len(),
                self.transmission.len()
            )));
        }
        check_grid(&self.delta_grid)?;
        if let Some((i, t)) = self
            .transmission
            .iter()
            .enumerate()
            .find(|(_, t)| !t.is_finite() || **t < 0.0)
        {
            return Err(Error::InvalidInput(format!(
                "transmission[{i}] = {t} is not finite and >= 0"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.delta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_grid.is_empty()
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(i) = grid.iter().position(|d| !d.is_finite()) {
        return Err(Error::InvalidInput(format!("grid point {i} is not finite")));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!(
            "grid is not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

/// Outcome of marching one field configuration through the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchResult {
    pub log_probe: f64,
    pub log_drive: f64,
    /// Smallest probe absorption coefficient met on the way, m^-1.
    pub min_alpha_probe: f64,
}

/// Integrates `d ln I / dz = −α` for probe and drive over `length` in
/// `slabs` equal steps. `alpha(I_p, I_d)` returns the local `(α_p, α_d)`
/// for intensities relative to the entry values.
///
/// Third-order Adams–Bashforth in the log intensity, started with two
/// Heun steps. Each slab costs one call of `alpha` after the first two,
/// which cost two; constant coefficients are integrated exactly.
pub fn march<F>(length: f64, slabs: usize, mut alpha: F) -> Result<MarchResult>
where
    F: FnMut(f64, f64) -> Result<(f64, f64)>,
{
    let dz = length / slabs as f64;
    let (mut lp, mut ld) = (0.0f64, 0.0f64);
    let mut history: [(f64, f64); 2] = [(0.0, 0.0); 2];
    let mut min_alpha = f64::INFINITY;
    for k in 0..slabs {
        let (ap, ad) = alpha(lp.exp(), ld.exp())?;
        min_alpha = min_alpha.min(ap);
        let [(p1, d1), (p2, d2)] = history;
        let (sp, sd) = match k {
            0 | 1 => {
                let (ep, ed) = alpha((lp - ap * dz).exp(), (ld - ad * dz).exp())?;
                (0.5 * (ap + ep), 0.5 * (ad + ed))
            }
            _ => (
                (23.0 * ap - 16.0 * p1 + 5.0 * p2) / 12.0,
                (23.0 * ad - 16.0 * d1 + 5.0 * d2) / 12.0,
            ),
        };
        lp -= sp * dz;
        ld -= sd * dz;
        history = [(ap, ad), (p1, d1)];
    }
    Ok(MarchResult {
        log_probe: lp,
        log_drive: ld,
        min_alpha_probe: min_alpha,
    })
}

/// Doppler-averaged local absorption coefficients `(α_p, α_d)` in m^-1.
///
/// `α_p = Im χ` with `χ = κ ρ_ab / Ω_p`; the drive sees the two-level
/// coefficient `κ γ/(γ² + Δ_v²) (ρ_cc − ρ_aa)` of each velocity class.
#[allow(clippy::too_many_arguments)]
pub fn local_absorption(
    rates: &Rates,
    kappa: f64,
    ku: f64,
    rule: &Rule,
    omega_d: f64,
    omega_p: f64,
    big_delta: f64,
    small_delta: f64,
    coherence: bool,
) -> Result<(f64, f64)> {
    let g = rates.gamma();
    let od = Complex64::new(omega_d, 0.0);
    let op = Complex64::new(omega_p, 0.0);
    let class = |dv: f64| -> Result<(f64, f64)> {
        let rho = model::solve_steady_state(rates, od, op, dv, small_delta, coherence, false)?;
        let ap = kappa * rho.get(A, B).im / omega_p;
        let ad = kappa * g / (g * g + dv * dv) * (rho.population(C) - rho.population(A));
        Ok((ap, ad))
    };
    if ku == 0.0 {
        return class(big_delta);
    }
    let (mut ap, mut ad) = (0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (p, d) = class(big_delta - ku * x)?;
        ap += w * p;
        ad += w * d;
    }
    Ok((ap, ad))
}

struct Propagator<'a> {
    rates: &'a Rates,
    fields: &'a Fields,
    medium: &'a Medium,
    quad: &'a VelocityQuadrature,
    drive_attenuation: bool,
    kappa: f64,
}

impl Propagator<'_> {
    fn point(&self, rule: &Rule, slabs: usize, small_delta: f64, coherence: bool) -> Result<MarchResult> {
        let f = self.fields;
        march(self.medium.length, slabs, |ip, id| {
            let op = f.omega_p * ip.sqrt().max(RABI_FLOOR);
            let od = if self.drive_attenuation {
                f.omega_d * id.sqrt().max(RABI_FLOOR)
            } else {
                f.omega_d
            };
            let (ap, ad) = local_absorption(
                self.rates,
                self.kappa,
                self.medium.ku,
                rule,
                od,
                op,
                f.big_delta,
                small_delta,
                coherence,
            )?;
            Ok((ap, if self.drive_attenuation { ad } else { 0.0 }))
        })
    }

    /// Transmission at one grid point, checked against the refined
    /// quadrature when one is configured.
    fn transmission(&self, slabs: usize, small_delta: f64, coherence: bool) -> Result<(f64, f64)> {
        let r = self.point(self.quad.rule(), slabs, small_delta, coherence)?;
        let t = r.log_probe.exp();
        if let Some(refined) = self.quad.refined() {
            let rf = self.point(refined, slabs, small_delta, coherence)?;
            let tf = rf.log_probe.exp();
            crate::doppler::check_refinement(t, tf, (t - tf).abs())?;
            return Ok((tf, rf.min_alpha_probe));
        }
        Ok((t, r.min_alpha_probe))
    }
}

/// Unnormalized probe transmission `I_p(L)/I_p(0)` on `delta_grid`.
///
/// The reference transmission (coherence suppressed, evaluated at the grid
/// centre) is stored in the result for [`normalize`].
pub fn transmit(
    rates: &Rates,
    fields: &Fields,
    medium: &Medium,
    quad: &QuadratureSpec,
    slabs: &SlabConfig,
    delta_grid: &[f64],
) -> Result<Spectrum> {
    fields.validate()?;
    medium.validate()?;
    slabs.validate()?;
    check_grid(delta_grid)?;
    if delta_grid.is_empty() {
        return Err(Error::InvalidInput("empty two-photon grid".into()));
    }
    if !(medium.length > 0.0) {
        return Err(Error::InvalidInput("cell length must be > 0".into()));
    }
    if !(fields.omega_p > 0.0) {
        return Err(Error::InvalidInput("probe Rabi frequency must be > 0".into()));
    }
    if fields.omega_p > fields.omega_d {
        return Err(Error::InvalidInput(format!(
            "weak-probe regime needs omega_p <= omega_d ({} > {})",
            fields.omega_p, fields.omega_d
        )));
    }
    let quad_rt = VelocityQuadrature::new(*quad)?;
    let kappa = medium.kappa(rates.gamma_r());
    let prop = Propagator {
        rates,
        fields,
        medium,
        quad: &quad_rt,
        drive_attenuation: slabs.drive_attenuation,
        kappa,
    };
    let gain_limit = -GAIN_THRESHOLD * kappa / rates.gamma().max(f64::MIN_POSITIVE);

    let n = slabs.slab_count;
    let points: Vec<(f64, f64)> = delta_grid
        .par_iter()
        .map(|&d| prop.transmission(n, d, true))
        .collect::<Result<_>>()?;
    let transmission: Vec<f64> = points.iter().map(|p| p.0).collect();
    let gain_flag = kappa > 0.0 && points.iter().any(|p| p.1 < gain_limit);
    if gain_flag {
        log::warn!(
            "probe gain detected at big_delta = {:.6e} rad/s; outside the absorbing regime",
            fields.big_delta
        );
    }

    let richardson_error = if slabs.richardson_check {
        let fine: Vec<f64> = delta_grid
            .par_iter()
            .map(|&d| prop.transmission(2 * n, d, true).map(|p| p.0))
            .collect::<Result<_>>()?;
        let err = fine
            .iter()
            .zip(&transmission)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Some(err)
    } else {
        None
    };

    let centre = 0.5 * (delta_grid[0] + delta_grid[delta_grid.len() - 1]);
    let reference = prop.transmission(n, centre, false)?.0;

    Ok(Spectrum {
        delta_grid: delta_grid.to_vec(),
        transmission,
        reference: Some(reference),
        gain_flag,
        metadata: Some(SimulationParams {
            rates: *rates,
            fields: *fields,
            medium: *medium,
            quadrature: *quad,
            slabs: *slabs,
        }),
        richardson_error,
    })
}

/// Divides by the reference transmission. Spectra without a stored
/// reference use the mean of their two edge values.
pub fn normalize(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let reference = match spectrum.reference {
        Some(r) => r,
        None => 0.5 * (spectrum.transmission[0] + spectrum.transmission[spectrum.len() - 1]),
    };
    if !(reference > MIN_REFERENCE) || !reference.is_finite() {
        return Err(Error::ZeroBackground { reference });
    }
    Ok(Spectrum {
        transmission: spectrum.transmission.iter().map(|t| t / reference).collect(),
        reference: Some(1.0),
        richardson_error: spectrum.richardson_error.map(|e| e / reference),
        ..spectrum.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{from_khz, from_mhz};

    fn setup(density: f64, ku: f64) -> (Rates, Fields, Medium) {
        let r = Rates::new(from_mhz(3.0), from_mhz(150.0), from_khz(0.7)).unwrap();
        let f = Fields::new(from_mhz(2.5), from_mhz(0.5), from_mhz(1000.0), 0.0).unwrap();
        let m = Medium::new(density, 0.025, 795e-9, ku).unwrap();
        (r, f, m)
    }

    #[test]
    fn empty_cell_is_transparent() {
        let (r, f, m) = setup(0.0, from_mhz(250.0));
        let grid: Vec<f64> = (-5..=5).map(|i| from_khz(i as f64)).collect();
        let s = transmit(&r, &f, &m, &QuadratureSpec::default(), &SlabConfig::default(), &grid).unwrap();
        assert!(s.transmission.iter().all(|&t| t == 1.0));
        assert!(!s.gain_flag);
        assert_eq!(normalize(&s).unwrap().transmission, vec![1.0; 11]);
    }

    #[test]
    fn constant_coefficients_follow_beer_lambert() {
        let r = march(0.05, 64, |_, _| Ok((37.0, 5.0))).unwrap();
        assert!((r.log_probe.exp() - (-37.0f64 * 0.05).exp()).abs() < 1e-12);
        assert!((r.log_drive + 0.25).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let (r, f, m) = setup(2.5e17, 0.0);
        let q = QuadratureSpec::default();
        let sc = SlabConfig::default();
        let strong_probe = Fields { omega_p: 2.0 * f.omega_d, ..f };
        assert!(transmit(&r, &strong_probe, &m, &q, &sc, &[0.0]).is_err());
        let thin = SlabConfig { slab_count: 8, ..sc };
        assert!(transmit(&r, &f, &m, &q, &thin, &[0.0]).is_err());
        assert!(transmit(&r, &f, &m, &q, &sc, &[1.0, 0.0]).is_err());
        let short = Medium { length: 0.0, ..m };
        assert!(transmit(&r, &f, &short, &q, &sc, &[0.0]).is_err());
    }

    #[test]
    fn flat_spectrum_normalizes_to_one() {
        let s = Spectrum::new(vec![0.0, 1.0, 2.0], vec![0.3; 3]).unwrap();
        assert_eq!(normalize(&s).unwrap().transmission, vec![1.0; 3]);
    }

    #[test]
    fn opaque_reference_is_rejected() {
        let mut s = Spectrum::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(normalize(&s), Err(Error::ZeroBackground { .. })));
        s.reference = Some(0.0);
        assert!(matches!(normalize(&s), Err(Error::ZeroBackground { .. })));
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }
}
