//! Least-squares extraction of resonance descriptors from a spectrum.
//!
//! The lineshape is
//! `f(δ) = γ̃ (A γ̃ + B (δ − δ₀)) / (γ̃² + (δ − δ₀)²) + C`,
//! fitted by damped Gauss–Newton with `γ̃` carried as `ln γ̃`.

use nalgebra::{Matrix5, Vector5};

pub use crate::analytic::{to_polar, LineshapeParams, PolarForm};
use crate::error::{Error, Result};
use crate::propagation::Spectrum;

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;
pub const GRADIENT_TOLERANCE: f64 = 1e-12;
pub const MIN_VARIANCE: f64 = 1e-12;
pub const MIN_POINTS: usize = 7;
/// Required grid span in units of the initial width guess.
pub const MIN_SPAN_WIDTHS: f64 = 6.0;

const DAMPING_FACTOR: f64 = 10.0;
const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e20;
/// A small accepted step only ends the fit once the damping no longer
/// shortens it.
const SETTLED_DAMPING: f64 = 1e-9;
const POLISH_STEPS: usize = 4;
const POLISH_REACH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FitResult {
    pub params: LineshapeParams,
    pub polar: PolarForm,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Variances of `(A, B, C, γ̃, δ₀)`.
    pub covariance_diagonal: [f64; 5],
}

/// Partial derivatives of the lineshape with respect to
/// `(A, B, C, γ̃, δ₀)` at `delta`.
pub fn lineshape_jacobian(p: &LineshapeParams, delta: f64) -> [f64; 5] {
    let g = p.gamma_tilde;
    let u = delta - p.delta0;
    let den = g * g + u * u;
    let num = p.a * g * g + p.b * g * u;
    let d_g = (2.0 * p.a * g + p.b * u) / den - 2.0 * g * num / (den * den);
    let d_u = p.b * g / den - 2.0 * u * num / (den * den);
    [g * g / den, g * u / den, 1.0, d_g, -d_u]
}

fn variance(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    if at <= x[0] {
        return y[0];
    }
    let last = x.len() - 1;
    if at >= x[last] {
        return y[last];
    }
    let k = x.partition_point(|&v| v <= at);
    let (x0, x1) = (x[k - 1], x[k]);
    let t = (at - x0) / (x1 - x0);
    y[k - 1] + t * (y[k] - y[k - 1])
}

fn check_input(spectrum: &Spectrum) -> Result<()> {
    spectrum.validate()?;
    if spectrum.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let var = variance(&spectrum.transmission);
    if var < MIN_VARIANCE {
        return Err(Error::DegenerateSpectrum { variance: var });
    }
    Ok(())
}

/// Half-width at half-maximum of `|dev|` around index `i`, linearly
/// interpolated at the crossings.
fn half_width(x: &[f64], dev: &[f64], i: usize) -> f64 {
    let half = 0.5 * dev[i].abs();
    let crossing = |j: usize, k: usize| {
        let (a, b) = (dev[j].abs(), dev[k].abs());
        if a == b {
            x[j]
        } else {
            x[j] + (half - a) / (b - a) * (x[k] - x[j])
        }
    };
    let mut l = i;
    while l > 0 && dev[l].abs() > half {
        l -= 1;
    }
    let left = if l < i && dev[l].abs() <= half { crossing(l, l + 1) } else { x[l] };
    let mut r = i;
    while r + 1 < x.len() && dev[r].abs() > half {
        r += 1;
    }
    let right = if r > i && dev[r].abs() <= half { crossing(r, r - 1) } else { x[r] };
    let min_step = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    (0.5 * (right - left)).max(min_step.min(x[x.len() - 1] - x[0]))
}

/// Starting point for the fit, read off the spectrum's shape.
pub fn initial_guess(spectrum: &Spectrum) -> Result<LineshapeParams> {
    check_input(spectrum)?;
    let x = &spectrum.delta_grid;
    let y = &spectrum.transmission;
    let n = x.len();
    let per_side = (n / 20).max(1);
    let outer: Vec<f64> = y[..per_side].iter().chain(&y[n - per_side..]).copied().collect();
    let c = median(outer);
    let dev: Vec<f64> = y.iter().map(|v| v - c).collect();

    let argmax = |key: &dyn Fn(f64) -> f64| {
        (0..n).fold(0, |best, k| if key(dev[k]) > key(dev[best]) { k } else { best })
    };
    let i = argmax(&|v: f64| v.abs());
    let hi = argmax(&|v: f64| v);
    let lo = argmax(&|v: f64| -v);
    let (g_max, g_min) = (dev[hi], dev[lo]);
    let primary = dev[i].abs();

    let secondary = if dev[i] > 0.0 { -g_min } else { g_max };
    if secondary >= 0.2 * primary && secondary > 0.0 && hi != lo {
        let a = g_max + g_min;
        let d = g_max - g_min;
        let b_abs = (d * d - a * a).max(0.0).sqrt();
        if b_abs > 0.0 {
            let (p_plus, p_minus) = (x[hi], x[lo]);
            let b = b_abs.copysign(p_plus - p_minus);
            let gamma_tilde = (p_plus - p_minus).abs() * b_abs / (2.0 * d);
            let delta0 = p_plus - gamma_tilde * (d - a) / b;
            return Ok(LineshapeParams { a, b, c, gamma_tilde, delta0 });
        }
    }

    let delta0 = x[i];
    let gamma_tilde = half_width(x, &dev, i);
    let b = interpolate(x, y, delta0 + gamma_tilde) - interpolate(x, y, delta0 - gamma_tilde);
    Ok(LineshapeParams { a: dev[i], b, c, gamma_tilde, delta0 })
}

/// Problem in internal units: `x' = (δ − x0)/xs`, `y' = T/ys`, parameters
/// `(A', B', C', ln γ̃', δ₀')`.
struct Scaled {
    x: Vec<f64>,
    y: Vec<f64>,
    x0: f64,
    xs: f64,
    ys: f64,
}

impl Scaled {
    fn new(spectrum: &Spectrum) -> Scaled {
        let grid = &spectrum.delta_grid;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let x0 = 0.5 * (lo + hi);
        let xs = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
        let ys = spectrum.transmission.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let ys = if ys > 0.0 { ys } else { 1.0 };
        Scaled {
            x: grid.iter().map(|d| (d - x0) / xs).collect(),
            y: spectrum.transmission.iter().map(|t| t / ys).collect(),
            x0,
            xs,
            ys,
        }
    }

    fn to_internal(&self, p: &LineshapeParams) -> Vector5<f64> {
        Vector5::new(
            p.a / self.ys,
            p.b / self.ys,
            p.c / self.ys,
            (p.gamma_tilde / self.xs).ln(),
            (p.delta0 - self.x0) / self.xs,
        )
    }

    fn to_params(&self, v: &Vector5<f64>) -> LineshapeParams {
        LineshapeParams {
            a: v[0] * self.ys,
            b: v[1] * self.ys,
            c: v[2] * self.ys,
            gamma_tilde: v[3].exp() * self.xs,
            delta0: v[4] * self.xs + self.x0,
        }
    }

    fn unit(v: &Vector5<f64>) -> LineshapeParams {
        LineshapeParams { a: v[0], b: v[1], c: v[2], gamma_tilde: v[3].exp(), delta0: v[4] }
    }

    fn cost(&self, v: &Vector5<f64>) -> f64 {
        let p = Self::unit(v);
        self.x.iter().zip(&self.y).map(|(&x, &y)| (p.evaluate(x) - y).powi(2)).sum()
    }

    /// Normal equations `JᵀJ` and gradient `Jᵀr` in internal parameters.
    fn normal(&self, v: &Vector5<f64>) -> (Matrix5<f64>, Vector5<f64>) {
        let p = Self::unit(v);
        let mut jtj = Matrix5::zeros();
        let mut jtr = Vector5::zeros();
        for (&x, &y) in self.x.iter().zip(&self.y) {
            let mut j = Vector5::from(lineshape_jacobian(&p, x));
            j[3] *= p.gamma_tilde;
            let r = p.evaluate(x) - y;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        (jtj, jtr)
    }
}

/// Fits the lineshape to `spectrum`, starting from [`initial_guess`].
pub fn fit_lineshape(spectrum: &Spectrum) -> Result<FitResult> {
    if spectrum.len() < MIN_POINTS {
        return Err(Error::InvalidInput(format!(
            "fit needs at least {MIN_POINTS} points, got {}",
            spectrum.len()
        )));
    }
    let guess = initial_guess(spectrum)?;
    let grid = &spectrum.delta_grid;
    let span = grid[grid.len() - 1] - grid[0];
    if span < MIN_SPAN_WIDTHS * guess.gamma_tilde {
        return Err(Error::InvalidInput(format!(
            "grid span {span:.6e} is below {MIN_SPAN_WIDTHS} initial widths ({:.6e})",
            guess.gamma_tilde
        )));
    }
    fit_lineshape_from(spectrum, &guess)
}

/// Fits the lineshape starting from `start`.
pub fn fit_lineshape_from(spectrum: &Spectrum, start: &LineshapeParams) -> Result<FitResult> {
    check_input(spectrum)?;
    if spectrum.len() < MIN_POINTS {
        return Err(Error::InvalidInput(format!(
            "fit needs at least {MIN_POINTS} points, got {}",
            spectrum.len()
        )));
    }
    if !(start.gamma_tilde > 0.0) {
        return Err(Error::InvalidInput("initial width must be > 0".into()));
    }
    let prob = Scaled::new(spectrum);
    let mut v = prob.to_internal(start);
    let mut cost = prob.cost(&v);
    let mut lambda = INITIAL_DAMPING;
    let mut converged = false;
    let mut iterations = 0;
    let (mut jtj, mut jtr) = prob.normal(&v);

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if jtr.amax() < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        let mut m = jtj;
        for k in 0..5 {
            m[(k, k)] += lambda * jtj[(k, k)].max(f64::MIN_POSITIVE);
        }
        let step = match m.lu().solve(&(-jtr)) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => {
                lambda *= DAMPING_FACTOR;
                if lambda > MAX_DAMPING {
                    break;
                }
                continue;
            }
        };
        let small = step.norm() <= STEP_TOLERANCE * (v.norm() + STEP_TOLERANCE);
        let trial = v + step;
        let trial_cost = prob.cost(&trial);
        if trial_cost.is_finite() && trial_cost <= cost {
            v = trial;
            cost = trial_cost;
            (jtj, jtr) = prob.normal(&v);
            lambda = (lambda / DAMPING_FACTOR).max(1e-15);
            if small && lambda <= SETTLED_DAMPING {
                converged = true;
                break;
            }
        } else {
            if small {
                converged = true;
                break;
            }
            lambda *= DAMPING_FACTOR;
            if lambda > MAX_DAMPING {
                break;
            }
        }
    }

    if converged {
        v = polish(&prob, v, cost);
    }

    let params = prob.to_params(&v);
    let n = spectrum.len();
    let ss: f64 = spectrum
        .delta_grid
        .iter()
        .zip(&spectrum.transmission)
        .map(|(&d, &t)| (params.evaluate(d) - t).powi(2))
        .sum();
    Ok(FitResult {
        params,
        polar: params.polar(),
        residual_rms: (ss / n as f64).sqrt(),
        converged,
        iterations,
        covariance_diagonal: covariance_diagonal(spectrum, &params, ss),
    })
}

/// Undamped Gauss–Newton steps from a converged point. Near the minimum the
/// cost is flat to rounding, so short steps are judged by the gradient
/// they solve for rather than by the cost. Removes the dependence of the
/// result on where the damped iteration happened to stop.
fn polish(prob: &Scaled, mut v: Vector5<f64>, mut cost: f64) -> Vector5<f64> {
    for _ in 0..POLISH_STEPS {
        let (jtj, jtr) = prob.normal(&v);
        let Some(step) = jtj.lu().solve(&(-jtr)) else { break };
        let trial = v + step;
        let trial_cost = prob.cost(&trial);
        let local = step.norm() <= POLISH_REACH * (v.norm() + POLISH_REACH);
        if !local || !(trial_cost <= cost * (1.0 + 1e-12)) {
            break;
        }
        v = trial;
        cost = trial_cost.min(cost);
        if step.norm() <= f64::EPSILON * v.norm() {
            break;
        }
    }
    v
}

fn covariance_diagonal(spectrum: &Spectrum, p: &LineshapeParams, ss: f64) -> [f64; 5] {
    let n = spectrum.len();
    let mut jtj = Matrix5::<f64>::zeros();
    for &d in &spectrum.delta_grid {
        let j = Vector5::from(lineshape_jacobian(p, d));
        jtj += j * j.transpose();
    }
    let s2 = ss / (n.saturating_sub(5).max(1)) as f64;
    match jtj.try_inverse() {
        Some(inv) => std::array::from_fn(|k| s2 * inv[(k, k)]),
        None => [f64::NAN; 5],
    }
}
