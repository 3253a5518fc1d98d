//! Maxwell velocity averaging of a per-velocity-class response.

use std::ops::{AddAssign, Mul};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative change between `n` and `2n` nodes tolerated when refinement is
/// verified.
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussHermite,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub node_count: usize,
    /// Half-width of the trapezoid window in units of `ku`.
    pub truncation: f64,
    /// Also evaluate with twice the nodes and fail on disagreement.
    pub verify_refinement: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::GaussHermite,
            node_count: 64,
            truncation: 6.0,
            verify_refinement: false,
        }
    }
}

impl QuadratureSpec {
    pub fn gauss_hermite(node_count: usize) -> Self {
        QuadratureSpec { node_count, ..Default::default() }
    }

    pub fn trapezoid(node_count: usize, truncation: f64) -> Self {
        QuadratureSpec {
            scheme: Scheme::Trapezoid,
            node_count,
            truncation,
            verify_refinement: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(Error::InvalidInput(format!(
                "quadrature needs at least 8 nodes, got {}",
                self.node_count
            )));
        }
        if self.scheme == Scheme::Trapezoid && !(self.truncation >= 3.0) {
            return Err(Error::InvalidInput(format!(
                "trapezoid truncation must be >= 3 ku, got {}",
                self.truncation
            )));
        }
        Ok(())
    }
}

/// Nodes and weights of a velocity quadrature in the reduced variable
/// `x = kv / ku`. The average of `g` is `Σ wᵢ g(Δ − ku xᵢ)`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn new(scheme: Scheme, node_count: usize, truncation: f64) -> Rule {
        match scheme {
            Scheme::GaussHermite => gauss_hermite_rule(node_count),
            Scheme::Trapezoid => trapezoid_rule(node_count, truncation),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn average<T, F>(&self, big_delta: f64, ku: f64, f: F) -> T
    where
        T: Default + AddAssign + Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        let mut acc = T::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(big_delta - ku * x) * w;
        }
        acc
    }
}

/// Golub–Welsch: nodes are the eigenvalues of the Hermite Jacobi matrix,
/// weights the squared first eigenvector components. Normalized to sum to 1.
fn gauss_hermite_rule(n: usize) -> Rule {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize to remove eigen-solver asymmetry.
    for i in 0..n / 2 {
        let k = n - 1 - i;
        let x = 0.5 * (pairs[k].0 - pairs[i].0);
        let w = 0.5 * (pairs[k].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    }
}

/// Trapezoid over `[−t, t]` with weight `e^{−x²}/√π`; not renormalized.
fn trapezoid_rule(n: usize, t: f64) -> Rule {
    let h = 2.0 * t / (n - 1) as f64;
    let norm = h / std::f64::consts::PI.sqrt();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let x = -t + h * i as f64;
        let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        nodes.push(x);
        weights.push(end * norm * (-x * x).exp());
    }
    Rule { nodes, weights }
}

/// Precomputed quadrature, with the doubled rule kept when refinement is
/// verified.
#[derive(Debug, Clone)]
pub struct VelocityQuadrature {
    spec: QuadratureSpec,
    rule: Rule,
    refined: Option<Rule>,
}

impl VelocityQuadrature {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let rule = Rule::new(spec.scheme, spec.node_count, spec.truncation);
        let refined = spec
            .verify_refinement
            .then(|| Rule::new(spec.scheme, 2 * spec.node_count, spec.truncation));
        Ok(VelocityQuadrature { spec, rule, refined })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn refined(&self) -> Option<&Rule> {
        self.refined.as_ref()
    }

    /// Velocity-averaged response at one-photon detuning `big_delta`.
    /// `ku = 0` evaluates `chi(big_delta)` directly.
    pub fn average<F>(&self, chi: F, big_delta: f64, ku: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(ku >= 0.0) || !ku.is_finite() {
            return Err(Error::InvalidInput(format!("ku must be >= 0, got {ku}")));
        }
        if ku == 0.0 {
            return Ok(chi(big_delta));
        }
        let coarse: Complex64 = self.rule.average(big_delta, ku, &chi);
        if let Some(refined) = &self.refined {
            let fine: Complex64 = refined.average(big_delta, ku, &chi);
            check_refinement(coarse.norm(), fine.norm(), (coarse - fine).norm())?;
            return Ok(fine);
        }
        Ok(coarse)
    }
}

pub(crate) fn check_refinement(coarse: f64, fine: f64, diff: f64) -> Result<()> {
    let scale = coarse.max(fine);
    if diff == 0.0 || scale == 0.0 {
        return Ok(());
    }
    let relative = diff / scale;
    if relative > REFINEMENT_TOLERANCE {
        return Err(Error::QuadratureDivergence { relative });
    }
    Ok(())
}

/// `(1/(√π ku)) ∫ χ(Δ − kv) exp(−(kv/ku)²) d(kv)` approximated with `quad`.
pub fn doppler_average<F>(chi: F, big_delta: f64, ku: f64, quad: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    VelocityQuadrature::new(*quad)?.average(chi, big_delta, ku)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let r = gauss_hermite_rule(64);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        // <x²> = 1/2, <x⁴> = 3/4 under e^{−x²}/√π
        let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
        let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m2 - 0.5).abs() < 1e-13);
        assert!((m4 - 0.75).abs() < 1e-12);
        assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn small_rule_matches_tabulated_nodes() {
        let r = gauss_hermite_rule(2);
        assert!((r.nodes[1] - 0.5f64.sqrt()).abs() < 1e-15);
        let r = gauss_hermite_rule(3);
        assert!((r.nodes[2] - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((r.weights[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_is_preserved() {
        let c = Complex64::new(0.3, -1.7);
        let v = doppler_average(|_| c, 5.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((v - c).norm() < 1e-12 * c.norm());
    }

    #[test]
    fn zero_width_bypasses_integration() {
        let f = |d: f64| Complex64::new(d.sin(), d.cos());
        let v = doppler_average(f, 0.37, 0.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(v, f(0.37));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::gauss_hermite(4).validate().is_err());
        assert!(QuadratureSpec::trapezoid(100, 2.0).validate().is_err());
        assert!(QuadratureSpec::trapezoid(100, 6.0).validate().is_ok());
        assert!(doppler_average(|_| Complex64::new(1.0, 0.0), 0.0, -1.0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn refinement_flags_narrow_features() {
        let spec = QuadratureSpec {
            node_count: 8,
            verify_refinement: true,
            ..Default::default()
        };
        let narrow = |d: f64| Complex64::new(0.0, 1e-3 / (1e-6 + d * d));
        assert!(matches!(
            doppler_average(narrow, 0.0, 1.0, &spec),
            Err(Error::QuadratureDivergence { .. })
        ));
        let smooth = |d: f64| Complex64::new(0.0, (-d * d / 50.0).exp());
        assert!(doppler_average(smooth, 0.0, 1.0, &spec).is_ok());
    }
}
