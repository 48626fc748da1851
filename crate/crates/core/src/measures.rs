//! Probability measures: the Askey-scheme densities, finite mixtures and
//! user-supplied densities, plus products of independent marginals.
//!
//! Every measure is normalized (total mass one). Infinite supports are never
//! integrated directly; [`Measure::truncated_support`] finds a finite window
//! outside which the density (weighted by the polynomial degree that will be
//! integrated against it) is negligible.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Gamma, Normal};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative level below which a (degree-weighted) density counts as zero when
/// truncating infinite supports.
pub const TRUNCATION_LEVEL: f64 = 1e-16;

/// Tolerance on mixture weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Tolerance on the numerically computed mass of a custom density.
pub const CUSTOM_MASS_TOL: f64 = 1e-6;

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Measures with closed-form densities and recurrence coefficients.
///
/// The probabilists' variants live on the supports of the Askey table;
/// `Hermite`, `Legendre`, `Jacobi` and `Laguerre` are the classical weight
/// functions rescaled to unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalKind {
    /// Standard normal on the real line.
    Gaussian,
    /// Uniform on `[0, 1]`.
    Uniform01,
    /// `τ^(α-1) (1-τ)^(β-1) / B(α, β)` on `(0, 1)`.
    Beta01 { alpha: f64, beta: f64 },
    /// Shape `alpha`, rate `beta` on `(0, ∞)`.
    Gamma { alpha: f64, beta: f64 },
    /// `exp(-τ²) / √π`.
    Hermite,
    /// `1/2` on `[-1, 1]`.
    Legendre,
    /// `(1-τ)^α (1+τ)^β` on `(-1, 1)`, normalized; α, β > -1.
    Jacobi { alpha: f64, beta: f64 },
    /// `exp(-τ)` on `(0, ∞)`.
    Laguerre,
}

impl CanonicalKind {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            CanonicalKind::Beta01 { alpha, beta } => {
                positive("beta01 alpha", alpha)?;
                positive("beta01 beta", beta)
            }
            CanonicalKind::Gamma { alpha, beta } => {
                positive("gamma alpha", alpha)?;
                positive("gamma beta", beta)
            }
            CanonicalKind::Jacobi { alpha, beta } => {
                if alpha > -1.0 && beta > -1.0 && alpha.is_finite() && beta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::ParameterDomain(format!(
                        "jacobi parameters must exceed -1, got ({alpha}, {beta})"
                    )))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            CanonicalKind::Gaussian | CanonicalKind::Hermite => (f64::NEG_INFINITY, f64::INFINITY),
            CanonicalKind::Uniform01 | CanonicalKind::Beta01 { .. } => (0.0, 1.0),
            CanonicalKind::Gamma { .. } | CanonicalKind::Laguerre => (0.0, f64::INFINITY),
            CanonicalKind::Legendre | CanonicalKind::Jacobi { .. } => (-1.0, 1.0),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            CanonicalKind::Gaussian
            | CanonicalKind::Hermite
            | CanonicalKind::Uniform01
            | CanonicalKind::Legendre => true,
            CanonicalKind::Beta01 { alpha, beta } | CanonicalKind::Jacobi { alpha, beta } => {
                alpha == beta
            }
            CanonicalKind::Gamma { .. } | CanonicalKind::Laguerre => false,
        }
    }

    /// Mean of the measure.
    pub fn mean(&self) -> f64 {
        match *self {
            CanonicalKind::Gaussian | CanonicalKind::Hermite | CanonicalKind::Legendre => 0.0,
            CanonicalKind::Uniform01 => 0.5,
            CanonicalKind::Beta01 { alpha, beta } => alpha / (alpha + beta),
            CanonicalKind::Gamma { alpha, beta } => alpha / beta,
            CanonicalKind::Jacobi { alpha, beta } => (beta - alpha) / (alpha + beta + 2.0),
            CanonicalKind::Laguerre => 1.0,
        }
    }

    fn log_norm(&self) -> f64 {
        match *self {
            CanonicalKind::Gaussian => -0.5 * (2.0 * std::f64::consts::PI).ln(),
            CanonicalKind::Hermite => -0.5 * std::f64::consts::PI.ln(),
            CanonicalKind::Uniform01 | CanonicalKind::Laguerre => 0.0,
            CanonicalKind::Legendre => -std::f64::consts::LN_2,
            CanonicalKind::Beta01 { alpha, beta } => -ln_beta(alpha, beta),
            CanonicalKind::Gamma { alpha, beta } => alpha * beta.ln() - ln_gamma(alpha),
            CanonicalKind::Jacobi { alpha, beta } => {
                -((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_beta(alpha + 1.0, beta + 1.0))
            }
        }
    }

    fn density_unchecked(&self, t: f64, log_norm: f64) -> f64 {
        let c = log_norm.exp();
        match *self {
            CanonicalKind::Gaussian => c * (-0.5 * t * t).exp(),
            CanonicalKind::Hermite => c * (-t * t).exp(),
            CanonicalKind::Uniform01 | CanonicalKind::Legendre => c,
            CanonicalKind::Laguerre => (-t).exp(),
            CanonicalKind::Beta01 { alpha, beta } => {
                c * t.powf(alpha - 1.0) * (1.0 - t).powf(beta - 1.0)
            }
            CanonicalKind::Gamma { alpha, beta } => {
                if t == 0.0 {
                    c * t.powf(alpha - 1.0)
                } else {
                    (log_norm + (alpha - 1.0) * t.ln() - beta * t).exp()
                }
            }
            CanonicalKind::Jacobi { alpha, beta } => {
                c * (1.0 - t).powf(alpha) * (1.0 + t).powf(beta)
            }
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        match *self {
            CanonicalKind::Gaussian => standard_normal().cdf(x),
            CanonicalKind::Hermite => standard_normal().cdf(x * std::f64::consts::SQRT_2),
            CanonicalKind::Uniform01 => x,
            CanonicalKind::Legendre => 0.5 * (x + 1.0),
            CanonicalKind::Laguerre => -(-x).exp_m1(),
            CanonicalKind::Beta01 { alpha, beta } => beta_dist(alpha, beta).cdf(x),
            CanonicalKind::Gamma { alpha, beta } => gamma_dist(alpha, beta).cdf(x),
            CanonicalKind::Jacobi { alpha, beta } => {
                beta_dist(beta + 1.0, alpha + 1.0).cdf(0.5 * (x + 1.0))
            }
        }
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            CanonicalKind::Gaussian => standard_normal().inverse_cdf(u),
            CanonicalKind::Hermite => standard_normal().inverse_cdf(u) / std::f64::consts::SQRT_2,
            CanonicalKind::Uniform01 => u,
            CanonicalKind::Legendre => 2.0 * u - 1.0,
            CanonicalKind::Laguerre => -(-u).ln_1p(),
            CanonicalKind::Beta01 { alpha, beta } => beta_dist(alpha, beta).inverse_cdf(u),
            CanonicalKind::Gamma { alpha, beta } => gamma_dist(alpha, beta).inverse_cdf(u),
            CanonicalKind::Jacobi { alpha, beta } => {
                2.0 * beta_dist(beta + 1.0, alpha + 1.0).inverse_cdf(u) - 1.0
            }
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn beta_dist(a: f64, b: f64) -> Beta {
    Beta::new(a, b).expect("validated beta parameters")
}

fn gamma_dist(shape: f64, rate: f64) -> Gamma {
    Gamma::new(shape, rate).expect("validated gamma parameters")
}

/// Options for user-supplied densities.
#[derive(Debug, Clone, Default)]
pub struct CustomOptions {
    /// Divide the density by its numerically computed mass.
    pub normalize: bool,
    /// The density is symmetric about the midpoint of its support.
    pub symmetric: bool,
    /// Starting point of the truncation search for infinite supports
    /// (ideally the mode). Defaults to 0 clamped into the support.
    pub center: Option<f64>,
}

#[derive(Clone)]
enum Density {
    Canonical { kind: CanonicalKind, log_norm: f64 },
    Mixture,
    Custom { f: DensityFn, scale: f64, cdf: Arc<CdfTable> },
}

/// A normalized, absolutely continuous probability measure on an interval.
#[derive(Clone)]
pub struct Measure {
    density: Density,
    support: (f64, f64),
    symmetric: bool,
    center: f64,
    components: Vec<(f64, Measure)>,
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Measure");
        match &self.density {
            Density::Canonical { kind, .. } => s.field("kind", kind),
            Density::Mixture => s.field("kind", &"mixture"),
            Density::Custom { .. } => s.field("kind", &"custom"),
        };
        s.field("support", &self.support)
            .field("symmetric", &self.symmetric)
            .field("components", &self.components)
            .finish()
    }
}

impl Measure {
    pub fn canonical(kind: CanonicalKind) -> Result<Self> {
        kind.validate()?;
        let mut center = kind.mean();
        if let CanonicalKind::Gamma { alpha, beta } = kind {
            center = ((alpha - 1.0) / beta).max(0.0);
        }
        Ok(Measure {
            density: Density::Canonical { kind, log_norm: kind.log_norm() },
            support: kind.support(),
            symmetric: kind.is_symmetric(),
            center,
            components: Vec::new(),
        })
    }

    pub fn gaussian() -> Self {
        Self::canonical(CanonicalKind::Gaussian).expect("parameter-free")
    }

    pub fn uniform01() -> Self {
        Self::canonical(CanonicalKind::Uniform01).expect("parameter-free")
    }

    pub fn beta01(alpha: f64, beta: f64) -> Result<Self> {
        Self::canonical(CanonicalKind::Beta01 { alpha, beta })
    }

    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        Self::canonical(CanonicalKind::Gamma { alpha, beta })
    }

    /// Finite mixture `Σ w_i ρ_i`. The support is the convex hull of the
    /// component supports; gaps between components carry zero density.
    pub fn mixture(weights: &[f64], components: Vec<Measure>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::ParameterDomain(format!("mixture weight {w} is not positive")));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Normalization { mass });
        }
        let unbounded = components
            .iter()
            .any(|c| !c.support.0.is_finite() || !c.support.1.is_finite());
        if unbounded && components.iter().any(|c| c.support != components[0].support) {
            return Err(Error::ParameterDomain(
                "mixture components with unbounded support must share one support".into(),
            ));
        }
        let a = components.iter().map(|c| c.support.0).fold(f64::INFINITY, f64::min);
        let b = components.iter().map(|c| c.support.1).fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (a + b);
        let symmetric = a.is_finite()
            && components.iter().all(|c| c.symmetric && c.midpoint() == mid)
            || !a.is_finite()
                && components.len() == 1
                && components[0].symmetric;
        let center = weights.iter().zip(&components).map(|(w, c)| w * c.center).sum();
        Ok(Measure {
            density: Density::Mixture,
            support: (a, b),
            symmetric,
            center,
            components: weights.iter().copied().zip(components).collect(),
        })
    }

    /// User-supplied density on `support`. Unless `options.normalize` is set,
    /// the density must already integrate to one (within [`CUSTOM_MASS_TOL`]).
    pub fn custom<F>(density: F, support: (f64, f64), options: CustomOptions) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (a, b) = support;
        if !(a < b) {
            return Err(Error::ParameterDomain(format!("empty support ({a}, {b})")));
        }
        let center = options.center.unwrap_or(0.0).clamp(a, b);
        let f: DensityFn = Arc::new(density);
        let mut measure = Measure {
            density: Density::Custom { f, scale: 1.0, cdf: Arc::new(CdfTable::default()) },
            support,
            symmetric: options.symmetric,
            center,
            components: Vec::new(),
        };
        let table = CdfTable::build(&measure)?;
        let mass = table.total();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Normalization { mass });
        }
        if !options.normalize && (mass - 1.0).abs() > CUSTOM_MASS_TOL {
            return Err(Error::Normalization { mass });
        }
        let scale = if options.normalize { 1.0 / mass } else { 1.0 };
        if let Density::Custom { scale: s, cdf, .. } = &mut measure.density {
            *s = scale;
            *cdf = Arc::new(table.scaled(scale));
        }
        Ok(measure)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Midpoint of the support (0 for the real line).
    pub fn midpoint(&self) -> f64 {
        let (a, b) = self.support;
        match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (false, false) => 0.0,
            _ => f64::NAN,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn canonical_kind(&self) -> Option<CanonicalKind> {
        match self.density {
            Density::Canonical { kind, .. } => Some(kind),
            _ => None,
        }
    }

    /// Mixture decomposition `(weight, component)`, if any.
    pub fn components(&self) -> Option<&[(f64, Measure)]> {
        if self.components.is_empty() {
            None
        } else {
            Some(&self.components)
        }
    }

    /// `ρ(τ)` inside the support, zero outside.
    pub fn density(&self, t: f64) -> f64 {
        let (a, b) = self.support;
        if !(t >= a && t <= b) {
            return 0.0;
        }
        match &self.density {
            Density::Canonical { kind, log_norm } => kind.density_unchecked(t, *log_norm),
            Density::Mixture => self.components.iter().map(|(w, c)| w * c.density(t)).sum(),
            Density::Custom { f, scale, .. } => scale * f(t),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.density {
            Density::Canonical { kind, .. } => kind.cdf(x),
            Density::Mixture => self.components.iter().map(|(w, c)| w * c.cdf(x)).sum(),
            Density::Custom { cdf, .. } => cdf.eval(self, x),
        }
    }

    /// Quantile function. Closed form for canonical measures, otherwise
    /// bisection on the CDF to an absolute tolerance of 1e-12.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        if let Density::Canonical { kind, .. } = &self.density {
            return kind.inverse_cdf(u);
        }
        let (mut lo, mut hi) = self.truncated_support(0);
        while hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Finite integration window. Finite endpoints are returned unchanged;
    /// an infinite side is cut where `ρ(τ)·(1 + |τ - c|)^degree` drops below
    /// [`TRUNCATION_LEVEL`] times its largest value seen, located by a
    /// doubling search from the center `c` followed by bisection.
    pub fn truncated_support(&self, degree: usize) -> (f64, f64) {
        let (a, b) = self.support;
        if a.is_finite() && b.is_finite() {
            return (a, b);
        }
        let start = self.center.clamp(a, b);
        let lo = if a.is_finite() { a } else { self.search_side(start, -1.0, degree) };
        let hi = if b.is_finite() { b } else { self.search_side(start, 1.0, degree) };
        (lo, hi)
    }

    fn search_side(&self, start: f64, dir: f64, degree: usize) -> f64 {
        let c = self.center;
        let weighted = |t: f64| {
            let d = self.density(t);
            if d > 0.0 {
                d.ln() + degree as f64 * (1.0 + (t - c).abs()).ln()
            } else {
                f64::NEG_INFINITY
            }
        };
        let drop = TRUNCATION_LEVEL.ln();
        let mut peak = weighted(start);
        let mut prev = start;
        let mut step = 1.0;
        loop {
            let t = start + dir * step;
            let v = weighted(t);
            peak = peak.max(v);
            if v < peak + drop || step > 1e300 {
                let (mut inside, mut outside) = (prev, t);
                for _ in 0..200 {
                    let mid = 0.5 * (inside + outside);
                    if mid == inside || mid == outside {
                        break;
                    }
                    if weighted(mid) < peak + drop {
                        outside = mid;
                    } else {
                        inside = mid;
                    }
                }
                return outside;
            }
            prev = t;
            step *= 2.0;
        }
    }
}

/// Cumulative mass of a custom density on Gauss-Legendre panels over the
/// truncated support.
#[derive(Debug, Clone, Default)]
struct CdfTable {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

const CDF_PANELS: usize = 512;
const CDF_PANEL_NODES: usize = 10;

impl CdfTable {
    fn build(measure: &Measure) -> Result<Self> {
        let rule = quadrature::gauss_legendre_unit(CDF_PANEL_NODES)?;
        let (lo, hi) = measure.truncated_support(0);
        let h = (hi - lo) / CDF_PANELS as f64;
        let edges: Vec<f64> = (0..=CDF_PANELS).map(|i| lo + h * i as f64).collect();
        let mut table = CdfTable {
            edges,
            cumulative: Vec::with_capacity(CDF_PANELS + 1),
            gl_nodes: rule.nodes().to_vec(),
            gl_weights: rule.weights().to_vec(),
        };
        let mut acc = 0.0;
        table.cumulative.push(0.0);
        for i in 0..CDF_PANELS {
            acc += table.panel_integral(measure, table.edges[i], table.edges[i + 1]);
            table.cumulative.push(acc);
        }
        Ok(table)
    }

    fn panel_integral(&self, measure: &Measure, x0: f64, x1: f64) -> f64 {
        let h = x1 - x0;
        self.gl_nodes
            .iter()
            .zip(&self.gl_weights)
            .map(|(t, w)| w * h * measure.density(x0 + h * t))
            .sum()
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    fn scaled(mut self, scale: f64) -> Self {
        self.cumulative.iter_mut().for_each(|c| *c *= scale);
        self
    }

    fn eval(&self, measure: &Measure, x: f64) -> f64 {
        let (lo, hi) = (self.edges[0], self.edges[self.edges.len() - 1]);
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let h = (hi - lo) / CDF_PANELS as f64;
        let i = (((x - lo) / h) as usize).min(CDF_PANELS - 1);
        let partial = self.panel_integral(measure, self.edges[i], x);
        (self.cumulative[i] + partial).clamp(0.0, 1.0)
    }
}

/// Independent univariate marginals.
#[derive(Debug, Clone)]
pub struct ProductMeasure {
    factors: Vec<Measure>,
}

impl ProductMeasure {
    pub fn new(factors: Vec<Measure>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Shape("product measure needs at least one factor".into()));
        }
        Ok(ProductMeasure { factors })
    }

    pub fn factors(&self) -> &[Measure] {
        &self.factors
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }
}

/// Serializable description of a measure, as read from JSON:
/// `{"kind": "mixture", "weights": [...], "components": [{"kind": "beta01", "alpha": 2, "beta": 4.5}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Gaussian,
    Uniform01,
    Beta01 { alpha: f64, beta: f64 },
    Gamma { alpha: f64, beta: f64 },
    Hermite,
    Legendre,
    Jacobi { alpha: f64, beta: f64 },
    Laguerre,
    Mixture { weights: Vec<f64>, components: Vec<MeasureSpec> },
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure> {
        let kind = match *self {
            MeasureSpec::Gaussian => CanonicalKind::Gaussian,
            MeasureSpec::Uniform01 => CanonicalKind::Uniform01,
            MeasureSpec::Beta01 { alpha, beta } => CanonicalKind::Beta01 { alpha, beta },
            MeasureSpec::Gamma { alpha, beta } => CanonicalKind::Gamma { alpha, beta },
            MeasureSpec::Hermite => CanonicalKind::Hermite,
            MeasureSpec::Legendre => CanonicalKind::Legendre,
            MeasureSpec::Jacobi { alpha, beta } => CanonicalKind::Jacobi { alpha, beta },
            MeasureSpec::Laguerre => CanonicalKind::Laguerre,
            MeasureSpec::Mixture { ref weights, ref components } => {
                let parts = components.iter().map(MeasureSpec::build).collect::<Result<_>>()?;
                return Measure::mixture(weights, parts);
            }
        };
        Measure::canonical(kind)
    }
}
