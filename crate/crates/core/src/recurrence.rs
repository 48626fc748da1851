//! Three-term recurrence coefficients `(α_k, β_k)` of monic orthogonal
//! polynomials,
//!
//! ```text
//! φ_{k+1}(τ) = (τ - α_k) φ_k(τ) - β_k φ_{k-1}(τ),   φ_{-1} = 0, φ_0 = 1,
//! ```
//!
//! obtained in closed form for the canonical measures, or numerically from a
//! discretization of an arbitrary measure by the Stieltjes or Lanczos
//! procedure. Mixtures are handled by multiple discretization: each component
//! contributes its own Gauss rule, the merged discrete measure is fed to one
//! of the two procedures, and the component rules are refined until the
//! coefficients settle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{CanonicalKind, Measure};
use crate::quadrature::{self, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    ClosedForm,
    Stieltjes,
    Lanczos,
    MultipleDiscretization,
}

/// `α_0..α_{N-1}` and `β_0..β_{N-1}` with `β_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCoefficients {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    source: Procedure,
}

impl RecurrenceCoefficients {
    /// Validates lengths and `β_k > 0`; `beta[0]` is stored as 1.
    pub fn new(alpha: Vec<f64>, mut beta: Vec<f64>, source: Procedure) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::Shape(format!(
                "alpha has {} entries, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        beta[0] = 1.0;
        if let Some((k, &b)) = beta.iter().enumerate().find(|(_, b)| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::Breakdown { k, beta: b });
        }
        if let Some(a) = alpha.iter().find(|a| !a.is_finite()) {
            return Err(Error::Instability(format!("non-finite alpha {a}")));
        }
        Ok(RecurrenceCoefficients { alpha, beta, source })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn source(&self) -> Procedure {
        self.source
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Largest componentwise absolute difference over the common prefix.
    pub fn max_abs_diff(&self, other: &RecurrenceCoefficients) -> f64 {
        let a = self.alpha.iter().zip(&other.alpha).map(|(x, y)| (x - y).abs());
        let b = self.beta.iter().zip(&other.beta).map(|(x, y)| (x - y).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    /// `‖φ_k‖² = β_0 β_1 ⋯ β_k` for k = 0..N-1.
    pub fn norms_squared(&self) -> Vec<f64> {
        self.beta
            .iter()
            .scan(1.0, |acc, b| {
                *acc *= b;
                Some(*acc)
            })
            .collect()
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ParameterDomain("need at least one recurrence coefficient (N >= 1)".into()))
    } else {
        Ok(())
    }
}

/// Jacobi weight `(1-x)^a (1+x)^b` on [-1, 1], normalized.
fn jacobi_coefficients(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    alpha.push((b - a) / (a + b + 2.0));
    beta.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        alpha.push((b * b - a * a) / (s * (s + 2.0)));
        if k == 1 {
            beta.push(4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b)));
        } else {
            beta.push(
                4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0)),
            );
        }
    }
    (alpha, beta)
}

/// Generalized Laguerre weight `x^a e^{-x}` rescaled to rate `rate`.
fn laguerre_coefficients(a: f64, rate: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let alpha = (0..n).map(|k| (2.0 * k as f64 + a + 1.0) / rate).collect();
    let beta = (0..n)
        .map(|k| if k == 0 { 1.0 } else { k as f64 * (k as f64 + a) / (rate * rate) })
        .collect();
    (alpha, beta)
}

/// First `n` coefficient pairs of the monic basis of a canonical measure.
pub fn closed_form_coefficients(kind: CanonicalKind, n: usize) -> Result<RecurrenceCoefficients> {
    check_count(n)?;
    let (alpha, beta) = match kind {
        CanonicalKind::Gaussian => (vec![0.0; n], (0..n).map(|k| k.max(1) as f64).collect()),
        CanonicalKind::Hermite => (vec![0.0; n], (0..n).map(|k| if k == 0 { 1.0 } else { k as f64 / 2.0 }).collect()),
        CanonicalKind::Legendre => jacobi_coefficients(0.0, 0.0, n),
        CanonicalKind::Jacobi { alpha, beta } => jacobi_coefficients(alpha, beta, n),
        CanonicalKind::Uniform01 => shifted_to_unit(jacobi_coefficients(0.0, 0.0, n)),
        CanonicalKind::Beta01 { alpha, beta } => {
            shifted_to_unit(jacobi_coefficients(beta - 1.0, alpha - 1.0, n))
        }
        CanonicalKind::Gamma { alpha, beta } => laguerre_coefficients(alpha - 1.0, beta, n),
        CanonicalKind::Laguerre => laguerre_coefficients(0.0, 1.0, n),
    };
    RecurrenceCoefficients::new(alpha, beta, Procedure::ClosedForm)
}

/// Affine map x = 2τ - 1 from [-1, 1] to [0, 1].
fn shifted_to_unit((alpha, beta): (Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    (
        alpha.into_iter().map(|a| 0.5 * (1.0 + a)).collect(),
        beta.into_iter().enumerate().map(|(k, b)| if k == 0 { 1.0 } else { 0.25 * b }).collect(),
    )
}

/// Density-free rule used to discretize a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationRule {
    #[default]
    Fejer1,
    Fejer2,
    ClenshawCurtis,
}

/// How to turn a measure into a discrete measure. The default is a Fejér
/// rule of the first kind with `max(10 N, 1000)` nodes on the truncated
/// support.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiscretizationConfig {
    pub rule: DiscretizationRule,
    pub nodes: Option<usize>,
}

impl DiscretizationConfig {
    pub fn with_nodes(nodes: usize) -> Self {
        DiscretizationConfig { nodes: Some(nodes), ..Default::default() }
    }

    pub fn node_count(&self, n: usize) -> usize {
        self.nodes.unwrap_or_else(|| (10 * n).max(1000))
    }
}

/// A discrete measure `Σ w_i δ_{x_i}` approximating a continuous one.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Discretization {
    /// Discretization of `m` good for inner products of polynomials up to
    /// degree `2n`.
    pub fn of_measure(m: &Measure, n: usize, cfg: &DiscretizationConfig) -> Result<Self> {
        let count = cfg.node_count(n);
        let interval = m.truncated_support(2 * n + 1);
        let rule = match cfg.rule {
            DiscretizationRule::Fejer1 => quadrature::fejer1_rule(count, interval)?,
            DiscretizationRule::Fejer2 => quadrature::fejer2_rule(count, interval)?,
            DiscretizationRule::ClenshawCurtis => quadrature::clenshaw_curtis_rule(count, interval)?,
        };
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            let rho = m.density(x);
            if !rho.is_finite() {
                return Err(Error::Instability(format!(
                    "density is not finite at discretization node {x}; use an open rule"
                )));
            }
            if rho > 0.0 {
                nodes.push(x);
                weights.push(w * rho);
            }
        }
        Ok(Discretization { nodes, weights })
    }

    fn from_rule(rule: &QuadratureRule, scale: f64) -> Self {
        Discretization {
            nodes: rule.nodes().to_vec(),
            weights: rule.weights().iter().map(|w| w * scale).collect(),
        }
    }

    fn extend(&mut self, other: Discretization) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }

    fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `β_k` below this fraction of the magnitude of the terms it was computed
/// from is indistinguishable from zero (a discrete measure with fewer than
/// `k + 1` support points).
pub const BREAKDOWN_RATIO: f64 = 1e-24;

/// Discretized Stieltjes procedure on a discrete measure. Polynomial values
/// are carried in normalized form (`φ_k / ‖φ_k‖`) so that neither they nor
/// the weights over- or underflow; the coefficients are unaffected.
pub fn stieltjes_discrete(disc: &Discretization, n: usize) -> Result<RecurrenceCoefficients> {
    check_count(n)?;
    let (x, w) = (&disc.nodes, &disc.weights);
    let mass = disc.mass();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Breakdown { k: 0, beta: mass });
    }
    let mut alpha: Vec<f64> = Vec::with_capacity(n);
    let mut beta: Vec<f64> = Vec::with_capacity(n);
    let mut prev = vec![0.0; x.len()];
    let mut cur = vec![1.0 / mass.sqrt(); x.len()];
    alpha.push(dot3(w, x, &cur, &cur));
    beta.push(1.0);
    for k in 1..n {
        let sqrt_prev = if k == 1 { 0.0 } else { beta[k - 1].sqrt() };
        let next: Vec<f64> = (0..x.len())
            .map(|i| (x[i] - alpha[k - 1]) * cur[i] - sqrt_prev * prev[i])
            .collect();
        let b: f64 = w.iter().zip(&next).map(|(wi, p)| wi * p * p).sum();
        // size of the two terms before they cancel
        let scale: f64 = w
            .iter()
            .zip(x)
            .zip(&cur)
            .map(|((wi, xi), c)| wi * ((xi - alpha[k - 1]) * c).powi(2))
            .sum::<f64>()
            + sqrt_prev * sqrt_prev;
        if !b.is_finite() {
            return Err(Error::Instability(format!(
                "polynomial values overflowed at degree {k}; rescale the measure"
            )));
        }
        if !(b > BREAKDOWN_RATIO * scale) {
            return Err(Error::Breakdown { k, beta: b });
        }
        let s = b.sqrt();
        prev = cur;
        cur = next.into_iter().map(|p| p / s).collect();
        beta.push(b);
        alpha.push(dot3(w, x, &cur, &cur));
    }
    RecurrenceCoefficients::new(alpha, beta, Procedure::Stieltjes)
}

fn dot3(w: &[f64], x: &[f64], p: &[f64], q: &[f64]) -> f64 {
    (0..w.len()).map(|i| w[i] * x[i] * p[i] * q[i]).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonality loss tolerated among Lanczos vectors.
pub const LANCZOS_ORTHOGONALITY_TOL: f64 = 1e-10;

/// Lanczos tridiagonalization of `diag(x)` started from `√w / ‖√w‖`, with
/// full reorthogonalization. This is the Lanczos iteration on the bordered
/// matrix `[[1, √wᵀ], [√w, diag(x)]]` from its first unit vector; the
/// resulting Jacobi matrix carries `α_k` on the diagonal and `√β_k` off it.
pub fn lanczos_discrete(disc: &Discretization, n: usize) -> Result<RecurrenceCoefficients> {
    check_count(n)?;
    let (x, w) = (&disc.nodes, &disc.weights);
    if x.len() < n {
        return Err(Error::ParameterDomain(format!(
            "Lanczos needs at least {n} discretization nodes, got {}",
            x.len()
        )));
    }
    let mass = disc.mass();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Breakdown { k: 0, beta: mass });
    }
    let mut basis: Vec<Vec<f64>> = vec![w.iter().map(|wi| (wi / mass).sqrt()).collect()];
    let mut alpha = Vec::with_capacity(n);
    let mut beta: Vec<f64> = vec![1.0];
    for k in 0..n {
        let q = &basis[k];
        let mut v: Vec<f64> = x.iter().zip(q).map(|(xi, qi)| xi * qi).collect();
        let a = dot(q, &v);
        alpha.push(a);
        if k + 1 == n {
            break;
        }
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= a * qi;
        }
        if k > 0 {
            let b = beta[k].sqrt();
            for (vi, qi) in v.iter_mut().zip(&basis[k - 1]) {
                *vi -= b * qi;
            }
        }
        for _ in 0..2 {
            for qj in &basis {
                let c = dot(qj, &v);
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        let scale = x.iter().zip(q).map(|(xi, qi)| (xi * qi).powi(2)).sum::<f64>();
        if !(norm * norm > BREAKDOWN_RATIO * scale && norm.is_finite()) {
            return Err(Error::Breakdown { k: k + 1, beta: norm * norm });
        }
        v.iter_mut().for_each(|vi| *vi /= norm);
        let loss = basis.iter().map(|qj| dot(qj, &v).abs()).fold(0.0, f64::max);
        if loss > LANCZOS_ORTHOGONALITY_TOL {
            return Err(Error::Instability(format!(
                "Lanczos vectors lost orthogonality ({loss:e}) at step {}",
                k + 1
            )));
        }
        beta.push(norm * norm);
        basis.push(v);
    }
    RecurrenceCoefficients::new(alpha, beta, Procedure::Lanczos)
}

/// Stieltjes procedure on the default (or given) discretization of `m`.
pub fn stieltjes(m: &Measure, n: usize, cfg: &DiscretizationConfig) -> Result<RecurrenceCoefficients> {
    check_count(n)?;
    stieltjes_discrete(&Discretization::of_measure(m, n, cfg)?, n)
}

/// Lanczos procedure on the default (or given) discretization of `m`.
pub fn lanczos(m: &Measure, n: usize, cfg: &DiscretizationConfig) -> Result<RecurrenceCoefficients> {
    check_count(n)?;
    lanczos_discrete(&Discretization::of_measure(m, n, cfg)?, n)
}

/// Settings for [`multiple_discretization`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipleDiscretizationConfig {
    /// Nodes per component in the first sweep; defaults to `2N + 1`.
    pub initial_nodes: Option<usize>,
    pub tol: f64,
    pub max_iterations: usize,
    /// Stieltjes or Lanczos, applied to the merged discretization.
    pub inner: Procedure,
}

impl Default for MultipleDiscretizationConfig {
    fn default() -> Self {
        MultipleDiscretizationConfig {
            initial_nodes: None,
            tol: 1e-10,
            max_iterations: 12,
            inner: Procedure::Stieltjes,
        }
    }
}

/// Quadrature rule with `nodes` points for one mixture component.
fn component_rule(component: &Measure, nodes: usize) -> Result<QuadratureRule> {
    let rc = if let Some(kind) = component.canonical_kind() {
        closed_form_coefficients(kind, nodes)?
    } else if component.components().is_some() {
        multiple_discretization(component, nodes, &MultipleDiscretizationConfig::default())?
    } else {
        stieltjes(component, nodes, &DiscretizationConfig::default())?
    };
    quadrature::gauss_rule(&rc, nodes)
}

/// Recurrence coefficients of a mixture `Σ w_i μ_i` from the union of
/// per-component Gauss rules (weights scaled by `w_i`). The per-component
/// node count doubles each sweep until two successive coefficient sets agree
/// within `tol` (relative to `max(1, |value|)`).
pub fn multiple_discretization(
    m: &Measure,
    n: usize,
    cfg: &MultipleDiscretizationConfig,
) -> Result<RecurrenceCoefficients> {
    check_count(n)?;
    let components = m.components().ok_or_else(|| {
        Error::UnsupportedMeasure("multiple discretization needs a mixture decomposition".into())
    })?;
    let inner = match cfg.inner {
        Procedure::Stieltjes | Procedure::Lanczos => cfg.inner,
        other => {
            return Err(Error::ParameterDomain(format!(
                "inner procedure must be stieltjes or lanczos, got {other:?}"
            )))
        }
    };
    let mut per_component = cfg.initial_nodes.unwrap_or(2 * n + 1).max(n);
    let mut previous: Option<RecurrenceCoefficients> = None;
    let mut last_change = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let mut merged = Discretization { nodes: Vec::new(), weights: Vec::new() };
        for (w, c) in components {
            merged.extend(Discretization::from_rule(&component_rule(c, per_component)?, *w));
        }
        let rc = match inner {
            Procedure::Lanczos => lanczos_discrete(&merged, n)?,
            _ => stieltjes_discrete(&merged, n)?,
        };
        if let Some(prev) = &previous {
            last_change = relative_change(prev, &rc);
            if last_change <= cfg.tol {
                let RecurrenceCoefficients { alpha, beta, .. } = rc;
                return RecurrenceCoefficients::new(alpha, beta, Procedure::MultipleDiscretization);
            }
        }
        previous = Some(rc);
        per_component *= 2;
    }
    let last = previous.expect("at least one sweep");
    Err(Error::Convergence {
        iterations: cfg.max_iterations,
        last_change,
        previous: Box::new(last.clone()),
        last: Box::new(last),
    })
}

fn relative_change(a: &RecurrenceCoefficients, b: &RecurrenceCoefficients) -> f64 {
    let pairs = a.alpha.iter().zip(&b.alpha).chain(a.beta.iter().zip(&b.beta));
    pairs.map(|(x, y)| (x - y).abs() / x.abs().max(1.0)).fold(0.0, f64::max)
}

/// Coefficients for any measure: closed form for canonical measures,
/// multiple discretization for mixtures, Stieltjes otherwise.
pub fn coefficients_for(m: &Measure, n: usize) -> Result<RecurrenceCoefficients> {
    if let Some(kind) = m.canonical_kind() {
        closed_form_coefficients(kind, n)
    } else if m.components().is_some() {
        multiple_discretization(m, n, &MultipleDiscretizationConfig::default())
    } else {
        stieltjes(m, n, &DiscretizationConfig::default())
    }
}

/// Monomial coefficients of `φ_k`, ascending powers, leading entry 1.
pub fn expand_monic(rc: &RecurrenceCoefficients, k: usize) -> Result<Vec<f64>> {
    if k >= rc.len() {
        return Err(Error::Index { index: k, limit: rc.len() });
    }
    let mut prev: Vec<f64> = Vec::new();
    let mut cur = vec![1.0];
    for j in 0..k {
        let mut next = vec![0.0; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= rc.alpha[j] * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= rc.beta[j] * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}
