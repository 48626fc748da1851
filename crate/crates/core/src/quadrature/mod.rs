//! Quadrature rules: Gauss, Gauss-Radau and Gauss-Lobatto from recurrence
//! coefficients (Golub-Welsch), and the density-free Fejér and
//! Clenshaw-Curtis rules for the Lebesgue weight on a finite interval.

mod chebyshev;
pub mod eigen;

pub use chebyshev::{clenshaw_curtis_rule, fejer1_rule, fejer2_rule};
pub use eigen::SymTridiagonal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::CanonicalKind;
use crate::recurrence::{closed_form_coefficients, RecurrenceCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Gauss,
    GaussRadau,
    GaussLobatto,
    Fejer1,
    Fejer2,
    ClenshawCurtis,
}

/// Nodes (strictly ascending) and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: QuadratureKind,
}

impl QuadratureRule {
    pub(crate) fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, kind: QuadratureKind) -> Self {
        debug_assert_eq!(nodes.len(), weights.len());
        QuadratureRule { nodes, weights, kind }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        integrate(self, f)
    }
}

/// `Σ w_i f(x_i)`
pub fn integrate<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: F) -> f64 {
    rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * f(x)).sum()
}

fn require(rc: &RecurrenceCoefficients, needed: usize) -> Result<()> {
    if rc.len() < needed {
        return Err(Error::InsufficientCoefficients { needed, available: rc.len() });
    }
    Ok(())
}

fn rule_from_jacobi(
    diagonal: Vec<f64>,
    subdiagonal_squared: &[f64],
    mass: f64,
    kind: QuadratureKind,
) -> Result<QuadratureRule> {
    let sub = subdiagonal_squared.iter().map(|b| b.sqrt()).collect();
    let eig = SymTridiagonal::new(diagonal, sub)?.eigen_first_components()?;
    let weights: Vec<f64> = eig.first_components.iter().map(|v| mass * v * v).collect();
    for (x, w) in eig.eigenvalues.iter().zip(&weights) {
        if !(*w > 0.0) {
            return Err(Error::NonPositiveWeight { node: *x, weight: *w });
        }
    }
    Ok(QuadratureRule::from_parts(eig.eigenvalues, weights, kind))
}

/// n-point Gauss rule: nodes are the eigenvalues of the Jacobi matrix
/// (diagonal α_0..α_{n-1}, off-diagonal √β_1..√β_{n-1}), weights β_0 times
/// the squared first eigenvector components. Exact to degree 2n-1.
pub fn gauss_rule(rc: &RecurrenceCoefficients, n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::ParameterDomain("Gauss rule needs n >= 1".into()));
    }
    require(rc, n)?;
    rule_from_jacobi(rc.alpha()[..n].to_vec(), &rc.beta()[1..n], rc.beta()[0], QuadratureKind::Gauss)
}

/// Ratio p_k(x)/p_{k-1}(x) of consecutive monic polynomials, k >= 1.
fn monic_ratio(rc: &RecurrenceCoefficients, k: usize, x: f64) -> f64 {
    let (alpha, beta) = (rc.alpha(), rc.beta());
    let mut r = x - alpha[0];
    for j in 1..k {
        r = (x - alpha[j]) - beta[j] / r;
    }
    r
}

fn check_endpoint(x: f64, support: (f64, f64)) -> Result<()> {
    let (a, b) = support;
    if x > a && x < b || !x.is_finite() {
        return Err(Error::InvalidEndpoint { endpoint: x, a, b });
    }
    Ok(())
}

/// n-point Gauss-Radau rule with one node fixed at `fixed` (a support
/// endpoint). Exact to degree 2n-2.
pub fn gauss_radau_rule(
    rc: &RecurrenceCoefficients,
    n: usize,
    fixed: f64,
    support: (f64, f64),
) -> Result<QuadratureRule> {
    check_endpoint(fixed, support)?;
    if n == 0 {
        return Err(Error::ParameterDomain("Gauss-Radau rule needs n >= 1".into()));
    }
    require(rc, n)?;
    let mut diagonal = rc.alpha()[..n].to_vec();
    diagonal[n - 1] = if n == 1 {
        fixed
    } else {
        fixed - rc.beta()[n - 1] / monic_ratio(rc, n - 1, fixed)
    };
    rule_from_jacobi(diagonal, &rc.beta()[1..n], rc.beta()[0], QuadratureKind::GaussRadau)
}

/// n-point Gauss-Lobatto rule with nodes fixed at both `left` and `right`.
/// Exact to degree 2n-3.
pub fn gauss_lobatto_rule(
    rc: &RecurrenceCoefficients,
    n: usize,
    left: f64,
    right: f64,
    support: (f64, f64),
) -> Result<QuadratureRule> {
    check_endpoint(left, support)?;
    check_endpoint(right, support)?;
    if !(left < right) {
        return Err(Error::ParameterDomain(format!("Lobatto endpoints {left} >= {right}")));
    }
    if n < 2 {
        return Err(Error::ParameterDomain("Gauss-Lobatto rule needs n >= 2".into()));
    }
    require(rc, n - 1)?;
    let ra = monic_ratio(rc, n - 1, left);
    let rb = monic_ratio(rc, n - 1, right);
    let alpha_mod = (left * ra - right * rb) / (ra - rb);
    let beta_mod = ra * (left - alpha_mod);
    if !(beta_mod > 0.0) {
        return Err(Error::Numerical(format!("Lobatto modification gave beta = {beta_mod}")));
    }
    let mut diagonal = rc.alpha()[..n - 1].to_vec();
    diagonal.push(alpha_mod);
    let mut sub = rc.beta()[1..n - 1].to_vec();
    sub.push(beta_mod);
    rule_from_jacobi(diagonal, &sub, rc.beta()[0], QuadratureKind::GaussLobatto)
}

/// Gauss-Legendre rule on `[0, 1]` (weights sum to one).
pub fn gauss_legendre_unit(n: usize) -> Result<QuadratureRule> {
    let rc = closed_form_coefficients(CanonicalKind::Uniform01, n)?;
    gauss_rule(&rc, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Measure;
    use approx::assert_relative_eq;

    fn uniform(n: usize) -> RecurrenceCoefficients {
        closed_form_coefficients(CanonicalKind::Uniform01, n).unwrap()
    }

    #[test]
    fn gauss_uniform_small() {
        let r1 = gauss_rule(&uniform(1), 1).unwrap();
        assert_eq!(r1.nodes(), &[0.5]);
        assert_eq!(r1.weights(), &[1.0]);

        let r2 = gauss_rule(&uniform(2), 2).unwrap();
        let h = 0.5 / 3f64.sqrt();
        assert_relative_eq!(r2.nodes()[0], 0.5 - h, epsilon = 1e-15);
        assert_relative_eq!(r2.nodes()[1], 0.5 + h, epsilon = 1e-15);
        assert_relative_eq!(r2.weights()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r2.weights()[1], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r2.integrate(|t| t), 0.5, epsilon = 1e-15);
        assert_relative_eq!(r2.integrate(|t| t * t), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_hermite_probabilists() {
        let rc = closed_form_coefficients(CanonicalKind::Gaussian, 4).unwrap();
        let r2 = gauss_rule(&rc, 2).unwrap();
        assert_relative_eq!(r2.nodes()[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(r2.nodes()[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r2.weights()[0], 0.5, epsilon = 1e-15);
        let r4 = gauss_rule(&rc, 4).unwrap();
        assert_relative_eq!(r4.integrate(|t| t.powi(4)), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn insufficient_coefficients() {
        assert!(matches!(
            gauss_rule(&uniform(3), 4),
            Err(Error::InsufficientCoefficients { needed: 4, available: 3 })
        ));
    }

    #[test]
    fn lobatto_simpson() {
        let r = gauss_lobatto_rule(&uniform(3), 3, 0.0, 1.0, (0.0, 1.0)).unwrap();
        let expected_nodes = [0.0, 0.5, 1.0];
        let expected_weights = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
        for i in 0..3 {
            assert!((r.nodes()[i] - expected_nodes[i]).abs() < 1e-15);
            assert_relative_eq!(r.weights()[i], expected_weights[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn radau_two_point() {
        let r = gauss_radau_rule(&uniform(2), 2, 0.0, (0.0, 1.0)).unwrap();
        assert!(r.nodes()[0].abs() < 1e-15);
        assert_relative_eq!(r.nodes()[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights()[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(r.weights()[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn radau_and_lobatto_exactness() {
        let rc = uniform(10);
        for n in 2..=8 {
            let radau = gauss_radau_rule(&rc, n, 1.0, (0.0, 1.0)).unwrap();
            for d in 0..=(2 * n - 2) {
                let exact = 1.0 / (d as f64 + 1.0);
                assert_relative_eq!(radau.integrate(|t| t.powi(d as i32)), exact, max_relative = 1e-13);
            }
            let lobatto = gauss_lobatto_rule(&rc, n, 0.0, 1.0, (0.0, 1.0)).unwrap();
            for d in 0..=(2 * n - 3) {
                let exact = 1.0 / (d as f64 + 1.0);
                assert_relative_eq!(lobatto.integrate(|t| t.powi(d as i32)), exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn interior_endpoint_rejected() {
        let rc = uniform(4);
        assert!(matches!(
            gauss_radau_rule(&rc, 3, 0.5, (0.0, 1.0)),
            Err(Error::InvalidEndpoint { .. })
        ));
        assert!(matches!(
            gauss_lobatto_rule(&rc, 3, 0.0, 0.9, (0.0, 1.0)),
            Err(Error::InvalidEndpoint { .. })
        ));
        let g = Measure::gaussian();
        let rc = closed_form_coefficients(CanonicalKind::Gaussian, 4).unwrap();
        assert!(gauss_radau_rule(&rc, 3, 0.0, g.support()).is_err());
    }

    #[test]
    fn nodes_interlace() {
        for kind in [
            CanonicalKind::Gaussian,
            CanonicalKind::Uniform01,
            CanonicalKind::Beta01 { alpha: 2.0, beta: 4.5 },
            CanonicalKind::Gamma { alpha: 2.0, beta: 1.0 },
        ] {
            let rc = closed_form_coefficients(kind, 12).unwrap();
            for n in 1..11 {
                let a = gauss_rule(&rc, n).unwrap();
                let b = gauss_rule(&rc, n + 1).unwrap();
                for i in 0..n {
                    assert!(b.nodes()[i] < a.nodes()[i] && a.nodes()[i] < b.nodes()[i + 1]);
                }
                assert_relative_eq!(a.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }
}
