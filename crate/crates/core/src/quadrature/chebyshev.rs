use std::f64::consts::PI;

use super::{QuadratureKind, QuadratureRule};
use crate::error::{Error, Result};

fn check_interval((a, b): (f64, f64)) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InfiniteInterval { a, b });
    }
    if !(a < b) {
        return Err(Error::ParameterDomain(format!("empty interval [{a}, {b}]")));
    }
    Ok(())
}

/// Map a rule on [-1, 1] given by angles θ (nodes cos θ) onto [a, b], in
/// ascending node order.
fn mapped(
    thetas: &[f64],
    weights: Vec<f64>,
    (a, b): (f64, f64),
    kind: QuadratureKind,
) -> QuadratureRule {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // cos θ decreases in θ, so reverse for ascending nodes
    let nodes = thetas.iter().rev().map(|t| mid + half * t.cos()).collect();
    let weights = weights.into_iter().rev().map(|w| half * w).collect();
    QuadratureRule::from_parts(nodes, weights, kind)
}

/// Σ_{m=1}^{count} c_m cos(2mθ) with cos(2mθ) generated by the Chebyshev
/// three-term recurrence.
fn cosine_sum(theta: f64, count: usize, coef: impl Fn(usize) -> f64) -> f64 {
    let c2 = (2.0 * theta).cos();
    let (mut prev, mut cur) = (1.0, c2);
    let mut s = 0.0;
    for m in 1..=count {
        s += coef(m) * cur;
        let next = 2.0 * c2 * cur - prev;
        prev = cur;
        cur = next;
    }
    s
}

/// n-point Fejér rule of the first kind (Chebyshev-Gauss points, open).
pub fn fejer1_rule(n: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    check_interval(interval)?;
    if n == 0 {
        return Err(Error::ParameterDomain("Fejér rule needs n >= 1".into()));
    }
    let nf = n as f64;
    let thetas: Vec<f64> = (0..n).map(|k| (2 * k + 1) as f64 * PI / (2.0 * nf)).collect();
    let weights = thetas
        .iter()
        .map(|&t| 2.0 / nf * (1.0 - 2.0 * cosine_sum(t, n / 2, |m| 1.0 / (4.0 * (m * m) as f64 - 1.0))))
        .collect();
    Ok(mapped(&thetas, weights, interval, QuadratureKind::Fejer1))
}

/// n-point Fejér rule of the second kind (interior Chebyshev extrema, open).
pub fn fejer2_rule(n: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    check_interval(interval)?;
    if n == 0 {
        return Err(Error::ParameterDomain("Fejér rule needs n >= 1".into()));
    }
    let np1 = (n + 1) as f64;
    let thetas: Vec<f64> = (1..=n).map(|k| k as f64 * PI / np1).collect();
    let weights = thetas
        .iter()
        .map(|&t| {
            let s: f64 = (1..=n.div_ceil(2))
                .map(|j| ((2 * j - 1) as f64 * t).sin() / (2 * j - 1) as f64)
                .sum();
            4.0 * t.sin() / np1 * s
        })
        .collect();
    Ok(mapped(&thetas, weights, interval, QuadratureKind::Fejer2))
}

/// n-point Clenshaw-Curtis rule (Chebyshev extrema including endpoints).
pub fn clenshaw_curtis_rule(n: usize, interval: (f64, f64)) -> Result<QuadratureRule> {
    check_interval(interval)?;
    if n < 2 {
        return Err(Error::ParameterDomain("Clenshaw-Curtis rule needs n >= 2".into()));
    }
    let big_n = n - 1;
    let nf = big_n as f64;
    let thetas: Vec<f64> = (0..=big_n).map(|k| k as f64 * PI / nf).collect();
    let half = big_n / 2;
    let weights = thetas
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let c = if k == 0 || k == big_n { 1.0 } else { 2.0 };
            let s = cosine_sum(t, half, |j| {
                let b = if 2 * j == big_n { 1.0 } else { 2.0 };
                b / (4.0 * (j * j) as f64 - 1.0)
            });
            c / nf * (1.0 - s)
        })
        .collect();
    Ok(mapped(&thetas, weights, interval, QuadratureKind::ClenshawCurtis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fejer1_midpoint() {
        let r = fejer1_rule(1, (-1.0, 1.0)).unwrap();
        assert!(r.nodes()[0].abs() < 1e-16);
        assert_relative_eq!(r.weights()[0], 2.0);
    }

    #[test]
    fn clenshaw_curtis_three_point() {
        let r = clenshaw_curtis_rule(3, (-1.0, 1.0)).unwrap();
        let nodes = [-1.0, 0.0, 1.0];
        let weights = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for i in 0..3 {
            assert!((r.nodes()[i] - nodes[i]).abs() < 1e-15);
            assert_relative_eq!(r.weights()[i], weights[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_length_and_nodes_ascend() {
        for n in [1usize, 2, 3, 7, 16, 33, 200] {
            let rules = [
                fejer1_rule(n, (-2.0, 3.5)).unwrap(),
                fejer2_rule(n, (-2.0, 3.5)).unwrap(),
            ];
            for r in rules.iter().chain(clenshaw_curtis_rule(n.max(2), (-2.0, 3.5)).ok().iter()) {
                assert!((r.weights().iter().sum::<f64>() - 5.5).abs() < 1e-12, "{:?} n={n}", r.kind());
                assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        // interpolatory rules integrate polynomials of degree < n exactly
        for n in 2..12usize {
            for rule in [
                fejer1_rule(n, (0.0, 2.0)).unwrap(),
                fejer2_rule(n, (0.0, 2.0)).unwrap(),
                clenshaw_curtis_rule(n, (0.0, 2.0)).unwrap(),
            ] {
                for d in 0..n {
                    let exact = 2f64.powi(d as i32 + 1) / (d as f64 + 1.0);
                    assert_relative_eq!(rule.integrate(|t| t.powi(d as i32)), exact, max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn infinite_interval_rejected() {
        assert!(matches!(
            fejer1_rule(10, (0.0, f64::INFINITY)),
            Err(Error::InfiniteInterval { .. })
        ));
        assert!(clenshaw_curtis_rule(1, (0.0, 1.0)).is_err());
    }
}
