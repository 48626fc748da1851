//! Univariate and multivariate orthogonal bases.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::quadrature::{gauss_rule, QuadratureRule};
use crate::recurrence::{coefficients_for, RecurrenceCoefficients};

/// Monic orthogonal polynomials `φ_0..φ_d` of one measure, with a companion
/// Gauss rule of `2(d + 1)` nodes.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    measure: Measure,
    rc: RecurrenceCoefficients,
    degree: usize,
    quad: QuadratureRule,
}

impl OrthoBasis {
    /// Computes the coefficients with [`coefficients_for`].
    pub fn new(measure: Measure, degree: usize) -> Result<Self> {
        let rc = coefficients_for(&measure, 2 * (degree + 1))?;
        Self::with_coefficients(measure, rc, degree)
    }

    /// Uses precomputed coefficients; at least `degree + 1` are required.
    pub fn with_coefficients(measure: Measure, rc: RecurrenceCoefficients, degree: usize) -> Result<Self> {
        if rc.len() < degree + 1 {
            return Err(Error::InsufficientCoefficients { needed: degree + 1, available: rc.len() });
        }
        let quad = gauss_rule(&rc, rc.len().min(2 * (degree + 1)))?;
        Ok(OrthoBasis { measure, rc, degree, quad })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn coefficients(&self) -> &RecurrenceCoefficients {
        &self.rc
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    /// Gauss rule with `n` nodes, extending the coefficients if needed.
    pub fn rule_with_nodes(&self, n: usize) -> Result<QuadratureRule> {
        if n <= self.rc.len() {
            gauss_rule(&self.rc, n)
        } else {
            gauss_rule(&coefficients_for(&self.measure, n)?, n)
        }
    }

    /// `φ_k(τ)` by forward recurrence.
    pub fn evaluate(&self, k: usize, tau: f64) -> Result<f64> {
        if k > self.degree {
            return Err(Error::Index { index: k, limit: self.degree + 1 });
        }
        Ok(*self.evaluate_all_upto(k, tau).last().expect("k + 1 values"))
    }

    /// `φ_0(τ)..φ_d(τ)`.
    pub fn evaluate_all(&self, tau: f64) -> Vec<f64> {
        self.evaluate_all_upto(self.degree, tau)
    }

    fn evaluate_all_upto(&self, k: usize, tau: f64) -> Vec<f64> {
        let (alpha, beta) = (self.rc.alpha(), self.rc.beta());
        let mut values = Vec::with_capacity(k + 1);
        values.push(1.0);
        for j in 0..k {
            let prev = if j == 0 { 0.0 } else { values[j - 1] };
            values.push((tau - alpha[j]) * values[j] - beta[j] * prev);
        }
        values
    }

    /// `⟨φ_k, φ_k⟩` for k = 0..d.
    pub fn norms_squared(&self) -> Vec<f64> {
        self.rc.norms_squared()[..=self.degree].to_vec()
    }
}

/// Product basis over `m` factors truncated to total degree `p`.
#[derive(Debug, Clone)]
pub struct MultiOrthoBasis {
    factors: Vec<OrthoBasis>,
    index_set: Vec<Vec<usize>>,
    positions: HashMap<Vec<usize>, usize>,
    total_degree: usize,
}

impl MultiOrthoBasis {
    /// Every factor must have degree at least `total_degree`.
    pub fn new(factors: Vec<OrthoBasis>, total_degree: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Shape("a multivariate basis needs at least one factor".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.degree() < total_degree) {
            return Err(Error::InsufficientCoefficients { needed: total_degree + 1, available: f.degree() + 1 });
        }
        let index_set = total_degree_index_set(factors.len(), total_degree);
        let positions = index_set.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(MultiOrthoBasis { factors, index_set, positions, total_degree })
    }

    /// One basis per measure, each of degree `total_degree`.
    pub fn from_measures(measures: Vec<Measure>, total_degree: usize) -> Result<Self> {
        let factors = measures
            .into_iter()
            .map(|m| OrthoBasis::new(m, total_degree))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, total_degree)
    }

    pub fn univariate(basis: OrthoBasis) -> Self {
        let d = basis.degree();
        Self::new(vec![basis], d).expect("factor degree equals total degree")
    }

    pub fn factors(&self) -> &[OrthoBasis] {
        &self.factors
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn total_degree(&self) -> usize {
        self.total_degree
    }

    pub fn index_set(&self) -> &[Vec<usize>] {
        &self.index_set
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn position(&self, index: &[usize]) -> Option<usize> {
        self.positions.get(index).copied()
    }

    /// Position of the first-degree element of dimension `dim`.
    pub fn first_degree_position(&self, dim: usize) -> Result<usize> {
        if dim >= self.dimension() {
            return Err(Error::Index { index: dim, limit: self.dimension() });
        }
        let mut e = vec![0; self.dimension()];
        e[dim] = 1;
        self.position(&e)
            .ok_or_else(|| Error::ParameterDomain("total degree 0 has no first-degree element".into()))
    }

    fn check_point(&self, tau: &[f64]) -> Result<()> {
        if tau.len() != self.dimension() {
            return Err(Error::Shape(format!(
                "point has {} coordinates, basis has {} factors",
                tau.len(),
                self.dimension()
            )));
        }
        Ok(())
    }

    /// `Π_i φ_{idx_i}(τ_i)`.
    pub fn evaluate_multi(&self, idx: &[usize], tau: &[f64]) -> Result<f64> {
        self.check_point(tau)?;
        if idx.len() != self.dimension() {
            return Err(Error::Shape(format!("multi-index has {} entries", idx.len())));
        }
        if self.position(idx).is_none() {
            return Err(Error::Index { index: idx.iter().sum(), limit: self.total_degree + 1 });
        }
        self.factors.iter().zip(idx).zip(tau).try_fold(1.0, |acc, ((f, &k), &t)| Ok(acc * f.evaluate(k, t)?))
    }

    /// All `Φ_k(τ)` in index-set order.
    pub fn evaluate_all(&self, tau: &[f64]) -> Result<Vec<f64>> {
        self.check_point(tau)?;
        let tables: Vec<Vec<f64>> = self.factors.iter().zip(tau).map(|(f, &t)| f.evaluate_all(t)).collect();
        Ok(self
            .index_set
            .iter()
            .map(|idx| idx.iter().zip(&tables).map(|(&k, v)| v[k]).product())
            .collect())
    }

    /// `⟨Φ_k, Φ_k⟩` in index-set order.
    pub fn norms_squared(&self) -> Vec<f64> {
        let norms: Vec<Vec<f64>> = self.factors.iter().map(|f| f.norms_squared()).collect();
        self.index_set
            .iter()
            .map(|idx| idx.iter().zip(&norms).map(|(&k, n)| n[k]).product())
            .collect()
    }
}

/// All `k ∈ N₀^m` with `Σ k_i ≤ p`, by total degree and, within a degree,
/// in descending lexicographic order: (0,0), (1,0), (0,1), (2,0), (1,1), ...
pub fn total_degree_index_set(m: usize, p: usize) -> Vec<Vec<usize>> {
    fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            compositions(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    for g in 0..=p {
        compositions(g, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}
