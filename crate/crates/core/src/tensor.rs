//! Tensorized scalar products `⟨φ_{k1}⋯φ_{k_{n-1}}, φ_{k_n}⟩` and the
//! normalized Galerkin coefficients built from them.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::basis::{MultiOrthoBasis, OrthoBasis};
use crate::error::{Error, Result};

/// Entries below this fraction of the largest entry are not stored.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Sparse, permutation-symmetric tensor of order `n` over a basis of size
/// `L`. Keys are sorted index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    order: usize,
    basis_size: usize,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl Tensor {
    fn from_dense(order: usize, basis_size: usize, values: Vec<(Vec<usize>, f64)>) -> Self {
        let max = values.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let entries = values
            .into_iter()
            .filter(|(_, v)| v.abs() > ZERO_THRESHOLD * max)
            .collect();
        Tensor { order, basis_size, entries }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    /// Entry for any ordering of the indices; 0 when not stored.
    pub fn get(&self, indices: &[usize]) -> f64 {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Stored entries under their sorted keys.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// Nondecreasing `order`-tuples over `0..size`.
fn sorted_tuples(size: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; order];
    if size == 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = order;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < size {
                let v = cur[i] + 1;
                cur[i..].iter_mut().for_each(|c| *c = v);
                break;
            }
        }
    }
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        Err(Error::Order(order))
    } else {
        Ok(())
    }
}

/// Order-`n` tensor of a univariate basis by Gauss quadrature with
/// `⌈(n d + 1) / 2⌉` nodes, exact for the degree-`n d` integrand.
pub fn compute_tensor_univariate(b: &OrthoBasis, order: usize) -> Result<Tensor> {
    check_order(order)?;
    let size = b.degree() + 1;
    let nodes = ((order * b.degree() + 1).div_ceil(2)).max(1);
    let rule = b.rule_with_nodes(nodes)?;
    let table: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| b.evaluate_all(x)).collect();
    let values = sorted_tuples(size, order)
        .into_iter()
        .map(|key| {
            let v = rule
                .weights()
                .iter()
                .zip(&table)
                .map(|(w, row)| w * key.iter().map(|&k| row[k]).product::<f64>())
                .sum();
            (key, v)
        })
        .collect();
    Ok(Tensor::from_dense(order, size, values))
}

/// Order-`n` tensor of a multivariate basis as products over dimensions of
/// univariate tensor entries.
pub fn compute_tensor(mb: &MultiOrthoBasis, order: usize) -> Result<Tensor> {
    check_order(order)?;
    let univariate = mb
        .factors()
        .iter()
        .map(|f| compute_tensor_univariate(f, order))
        .collect::<Result<Vec<_>>>()?;
    let index_set = mb.index_set();
    let values = sorted_tuples(mb.len(), order)
        .into_par_iter()
        .map(|key| {
            let mut v = 1.0;
            let mut per_dim = vec![0; order];
            for (dim, t) in univariate.iter().enumerate() {
                for (slot, &k) in per_dim.iter_mut().zip(&key) {
                    *slot = index_set[k][dim];
                }
                v *= t.get(&per_dim);
                if v == 0.0 {
                    break;
                }
            }
            (key, v)
        })
        .collect();
    Ok(Tensor::from_dense(order, mb.len(), values))
}

/// `ν(k1, k2, k3) = t3(k2, k3, k1) / t2(k1, k1)`, so that the Galerkin
/// product of `x` and `y` is `z_{k1} = Σ x_{k2} y_{k3} ν(k1, k2, k3)`.
#[derive(Debug, Clone)]
pub struct GalerkinNu {
    size: usize,
    dense: Vec<f64>,
    nonzeros: Vec<(usize, usize, usize, f64)>,
}

impl GalerkinNu {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, k1: usize, k2: usize, k3: usize) -> f64 {
        self.dense[(k1 * self.size + k2) * self.size + k3]
    }

    pub fn nonzeros(&self) -> &[(usize, usize, usize, f64)] {
        &self.nonzeros
    }

    /// `out_{k1} = Σ x_{k2} y_{k3} ν(k1, k2, k3)` on raw coefficient slices.
    pub fn product_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(k1, k2, k3, v) in &self.nonzeros {
            out[k1] += x[k2] * y[k3] * v;
        }
    }

    pub fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        self.product_into(x, y, &mut out);
        out
    }

    /// Matrix `M` with `M[a][c] = Σ_b x_b ν(a, b, c)`, i.e. the linear map
    /// `y ↦ x ⊙ y`.
    pub fn multiplication_matrix(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.size]; self.size];
        for &(a, b, c, v) in &self.nonzeros {
            m[a][c] += x[b] * v;
        }
        m
    }
}

pub fn galerkin_nu(t3: &Tensor, t2: &Tensor) -> Result<GalerkinNu> {
    if t3.order() != 3 || t2.order() != 2 {
        return Err(Error::Order(if t3.order() != 3 { t3.order() } else { t2.order() }));
    }
    if t3.basis_size() != t2.basis_size() {
        return Err(Error::Shape(format!(
            "order-3 tensor has basis size {}, order-2 tensor {}",
            t3.basis_size(),
            t2.basis_size()
        )));
    }
    let size = t2.basis_size();
    let mut dense = vec![0.0; size * size * size];
    for (key, v) in t3.entries() {
        let (a, b, c) = (key[0], key[1], key[2]);
        for (k1, k2, k3) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            dense[(k1 * size + k2) * size + k3] = v / t2.get(&[k1, k1]);
        }
    }
    // φ_0 = 1, so entries with a zero index are order-2 entries; taking them
    // from t2 makes multiplication by a constant exact
    for k1 in 0..size {
        let norm = t2.get(&[k1, k1]);
        for k in 0..size {
            let v = t2.get(&[k1, k]) / norm;
            dense[(k1 * size) * size + k] = v;
            dense[(k1 * size + k) * size] = v;
        }
    }
    let mut nonzeros = Vec::new();
    for k1 in 0..size {
        for k2 in 0..size {
            for k3 in 0..size {
                let v = dense[(k1 * size + k2) * size + k3];
                if v != 0.0 {
                    nonzeros.push((k1, k2, k3, v));
                }
            }
        }
    }
    Ok(GalerkinNu { size, dense, nonzeros })
}
