//! PCE coefficient vectors and their arithmetic.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::MultiOrthoBasis;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::tensor::{GalerkinNu, Tensor};

/// Radicands of `std` down to this value are clamped to zero.
pub const VARIANCE_CLAMP: f64 = -1e-14;

/// Coefficients `x_k` of `x = Σ_k x_k Φ_k` in index-set order.
#[derive(Debug, Clone)]
pub struct PceVector {
    coefficients: Vec<f64>,
    basis: Arc<MultiOrthoBasis>,
}

impl PceVector {
    pub fn new(basis: Arc<MultiOrthoBasis>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for a basis of size {}",
                coefficients.len(),
                basis.len()
            )));
        }
        Ok(PceVector { coefficients, basis })
    }

    pub fn constant(basis: Arc<MultiOrthoBasis>, c: f64) -> Self {
        let mut coefficients = vec![0.0; basis.len()];
        coefficients[0] = c;
        PceVector { coefficients, basis }
    }

    /// PCE of `a + b z_dim`, where `z_dim` is the germ of dimension `dim`.
    /// Since `φ_1(τ) = τ - α_0`, the expansion has two terms.
    pub fn affine_input(basis: Arc<MultiOrthoBasis>, dim: usize, a: f64, b: f64) -> Result<Self> {
        let pos = basis.first_degree_position(dim)?;
        let alpha0 = basis.factors()[dim].coefficients().alpha()[0];
        let mut coefficients = vec![0.0; basis.len()];
        coefficients[0] = a + b * alpha0;
        coefficients[pos] = b;
        Ok(PceVector { coefficients, basis })
    }

    /// PCE of `mean + std · (z - E z) / std(z)` for germ `z` of dimension
    /// `dim`.
    pub fn with_moments(basis: Arc<MultiOrthoBasis>, dim: usize, mean: f64, std: f64) -> Result<Self> {
        if dim >= basis.dimension() {
            return Err(Error::Index { index: dim, limit: basis.dimension() });
        }
        let rc = basis.factors()[dim].coefficients();
        if rc.len() < 2 {
            return Err(Error::InsufficientCoefficients { needed: 2, available: rc.len() });
        }
        let b = std / rc.beta()[1].sqrt();
        let a = mean - b * rc.alpha()[0];
        Self::affine_input(basis, dim, a, b)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &Arc<MultiOrthoBasis> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn same_basis(&self, other: &PceVector) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            || (self.basis.index_set() == other.basis.index_set()
                && self
                    .basis
                    .factors()
                    .iter()
                    .zip(other.basis.factors())
                    .all(|(a, b)| a.coefficients() == b.coefficients()))
    }

    fn check_same(&self, other: &PceVector) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::Shape("PCE vectors live on different bases".into()))
        }
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn variance(&self, t2: &Tensor) -> Result<f64> {
        if t2.order() != 2 || t2.basis_size() != self.len() {
            return Err(Error::Shape("variance needs the order-2 tensor of the same basis".into()));
        }
        let v: f64 = self.coefficients.iter().enumerate().skip(1).map(|(k, x)| x * x * t2.get(&[k, k])).sum();
        if v < VARIANCE_CLAMP {
            return Err(Error::Numerical(format!("negative variance {v}")));
        }
        Ok(v.max(0.0))
    }

    pub fn std(&self, t2: &Tensor) -> Result<f64> {
        Ok(self.variance(t2)?.sqrt())
    }

    /// Galerkin product `z_{k1} = Σ x_{k2} y_{k3} ν(k1, k2, k3)`.
    pub fn galerkin_multiply(&self, other: &PceVector, nu: &GalerkinNu) -> Result<PceVector> {
        self.check_same(other)?;
        if nu.size() != self.len() {
            return Err(Error::Shape(format!("ν has size {}, basis {}", nu.size(), self.len())));
        }
        Ok(PceVector { coefficients: nu.product(&self.coefficients, &other.coefficients), basis: self.basis.clone() })
    }

    pub fn add(&self, other: &PceVector) -> Result<PceVector> {
        self.check_same(other)?;
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect();
        Ok(PceVector { coefficients, basis: self.basis.clone() })
    }

    pub fn scale(&self, s: f64) -> PceVector {
        PceVector { coefficients: self.coefficients.iter().map(|a| a * s).collect(), basis: self.basis.clone() }
    }

    /// `Σ_k x_k Φ_k(τ)`.
    pub fn sample(&self, tau: &[f64]) -> Result<f64> {
        let phi = self.basis.evaluate_all(tau)?;
        Ok(self.coefficients.iter().zip(&phi).map(|(x, p)| x * p).sum())
    }
}

/// Draw from one factor measure; mixtures pick a component first.
fn draw(m: &Measure, rng: &mut ChaCha8Rng) -> f64 {
    if let Some(components) = m.components() {
        let pick: f64 = rng.random();
        let mut acc = 0.0;
        for (w, c) in components {
            acc += w;
            if pick < acc {
                return draw(c, rng);
            }
        }
        return draw(&components[components.len() - 1].1, rng);
    }
    let u = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    m.inverse_cdf(u)
}

/// `count` i.i.d. germ vectors. Dimension `i` is drawn from a ChaCha8
/// stream seeded with `seed` on stream number `i`, so adding dimensions
/// leaves the draws of existing ones unchanged.
pub fn sample_germ(basis: &MultiOrthoBasis, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let columns: Vec<Vec<f64>> = basis
        .factors()
        .iter()
        .enumerate()
        .map(|(dim, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(dim as u64);
            (0..count).map(|_| draw(f.measure(), &mut rng)).collect()
        })
        .collect();
    (0..count).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
}
