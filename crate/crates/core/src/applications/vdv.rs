//! Galerkin-projected Van de Vusse reactor with uncertain rates,
//!
//! ```text
//! ċ_A = -u c_A - r_1 c_A - r_3 c_A²
//! ċ_B = -u c_B + r_1 c_A - r_2 c_B
//! ```
//!
//! integrated by fixed-step classical RK4, with a Monte Carlo reference
//! that integrates each realization with the same scheme.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::MultiOrthoBasis;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::pce::{sample_germ, PceVector};
use crate::tensor::{compute_tensor, galerkin_nu, GalerkinNu, Tensor};

#[derive(Debug, Clone)]
pub struct VanDeVusseConfig {
    pub r1: PceVector,
    pub r2: PceVector,
    pub r3: f64,
    pub u: f64,
    pub ca0: PceVector,
    pub cb0: PceVector,
    pub t_end: f64,
    pub dt: f64,
}

/// Moments and dimensions of the reactor example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VanDeVusseParameters {
    pub r1_mean: f64,
    pub r1_std: f64,
    pub r2_mean: f64,
    pub r2_std: f64,
    pub r3: f64,
    pub u: f64,
    pub ca0: f64,
    pub cb0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub degree: usize,
}

impl Default for VanDeVusseParameters {
    fn default() -> Self {
        VanDeVusseParameters {
            r1_mean: 50.0,
            r1_std: 5.0,
            r2_mean: 100.0,
            r2_std: 10.0,
            r3: 10.0,
            u: 0.1,
            ca0: 0.5,
            cb0: 0.1,
            t_end: 0.1,
            dt: 1e-4,
            degree: 4,
        }
    }
}

impl VanDeVusseConfig {
    /// Uniform rates on two uniform germs, total degree `p.degree`.
    pub fn from_parameters(p: &VanDeVusseParameters) -> Result<Self> {
        let basis = Arc::new(MultiOrthoBasis::from_measures(
            vec![Measure::uniform01(), Measure::uniform01()],
            p.degree.max(1),
        )?);
        let cfg = VanDeVusseConfig {
            r1: PceVector::with_moments(basis.clone(), 0, p.r1_mean, p.r1_std)?,
            r2: PceVector::with_moments(basis.clone(), 1, p.r2_mean, p.r2_std)?,
            r3: p.r3,
            u: p.u,
            ca0: PceVector::constant(basis.clone(), p.ca0),
            cb0: PceVector::constant(basis, p.cb0),
            t_end: p.t_end,
            dt: p.dt,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn basis(&self) -> &Arc<MultiOrthoBasis> {
        self.r1.basis()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::ParameterDomain(format!("need dt > 0 and t_end > 0, got {} and {}", self.dt, self.t_end)));
        }
        let others = [&self.r2, &self.ca0, &self.cb0];
        if others.iter().any(|v| !self.r1.same_basis(v)) {
            return Err(Error::Shape("all uncertain inputs must share one basis".into()));
        }
        self.steps().map(|_| ())
    }

    /// Number of RK4 steps; `t_end` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if n < 1.0 || ((n * self.dt - self.t_end) / self.t_end).abs() > 1e-9 {
            return Err(Error::ParameterDomain(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// `(d c_A, d c_B)` for every basis index.
pub fn vdv_galerkin_rhs(
    ca: &[f64],
    cb: &[f64],
    cfg: &VanDeVusseConfig,
    nu: &GalerkinNu,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = cfg.r1.len();
    if ca.len() != l || cb.len() != l || nu.size() != l {
        return Err(Error::Shape(format!(
            "state lengths {} and {} and ν size {} for a basis of size {l}",
            ca.len(),
            cb.len(),
            nu.size()
        )));
    }
    let mut da = vec![0.0; l];
    let mut db = vec![0.0; l];
    rhs_into(ca, cb, cfg, nu, &mut Scratch::new(l), &mut da, &mut db);
    Ok((da, db))
}

struct Scratch {
    r1ca: Vec<f64>,
    caca: Vec<f64>,
    r2cb: Vec<f64>,
}

impl Scratch {
    fn new(l: usize) -> Self {
        Scratch { r1ca: vec![0.0; l], caca: vec![0.0; l], r2cb: vec![0.0; l] }
    }
}

fn rhs_into(
    ca: &[f64],
    cb: &[f64],
    cfg: &VanDeVusseConfig,
    nu: &GalerkinNu,
    s: &mut Scratch,
    da: &mut [f64],
    db: &mut [f64],
) {
    nu.product_into(cfg.r1.coefficients(), ca, &mut s.r1ca);
    nu.product_into(ca, ca, &mut s.caca);
    nu.product_into(cfg.r2.coefficients(), cb, &mut s.r2cb);
    for k in 0..ca.len() {
        da[k] = -cfg.u * ca[k] - s.r1ca[k] - cfg.r3 * s.caca[k];
        db[k] = -cfg.u * cb[k] + s.r1ca[k] - s.r2cb[k];
    }
}

/// Mean and standard deviation of both concentrations at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub t: f64,
    pub mean_ca: f64,
    pub std_ca: f64,
    pub mean_cb: f64,
    pub std_cb: f64,
}

#[derive(Debug, Clone)]
pub struct VdvTrajectory {
    pub times: Vec<f64>,
    pub ca: Vec<Vec<f64>>,
    pub cb: Vec<Vec<f64>>,
    pub envelopes: Vec<Envelope>,
}

impl VdvTrajectory {
    /// Envelopes at `count` evenly spaced times after the start.
    pub fn checkpoints(&self, count: usize) -> Vec<Envelope> {
        let steps = self.times.len() - 1;
        checkpoint_steps(steps, count).into_iter().map(|i| self.envelopes[i]).collect()
    }
}

/// Step indices `steps·j/count` for j = 1..=count.
pub fn checkpoint_steps(steps: usize, count: usize) -> Vec<usize> {
    (1..=count).map(|j| (steps * j + count / 2) / count).collect()
}

/// Tensors needed by the propagation.
pub struct VdvTensors {
    pub t2: Tensor,
    pub nu: GalerkinNu,
}

impl VdvTensors {
    pub fn new(basis: &MultiOrthoBasis) -> Result<Self> {
        let t2 = compute_tensor(basis, 2)?;
        let t3 = compute_tensor(basis, 3)?;
        let nu = galerkin_nu(&t3, &t2)?;
        Ok(VdvTensors { t2, nu })
    }
}

/// Galerkin system integrated with RK4; envelopes at every step.
pub fn vdv_propagate(cfg: &VanDeVusseConfig) -> Result<VdvTrajectory> {
    vdv_propagate_with(cfg, &VdvTensors::new(cfg.basis())?)
}

pub fn vdv_propagate_with(cfg: &VanDeVusseConfig, tensors: &VdvTensors) -> Result<VdvTrajectory> {
    cfg.validate()?;
    let steps = cfg.steps()?;
    let l = cfg.r1.len();
    let nu = &tensors.nu;
    let mut scratch = Scratch::new(l);
    let mut ca = cfg.ca0.coefficients().to_vec();
    let mut cb = cfg.cb0.coefficients().to_vec();
    let mut k = [(vec![0.0; l], vec![0.0; l]), (vec![0.0; l], vec![0.0; l]), (vec![0.0; l], vec![0.0; l]), (vec![0.0; l], vec![0.0; l])];
    let (mut ta, mut tb) = (vec![0.0; l], vec![0.0; l]);
    let mut out = VdvTrajectory { times: vec![0.0], ca: vec![ca.clone()], cb: vec![cb.clone()], envelopes: vec![] };
    let h = cfg.dt;
    for step in 1..=steps {
        for stage in 0..4 {
            let c = match stage {
                0 => 0.0,
                3 => h,
                _ => 0.5 * h,
            };
            if stage == 0 {
                ta.copy_from_slice(&ca);
                tb.copy_from_slice(&cb);
            } else {
                let (pa, pb) = &k[stage - 1];
                for i in 0..l {
                    ta[i] = ca[i] + c * pa[i];
                    tb[i] = cb[i] + c * pb[i];
                }
            }
            let (da, db) = &mut k[stage];
            rhs_into(&ta, &tb, cfg, nu, &mut scratch, da, db);
        }
        for i in 0..l {
            ca[i] += h / 6.0 * (k[0].0[i] + 2.0 * k[1].0[i] + 2.0 * k[2].0[i] + k[3].0[i]);
            cb[i] += h / 6.0 * (k[0].1[i] + 2.0 * k[1].1[i] + 2.0 * k[2].1[i] + k[3].1[i]);
        }
        let t = step as f64 * h;
        if ca.iter().chain(&cb).any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        out.times.push(t);
        out.ca.push(ca.clone());
        out.cb.push(cb.clone());
    }
    let basis = cfg.basis().clone();
    out.envelopes = out
        .times
        .iter()
        .zip(out.ca.iter().zip(&out.cb))
        .map(|(&t, (a, b))| {
            let a = PceVector::new(basis.clone(), a.clone())?;
            let b = PceVector::new(basis.clone(), b.clone())?;
            Ok(Envelope { t, mean_ca: a.mean(), std_ca: a.std(&tensors.t2)?, mean_cb: b.mean(), std_cb: b.std(&tensors.t2)? })
        })
        .collect::<Result<_>>()?;
    Ok(out)
}

/// Scalar reactor, one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdvRealization {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub u: f64,
    pub ca0: f64,
    pub cb0: f64,
}

impl VdvRealization {
    fn rhs(&self, ca: f64, cb: f64) -> (f64, f64) {
        (
            -self.u * ca - self.r1 * ca - self.r3 * ca * ca,
            -self.u * cb + self.r1 * ca - self.r2 * cb,
        )
    }

    /// RK4 states at steps 0..=steps.
    pub fn integrate(&self, dt: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
        let mut s = (self.ca0, self.cb0);
        let mut out = Vec::with_capacity(steps + 1);
        out.push(s);
        for step in 1..=steps {
            let k1 = self.rhs(s.0, s.1);
            let k2 = self.rhs(s.0 + 0.5 * dt * k1.0, s.1 + 0.5 * dt * k1.1);
            let k3 = self.rhs(s.0 + 0.5 * dt * k2.0, s.1 + 0.5 * dt * k2.1);
            let k4 = self.rhs(s.0 + dt * k3.0, s.1 + dt * k3.1);
            s.0 += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            s.1 += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if !(s.0.is_finite() && s.1.is_finite()) {
                return Err(Error::BlowUp { t: step as f64 * dt });
            }
            out.push(s);
        }
        Ok(out)
    }
}

/// Sample statistics at the checkpoints plus a few full sample paths.
#[derive(Debug, Clone)]
pub struct VdvMonteCarlo {
    pub checkpoints: Vec<Envelope>,
    pub samples: usize,
    /// `paths[i][j]` is `(c_A, c_B)` of realization `i` at checkpoint `j`.
    pub paths: Vec<Vec<(f64, f64)>>,
}

impl VanDeVusseConfig {
    /// Realization of the inputs at germ `tau`.
    pub fn realize(&self, tau: &[f64]) -> Result<VdvRealization> {
        Ok(VdvRealization {
            r1: self.r1.sample(tau)?,
            r2: self.r2.sample(tau)?,
            r3: self.r3,
            u: self.u,
            ca0: self.ca0.sample(tau)?,
            cb0: self.cb0.sample(tau)?,
        })
    }
}

/// Monte Carlo over `samples` seeded realizations, summarized at `count`
/// evenly spaced checkpoints. The first `keep_paths` realizations are
/// returned in full at the checkpoints.
pub fn vdv_monte_carlo(
    cfg: &VanDeVusseConfig,
    samples: usize,
    seed: u64,
    count: usize,
    keep_paths: usize,
) -> Result<VdvMonteCarlo> {
    cfg.validate()?;
    if samples < 2 {
        return Err(Error::ParameterDomain("Monte Carlo needs at least two samples".into()));
    }
    let steps = cfg.steps()?;
    let marks = checkpoint_steps(steps, count);
    let germs = sample_germ(cfg.basis(), samples, seed);
    let values: Vec<Vec<(f64, f64)>> = germs
        .par_iter()
        .map(|tau| {
            let path = cfg.realize(tau)?.integrate(cfg.dt, steps)?;
            Ok(marks.iter().map(|&i| path[i]).collect())
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let checkpoints = marks
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let (sa, sb) = values.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v[j].0, acc.1 + v[j].1));
            let (ma, mb) = (sa / n, sb / n);
            let (va, vb) = values
                .iter()
                .fold((0.0, 0.0), |acc, v| (acc.0 + (v[j].0 - ma).powi(2), acc.1 + (v[j].1 - mb).powi(2)));
            Envelope {
                t: i as f64 * cfg.dt,
                mean_ca: ma,
                std_ca: (va / (n - 1.0)).sqrt(),
                mean_cb: mb,
                std_cb: (vb / (n - 1.0)).sqrt(),
            }
        })
        .collect();
    let paths = values.into_iter().take(keep_paths).collect();
    Ok(VdvMonteCarlo { checkpoints, samples, paths })
}
