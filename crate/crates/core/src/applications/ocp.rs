//! Stochastic optimal control of the linearized reactor
//!
//! ```text
//! x(t+1) = A x(t) + B u(t),  A = [[k, 0], [a21, a22]],  t = 0..T-1
//! min Σ_t E[x(t+1)ᵀ Q x(t+1)] + R u(t)²
//! s.t. E[x_2(t)] + λ std(x_2(t)) ≤ x̄_2,  t = 0..T
//! ```
//!
//! with uncertain `k` and initial state. The Galerkin-projected dynamics are
//! linear in the stacked coefficient vector, so the states are eliminated
//! (condensing) and the problem becomes a convex quadratic objective in the
//! `T` controls with one second-order cone per time step.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::socp::{BarrierOptions, ConeProblem, LinearConstraint, SocConstraint};
use crate::basis::MultiOrthoBasis;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::pce::{sample_germ, PceVector};
use crate::tensor::{compute_tensor, galerkin_nu, GalerkinNu, Tensor};

#[derive(Debug, Clone)]
pub struct OcpConfig {
    pub k: PceVector,
    pub a21: f64,
    pub a22: f64,
    pub b: [f64; 2],
    pub q: [[f64; 2]; 2],
    pub r: f64,
    /// Number of control steps T; constraints apply at t = 0..=T.
    pub horizon: usize,
    pub lambda: f64,
    pub x2_max: f64,
    pub x0: [PceVector; 2],
}

/// Scalar data of the control example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcpParameters {
    pub k_low: f64,
    pub k_high: f64,
    pub a21: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
    pub x1_mean: f64,
    pub x1_std: f64,
    pub x2_mean: f64,
    pub x2_std: f64,
    pub horizon: usize,
    pub lambda: f64,
    pub x2_max: f64,
    pub r: f64,
    pub degree: usize,
}

impl Default for OcpParameters {
    fn default() -> Self {
        OcpParameters {
            k_low: 0.923,
            k_high: 0.926,
            a21: 0.088,
            a22: 0.819,
            b1: -0.005,
            b2: -0.002,
            x1_mean: 0.5,
            x1_std: 1.0 / 60.0,
            x2_mean: 0.1,
            x2_std: 0.01,
            horizon: 75,
            lambda: 1.618,
            x2_max: 0.17,
            r: 1.0,
            degree: 4,
        }
    }
}

/// The Beta mixture `0.3 B(2, 4.5) + 0.7 B(4, 1.5)` on [0, 1].
pub fn beta_mixture() -> Result<Measure> {
    Measure::mixture(&[0.3, 0.7], vec![Measure::beta01(2.0, 4.5)?, Measure::beta01(4.0, 1.5)?])
}

impl OcpConfig {
    /// `k = k_low + (k_high - k_low) z` with `z` from `k_measure`, Gaussian
    /// initial states, on the product basis of `k_measure` and two Gaussian
    /// germs.
    pub fn from_parameters(p: &OcpParameters, k_measure: Measure) -> Result<Self> {
        let basis = Arc::new(MultiOrthoBasis::from_measures(
            vec![k_measure, Measure::gaussian(), Measure::gaussian()],
            p.degree.max(1),
        )?);
        Self::on_basis(p, basis)
    }

    pub fn on_basis(p: &OcpParameters, basis: Arc<MultiOrthoBasis>) -> Result<Self> {
        let cfg = OcpConfig {
            k: PceVector::affine_input(basis.clone(), 0, p.k_low, p.k_high - p.k_low)?,
            a21: p.a21,
            a22: p.a22,
            b: [p.b1, p.b2],
            q: [[1.0, 0.0], [0.0, 1.0]],
            r: p.r,
            horizon: p.horizon,
            lambda: p.lambda,
            x2_max: p.x2_max,
            x0: [
                PceVector::with_moments(basis.clone(), 1, p.x1_mean, p.x1_std)?,
                PceVector::with_moments(basis, 2, p.x2_mean, p.x2_std)?,
            ],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn basis(&self) -> &Arc<MultiOrthoBasis> {
        self.k.basis()
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q;
        let pd = q[0][0] > 0.0 && q[0][0] * q[1][1] - q[0][1] * q[1][0] > 0.0 && q[0][1] == q[1][0];
        if !pd {
            return Err(Error::ParameterDomain("Q must be symmetric positive definite".into()));
        }
        if !(self.r > 0.0) {
            return Err(Error::ParameterDomain(format!("R must be positive, got {}", self.r)));
        }
        if self.horizon == 0 {
            return Err(Error::ParameterDomain("horizon must be at least one step".into()));
        }
        if !(self.lambda >= 0.0) || self.x2_max.is_nan() {
            return Err(Error::ParameterDomain("need λ ≥ 0 and a bound x̄_2".into()));
        }
        if !self.k.same_basis(&self.x0[0]) || !self.k.same_basis(&self.x0[1]) {
            return Err(Error::Shape("k and the initial state must share one basis".into()));
        }
        Ok(())
    }
}

/// Tensors needed by the control problem.
pub struct OcpTensors {
    pub t2: Tensor,
    pub nu: GalerkinNu,
}

impl OcpTensors {
    pub fn new(basis: &MultiOrthoBasis) -> Result<Self> {
        let t2 = compute_tensor(basis, 2)?;
        let t3 = compute_tensor(basis, 3)?;
        let nu = galerkin_nu(&t3, &t2)?;
        Ok(OcpTensors { t2, nu })
    }
}

/// One step of the projected dynamics.
pub fn ocp_galerkin_dynamics(x: &[PceVector; 2], u: f64, cfg: &OcpConfig, nu: &GalerkinNu) -> Result<[PceVector; 2]> {
    let kx1 = cfg.k.galerkin_multiply(&x[0], nu)?;
    let mut x1 = kx1.coefficients().to_vec();
    x1[0] += cfg.b[0] * u;
    let x2_pce = x[0].scale(cfg.a21).add(&x[1].scale(cfg.a22))?;
    let mut x2 = x2_pce.coefficients().to_vec();
    x2[0] += cfg.b[1] * u;
    Ok([PceVector::new(cfg.basis().clone(), x1)?, PceVector::new(cfg.basis().clone(), x2)?])
}

/// Affine maps `X(t) = H_t u + h_t` of the stacked coefficients
/// `X = (x_1 coefficients, x_2 coefficients)`, t = 0..=T.
pub struct Condensed {
    pub h_mat: Vec<DMatrix<f64>>,
    pub h_vec: Vec<DVector<f64>>,
    pub norms: Vec<f64>,
}

pub fn condense(cfg: &OcpConfig, tensors: &OcpTensors) -> Result<Condensed> {
    cfg.validate()?;
    let l = cfg.k.len();
    let n = cfg.horizon;
    let mk = tensors.nu.multiplication_matrix(cfg.k.coefficients());
    let mut a = DMatrix::zeros(2 * l, 2 * l);
    for i in 0..l {
        for j in 0..l {
            a[(i, j)] = mk[i][j];
        }
        a[(l + i, i)] = cfg.a21;
        a[(l + i, l + i)] = cfg.a22;
    }
    let mut h_mat = vec![DMatrix::zeros(2 * l, n)];
    let mut x0 = DVector::zeros(2 * l);
    for i in 0..l {
        x0[i] = cfg.x0[0].coefficients()[i];
        x0[l + i] = cfg.x0[1].coefficients()[i];
    }
    let mut h_vec = vec![x0];
    for t in 0..n {
        let mut next = &a * &h_mat[t];
        next[(0, t)] += cfg.b[0];
        next[(l, t)] += cfg.b[1];
        h_mat.push(next);
        h_vec.push(&a * &h_vec[t]);
    }
    let norms = (0..l).map(|k| tensors.t2.get(&[k, k])).collect();
    Ok(Condensed { h_mat, h_vec, norms })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    pub stationarity: f64,
    pub complementarity: f64,
    pub gap: f64,
    /// Largest `E[x_2] + λ std(x_2) - x̄_2` over t = 0..=T.
    pub max_constraint_violation: f64,
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OcpSolution {
    pub u: Vec<f64>,
    /// Coefficients of `x_1` and `x_2` at t = 0..=T.
    pub x1: Vec<Vec<f64>>,
    pub x2: Vec<Vec<f64>>,
    pub objective: f64,
    pub report: SolverReport,
}

/// Mean and standard deviation of both states at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateMoments {
    pub t: usize,
    pub u: Option<f64>,
    pub mean_x1: f64,
    pub std_x1: f64,
    pub mean_x2: f64,
    pub std_x2: f64,
}

impl OcpSolution {
    pub fn moments(&self, norms: &[f64]) -> Vec<StateMoments> {
        let std = |c: &[f64]| c.iter().zip(norms).skip(1).map(|(x, n)| x * x * n).sum::<f64>().max(0.0).sqrt();
        (0..self.x1.len())
            .map(|t| StateMoments {
                t,
                u: self.u.get(t).copied(),
                mean_x1: self.x1[t][0],
                std_x1: std(&self.x1[t]),
                mean_x2: self.x2[t][0],
                std_x2: std(&self.x2[t]),
            })
            .collect()
    }
}

/// Quadratic weight `Q ⊗ diag(‖Φ_k‖²)` on stacked coefficients.
fn state_weight(cfg: &OcpConfig, norms: &[f64]) -> DMatrix<f64> {
    let l = norms.len();
    let mut w = DMatrix::zeros(2 * l, 2 * l);
    for (k, &nk) in norms.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                w[(i * l + k, j * l + k)] = cfg.q[i][j] * nk;
            }
        }
    }
    w
}

/// Objective as `½ uᵀ P u + qᵀ u + c`.
fn quadratic_objective(cfg: &OcpConfig, cond: &Condensed) -> (DMatrix<f64>, DVector<f64>, f64) {
    let n = cfg.horizon;
    let w = state_weight(cfg, &cond.norms);
    let mut p = DMatrix::identity(n, n) * (2.0 * cfg.r);
    let mut q = DVector::zeros(n);
    let mut c = 0.0;
    for t in 1..=n {
        let wh = &w * &cond.h_mat[t];
        let wv = &w * &cond.h_vec[t];
        p += cond.h_mat[t].tr_mul(&wh) * 2.0;
        q += cond.h_mat[t].tr_mul(&wv) * 2.0;
        c += cond.h_vec[t].dot(&wv);
    }
    (p, q, c)
}

/// `E[x_2(t)] + λ std(x_2(t))` as affine mean plus λ times a norm:
/// `(f, g, S, s)` with mean `fᵀu + g` and std `‖S u + s‖`.
fn constraint_parts(cond: &Condensed, t: usize, l: usize) -> (DVector<f64>, f64, DMatrix<f64>, DVector<f64>) {
    let h = &cond.h_mat[t];
    let v = &cond.h_vec[t];
    let f = h.row(l).transpose();
    let g = v[l];
    let mut s_mat = DMatrix::zeros(l - 1, h.ncols());
    let mut s_vec = DVector::zeros(l - 1);
    for k in 1..l {
        let sq = cond.norms[k].sqrt();
        s_mat.row_mut(k - 1).copy_from(&(h.row(l + k) * sq));
        s_vec[k - 1] = v[l + k] * sq;
    }
    (f, g, s_mat, s_vec)
}

fn chance_value(cond: &Condensed, t: usize, l: usize, lambda: f64, u: &DVector<f64>) -> f64 {
    let (f, g, s, sv) = constraint_parts(cond, t, l);
    f.dot(u) + g + lambda * (&s * u + sv).norm()
}

/// Solves the condensed problem. With `x̄_2 = ∞` the constraints are
/// dropped and the normal equations are solved directly.
pub fn ocp_solve(cfg: &OcpConfig, opts: &BarrierOptions) -> Result<OcpSolution> {
    let tensors = OcpTensors::new(cfg.basis())?;
    ocp_solve_with(cfg, &tensors, opts)
}

pub fn ocp_solve_with(cfg: &OcpConfig, tensors: &OcpTensors, opts: &BarrierOptions) -> Result<OcpSolution> {
    let cond = condense(cfg, tensors)?;
    let l = cfg.k.len();
    let n = cfg.horizon;
    let (p, q, c) = quadratic_objective(cfg, &cond);
    let zero = DVector::zeros(n);
    let constrained = cfg.x2_max.is_finite();
    if constrained {
        let initial = chance_value(&cond, 0, l, cfg.lambda, &zero);
        if initial > cfg.x2_max {
            return Err(Error::Infeasible(format!(
                "initial state violates the moment constraint: {initial} > {}",
                cfg.x2_max
            )));
        }
    }
    let (u, report) = if !constrained {
        let chol = p.clone().cholesky().ok_or_else(|| Error::Numerical("objective Hessian is not positive definite".into()))?;
        let u = -chol.solve(&q);
        let grad = &p * &u + &q;
        let report = SolverReport {
            newton_iterations: 1,
            outer_iterations: 1,
            stationarity: grad.amax() / q.amax().max(1.0),
            complementarity: 0.0,
            gap: 0.0,
            max_constraint_violation: f64::NEG_INFINITY,
            objective_history: vec![0.5 * u.dot(&(&p * &u)) + q.dot(&u) + c],
        };
        (u, report)
    } else {
        let mut problem = ConeProblem { p: p.clone(), q: q.clone(), offset: c, cones: vec![], linear: vec![] };
        for t in 1..=n {
            let (f, g, s, sv) = constraint_parts(&cond, t, l);
            if cfg.lambda == 0.0 {
                problem.linear.push(LinearConstraint { c: -f, d: cfg.x2_max - g });
            } else {
                problem.cones.push(SocConstraint { v: s * cfg.lambda, v0: sv * cfg.lambda, a: -f, b: cfg.x2_max - g });
            }
        }
        let start = problem.find_feasible(&zero, opts)?;
        let sol = problem.solve(&start, opts)?;
        let max_violation = (0..=n)
            .map(|t| chance_value(&cond, t, l, cfg.lambda, &sol.z) - cfg.x2_max)
            .fold(f64::NEG_INFINITY, f64::max);
        let report = SolverReport {
            newton_iterations: sol.newton_iterations,
            outer_iterations: sol.outer_iterations,
            stationarity: sol.stationarity,
            complementarity: sol.complementarity,
            gap: sol.gap,
            max_constraint_violation: max_violation,
            objective_history: sol.objective_history,
        };
        (sol.z, report)
    };
    let states: Vec<DVector<f64>> = (0..=n).map(|t| &cond.h_mat[t] * &u + &cond.h_vec[t]).collect();
    let objective = 0.5 * u.dot(&(&p * &u)) + q.dot(&u) + c;
    Ok(OcpSolution {
        u: u.iter().copied().collect(),
        x1: states.iter().map(|x| x.rows(0, l).iter().copied().collect()).collect(),
        x2: states.iter().map(|x| x.rows(l, l).iter().copied().collect()).collect(),
        objective,
        report,
    })
}

/// Objective of a control sequence evaluated by simulating the projected
/// dynamics step by step.
pub fn ocp_objective(cfg: &OcpConfig, tensors: &OcpTensors, u: &[f64]) -> Result<f64> {
    let mut x = cfg.x0.clone();
    let mut total = 0.0;
    for &ut in u {
        x = ocp_galerkin_dynamics(&x, ut, cfg, &tensors.nu)?;
        let (a, b) = (x[0].coefficients(), x[1].coefficients());
        for k in 0..a.len() {
            let nk = tensors.t2.get(&[k, k]);
            total += nk * (cfg.q[0][0] * a[k] * a[k] + 2.0 * cfg.q[0][1] * a[k] * b[k] + cfg.q[1][1] * b[k] * b[k]);
        }
        total += cfg.r * ut * ut;
    }
    Ok(total)
}

/// Fraction of `samples` seeded realizations of `(k, x_0)` whose `x_2`
/// exceeds `x̄_2` at any t = 0..=T under the open-loop controls `u`.
pub fn violation_rate(cfg: &OcpConfig, u: &[f64], samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::ParameterDomain("need at least one sample".into()));
    }
    let germs = sample_germ(cfg.basis(), samples, seed);
    let violated: usize = germs
        .par_iter()
        .map(|tau| -> Result<usize> {
            let k = cfg.k.sample(tau)?;
            let mut x1 = cfg.x0[0].sample(tau)?;
            let mut x2 = cfg.x0[1].sample(tau)?;
            let mut hit = x2 > cfg.x2_max;
            for &ut in u {
                let next1 = k * x1 + cfg.b[0] * ut;
                x2 = cfg.a21 * x1 + cfg.a22 * x2 + cfg.b[1] * ut;
                x1 = next1;
                hit |= x2 > cfg.x2_max;
            }
            Ok(hit as usize)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(violated as f64 / samples as f64)
}
