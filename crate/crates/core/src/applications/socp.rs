//! Log-barrier path-following solver for small dense convex problems
//!
//! ```text
//! minimize   ½ zᵀ P z + qᵀ z
//! subject to ‖V_i z + v_i‖ ≤ a_iᵀ z + b_i      (second-order cones)
//!            c_jᵀ z + d_j ≥ 0                  (half-spaces)
//! ```
//!
//! Each centering step minimizes `t·f(z) + φ(z)` by damped Newton, with
//! `φ = -Σ log((a_iᵀz + b_i)² - ‖V_i z + v_i‖²) - Σ log(c_jᵀz + d_j)`. The
//! duality gap of a centered point is `θ / t` with θ = 2 per cone and 1 per
//! half-space, so `t` grows geometrically until the gap is below tolerance.
//! Iterates stay strictly feasible throughout; a phase-one problem supplies
//! the first strictly feasible point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SocConstraint {
    pub v: DMatrix<f64>,
    pub v0: DVector<f64>,
    pub a: DVector<f64>,
    pub b: f64,
}

impl SocConstraint {
    fn parts(&self, z: &DVector<f64>) -> (DVector<f64>, f64) {
        (&self.v * z + &self.v0, self.a.dot(z) + self.b)
    }

    /// `(a_iᵀz + b_i) - ‖V_i z + v_i‖`; nonnegative when satisfied.
    pub fn slack(&self, z: &DVector<f64>) -> f64 {
        let (v, w) = self.parts(z);
        w - v.norm()
    }
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub c: DVector<f64>,
    pub d: f64,
}

impl LinearConstraint {
    pub fn slack(&self, z: &DVector<f64>) -> f64 {
        self.c.dot(z) + self.d
    }
}

#[derive(Debug, Clone)]
pub struct ConeProblem {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    /// Constant added to the objective; it only affects reported values and
    /// the relative gap.
    pub offset: f64,
    pub cones: Vec<SocConstraint>,
    pub linear: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    /// Target duality gap relative to `max(1, |f|)`.
    pub gap_tol: f64,
    pub t0: f64,
    pub mu: f64,
    /// Newton decrement `λ²/2` at which a centering step stops.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions { gap_tol: 1e-7, t0: 1.0, mu: 10.0, newton_tol: 1e-14, max_newton: 200, max_outer: 60 }
    }
}

struct Centering {
    newton: usize,
    converged: bool,
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub z: DVector<f64>,
    pub objective: f64,
    /// Objective after each centering step.
    pub objective_history: Vec<f64>,
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    pub gap: f64,
    /// `‖∇f - Σ duals·∇constraints‖∞ / max(1, ‖∇f‖∞)`.
    pub stationarity: f64,
    /// Total complementarity `Σ yᵀs` relative to `max(1, |f|)`.
    pub complementarity: f64,
    /// Minimum constraint slack; positive for strictly feasible points.
    pub min_slack: f64,
}

impl ConeProblem {
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    fn theta(&self) -> f64 {
        2.0 * self.cones.len() as f64 + self.linear.len() as f64
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.p * z)) + self.q.dot(z) + self.offset
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.p * z + &self.q
    }

    pub fn min_slack(&self, z: &DVector<f64>) -> f64 {
        let cones = self.cones.iter().map(|c| c.slack(z));
        let lin = self.linear.iter().map(|c| c.slack(z));
        cones.chain(lin).fold(f64::INFINITY, f64::min)
    }

    fn strictly_feasible(&self, z: &DVector<f64>) -> bool {
        self.cones.iter().all(|c| {
            let (v, w) = c.parts(z);
            w > 0.0 && w * w - v.norm_squared() > 0.0
        }) && self.linear.iter().all(|c| c.slack(z) > 0.0)
    }

    /// Barrier gradient and Hessian (without the objective part).
    fn barrier_derivatives(&self, z: &DVector<f64>, vtv: &[DMatrix<f64>]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.dim();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for (c, vtv) in self.cones.iter().zip(vtv) {
            let (v, w) = c.parts(z);
            let psi = w * w - v.norm_squared();
            let grad_psi = &c.a * (2.0 * w) - c.v.tr_mul(&v) * 2.0;
            g -= &grad_psi / psi;
            h.ger(1.0 / (psi * psi), &grad_psi, &grad_psi, 1.0);
            h.ger(-2.0 / psi, &c.a, &c.a, 1.0);
            h += vtv * (2.0 / psi);
        }
        for c in &self.linear {
            let s = c.slack(z);
            g -= &c.c / s;
            h.ger(1.0 / (s * s), &c.c, &c.c, 1.0);
        }
        (g, h)
    }

    /// Residuals of the Lagrangian at a centered point with the central-path
    /// duals `y = 2/(tψ)(w, -v)` for cones and `1/(t s)` for half-spaces.
    fn kkt(&self, z: &DVector<f64>, t: f64) -> (f64, f64) {
        let grad = self.gradient(z);
        let mut residual = grad.clone();
        let mut comp = 0.0;
        for c in &self.cones {
            let (v, w) = c.parts(z);
            let scale = 2.0 / (t * (w * w - v.norm_squared()));
            let (yw, yv) = (scale * w, -&v * scale);
            residual -= &c.a * yw + c.v.tr_mul(&yv);
            comp += yw * w + yv.dot(&v);
        }
        for c in &self.linear {
            let s = c.slack(z);
            let y = 1.0 / (t * s);
            residual -= &c.c * y;
            comp += y * s;
        }
        let f = self.objective(z);
        (residual.amax() / grad.amax().max(1.0), comp / f.abs().max(1.0))
    }

    fn solve_newton(h: DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
        let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
        let mut shift = 0.0;
        for _ in 0..8 {
            let mut hs = h.clone();
            if shift > 0.0 {
                for i in 0..hs.nrows() {
                    hs[(i, i)] += shift;
                }
            }
            if let Some(ch) = hs.cholesky() {
                return Ok(-ch.solve(g));
            }
            shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
        }
        Err(Error::Numerical("Newton system is not positive definite".into()))
    }

    /// Damped Newton on `t f + φ` from a strictly feasible `z`. Stops early
    /// when `stop(z)` holds.
    fn center(
        &self,
        z: &mut DVector<f64>,
        t: f64,
        opts: &BarrierOptions,
        vtv: &[DMatrix<f64>],
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<Centering> {
        for it in 0..opts.max_newton {
            let (bg, bh) = self.barrier_derivatives(z, vtv);
            let g = self.gradient(z) * t + bg;
            let h = &self.p * t + bh;
            let dz = Self::solve_newton(h, &g)?;
            let decrement = -g.dot(&dz);
            if decrement / 2.0 <= opts.newton_tol {
                return Ok(Centering { newton: it, converged: true });
            }
            // self-concordant damping: the step 1/(1+λ) always decreases the
            // merit, full steps converge quadratically once λ < 1/4
            let lambda = decrement.max(0.0).sqrt();
            let damped = 1.0 / (1.0 + lambda);
            let mut step = 1.0;
            if lambda >= 0.25 {
                let current = self.merit(z, t).expect("iterate is strictly feasible");
                while step > damped {
                    let trial = &*z + &dz * step;
                    match self.merit(&trial, t) {
                        Some(m) if m <= current - 0.01 * step * decrement => break,
                        _ => step *= 0.5,
                    }
                }
                step = step.max(damped);
            }
            loop {
                let trial = &*z + &dz * step;
                if self.strictly_feasible(&trial) {
                    *z = trial;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    return Ok(Centering { newton: it, converged: false });
                }
            }
            if stop(z) {
                return Ok(Centering { newton: it + 1, converged: true });
            }
        }
        Ok(Centering { newton: opts.max_newton, converged: false })
    }

    /// `t f + φ` or `None` outside the domain.
    fn merit(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let mut value = t * self.objective(z);
        for c in &self.cones {
            let (v, w) = c.parts(z);
            let psi = w * w - v.norm_squared();
            if !(w > 0.0 && psi > 0.0) {
                return None;
            }
            value -= psi.ln();
        }
        for c in &self.linear {
            let s = c.slack(z);
            if !(s > 0.0) {
                return None;
            }
            value -= s.ln();
        }
        Some(value)
    }

    /// Initial barrier weight: `θ / |f(z0)|` so that the first gap is of
    /// the order of the objective, bounded below by `opts.t0`.
    fn initial_t(&self, z0: &DVector<f64>, opts: &BarrierOptions) -> f64 {
        let f = self.objective(z0).abs();
        if f > 0.0 {
            (self.theta() / f).max(opts.t0)
        } else {
            opts.t0
        }
    }

    fn vtv(&self) -> Vec<DMatrix<f64>> {
        self.cones.iter().map(|c| c.v.tr_mul(&c.v)).collect()
    }

    /// Strictly feasible point: minimize σ subject to the constraints
    /// relaxed by σ (and σ ≥ -1), starting from `z0`, stopping once σ < 0.
    pub fn find_feasible(&self, z0: &DVector<f64>, opts: &BarrierOptions) -> Result<DVector<f64>> {
        if self.strictly_feasible(z0) {
            return Ok(z0.clone());
        }
        let n = self.dim();
        let extend = |a: &DVector<f64>, last: f64| {
            let mut e = DVector::zeros(n + 1);
            e.rows_mut(0, n).copy_from(a);
            e[n] = last;
            e
        };
        let mut cones = Vec::with_capacity(self.cones.len());
        for c in &self.cones {
            let mut v = DMatrix::zeros(c.v.nrows(), n + 1);
            v.columns_mut(0, n).copy_from(&c.v);
            cones.push(SocConstraint { v, v0: c.v0.clone(), a: extend(&c.a, 1.0), b: c.b });
        }
        let mut linear: Vec<LinearConstraint> =
            self.linear.iter().map(|c| LinearConstraint { c: extend(&c.c, 1.0), d: c.d }).collect();
        linear.push(LinearConstraint { c: extend(&DVector::zeros(n), 1.0), d: 1.0 });
        let sigma0 = (-self.min_slack(z0)).max(0.0) + 1.0;
        let phase1 = ConeProblem { p: DMatrix::zeros(n + 1, n + 1), q: extend(&DVector::zeros(n), 1.0), offset: 0.0, cones, linear };
        let mut z = extend(z0, sigma0);
        let vtv = phase1.vtv();
        let mut t = phase1.initial_t(&z, opts);
        for _ in 0..opts.max_outer {
            phase1.center(&mut z, t, opts, &vtv, &|z: &DVector<f64>| z[n] < 0.0)?;
            if z[n] < 0.0 {
                let candidate = z.rows(0, n).into_owned();
                if self.strictly_feasible(&candidate) {
                    return Ok(candidate);
                }
            }
            if phase1.theta() / t < 1e-12 {
                break;
            }
            t *= opts.mu;
        }
        Err(Error::Infeasible(format!(
            "no strictly feasible point found (smallest relaxation {:.3e})",
            z[n]
        )))
    }

    /// Solve from a strictly feasible starting point.
    pub fn solve(&self, z0: &DVector<f64>, opts: &BarrierOptions) -> Result<BarrierSolution> {
        if !self.strictly_feasible(z0) {
            return Err(Error::Infeasible("starting point is not strictly feasible".into()));
        }
        let theta = self.theta();
        let vtv = self.vtv();
        let mut z = z0.clone();
        let mut t = self.initial_t(z0, opts);
        let mut history = Vec::new();
        let mut newton = 0;
        for outer in 1..=opts.max_outer {
            let centering = self.center(&mut z, t, opts, &vtv, &|_| false)?;
            newton += centering.newton;
            let f = self.objective(&z);
            history.push(f);
            let gap = theta / t;
            if centering.converged && gap <= opts.gap_tol * f.abs().max(1.0) {
                let (stationarity, complementarity) = self.kkt(&z, t);
                return Ok(BarrierSolution {
                    objective: f,
                    objective_history: history,
                    newton_iterations: newton,
                    outer_iterations: outer,
                    gap,
                    stationarity,
                    complementarity,
                    min_slack: self.min_slack(&z),
                    z,
                });
            }
            t *= opts.mu;
        }
        let (stationarity, _) = self.kkt(&z, t / opts.mu);
        Err(Error::SolverTolerance { iterations: opts.max_outer, stationarity, gap: theta * opts.mu / t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// minimize ½‖z - (2, 2)‖² subject to ‖z‖ ≤ 1: solution (1, 1)/√2.
    fn ball_problem() -> ConeProblem {
        ConeProblem {
            p: DMatrix::identity(2, 2),
            q: DVector::from_vec(vec![-2.0, -2.0]),
            offset: 4.0,
            cones: vec![SocConstraint {
                v: DMatrix::identity(2, 2),
                v0: DVector::zeros(2),
                a: DVector::zeros(2),
                b: 1.0,
            }],
            linear: vec![],
        }
    }

    #[test]
    fn projection_onto_ball() {
        let p = ball_problem();
        let opts = BarrierOptions { gap_tol: 1e-8, ..Default::default() };
        let s = p.solve(&DVector::zeros(2), &opts).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(s.z[0], r, epsilon = 1e-9);
        assert_relative_eq!(s.z[1], r, epsilon = 1e-9);
        assert!(s.min_slack > 0.0);
        assert!(s.stationarity < 1e-6 && s.complementarity < 1e-6, "{} {}", s.stationarity, s.complementarity);
        assert!(s.objective_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn half_space_and_phase_one() {
        // minimize ½‖z‖² subject to z_0 + z_1 ≥ 2 and ‖z - (3, 0)‖ ≤ 2.5
        let p = ConeProblem {
            p: DMatrix::identity(2, 2),
            q: DVector::zeros(2),
            offset: 0.0,
            cones: vec![SocConstraint {
                v: DMatrix::identity(2, 2),
                v0: DVector::from_vec(vec![-3.0, 0.0]),
                a: DVector::zeros(2),
                b: 2.5,
            }],
            linear: vec![LinearConstraint { c: DVector::from_vec(vec![1.0, 1.0]), d: -2.0 }],
        };
        let opts = BarrierOptions { gap_tol: 1e-9, ..Default::default() };
        let z0 = p.find_feasible(&DVector::zeros(2), &opts).unwrap();
        assert!(p.min_slack(&z0) > 0.0);
        let s = p.solve(&z0, &opts).unwrap();
        // the half-space is active at (1, 1), which lies inside the disc
        assert_relative_eq!(s.z[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(s.z[1], 1.0, epsilon = 1e-8);
        assert!(s.stationarity < 1e-6, "{}", s.stationarity);
    }

    #[test]
    fn infeasible_detected() {
        let p = ConeProblem {
            p: DMatrix::identity(1, 1),
            q: DVector::zeros(1),
            offset: 0.0,
            cones: vec![],
            linear: vec![
                LinearConstraint { c: DVector::from_vec(vec![1.0]), d: -2.0 },
                LinearConstraint { c: DVector::from_vec(vec![-1.0]), d: 1.0 },
            ],
        };
        assert!(matches!(
            p.find_feasible(&DVector::zeros(1), &BarrierOptions::default()),
            Err(Error::Infeasible(_))
        ));
    }
}
