use anyhow::{bail, Result};
use pce_core::applications::ocp::{ocp_solve_with, violation_rate, OcpConfig, OcpTensors};
use pce_core::applications::socp::BarrierOptions;
use pce_core::applications::vdv::{vdv_monte_carlo, vdv_propagate_with, VanDeVusseConfig, VdvTensors};
use pce_core::quadrature::{
    clenshaw_curtis_rule, fejer1_rule, fejer2_rule, gauss_lobatto_rule, gauss_radau_rule, gauss_rule,
};
use pce_core::recurrence::{coefficients_for, expand_monic};
use pce_core::tensor::compute_tensor;
use pce_core::{Measure, MultiOrthoBasis, OrthoBasis, QuadratureRule};
use serde_json::json;
use std::path::PathBuf;

use crate::output::{artifact, write_csv, write_json, Cell};
use crate::spec::{self, BasisSpec, BenchSpec, OcpSpec, PropagateSpec, QuadSpec, RuleName, TensorSpec};

pub struct Context {
    pub spec: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub overrides: Vec<String>,
}

impl Context {
    fn load<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        spec::load(self.spec.as_deref(), &self.overrides)
    }
}

pub fn basis(ctx: &Context) -> Result<()> {
    let s: BasisSpec = ctx.load()?;
    let b = OrthoBasis::new(s.measure.build()?, s.degree)?;
    let rc = b.coefficients();
    let polynomials = (0..=s.degree).map(|k| expand_monic(rc, k)).collect::<pce_core::Result<Vec<_>>>()?;
    let n = s.degree + 1;
    let mut header = vec!["k".to_string()];
    header.extend((0..n).map(|p| format!("c{p}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = polynomials.iter().enumerate().map(|(k, coeffs)| {
        let mut row = vec![Cell::from(k)];
        row.extend((0..n).map(|p| Cell::from(coeffs.get(p).copied().unwrap_or(0.0))));
        row
    });
    write_csv(&artifact(&ctx.out, ".csv"), &header, rows)?;
    write_json(
        &artifact(&ctx.out, ".json"),
        &json!({
            "measure": s.measure,
            "degree": s.degree,
            "procedure": format!("{:?}", rc.source()),
            "alpha": &rc.alpha()[..n],
            "beta": &rc.beta()[..n],
            "norms_squared": b.norms_squared(),
            "monic": polynomials,
        }),
    )
}

/// Weights with respect to the measure: Gauss-type rules carry them
/// already, interpolatory rules are multiplied by the density.
fn measure_rule(m: &Measure, s: &QuadSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let support = m.support();
    let rule: QuadratureRule = match s.rule {
        RuleName::Gauss => gauss_rule(&coefficients_for(m, s.n)?, s.n)?,
        RuleName::Radau => {
            let end = s.endpoint.unwrap_or(support.0);
            gauss_radau_rule(&coefficients_for(m, s.n)?, s.n, end, support)?
        }
        RuleName::Lobatto => {
            gauss_lobatto_rule(&coefficients_for(m, s.n.max(2))?, s.n, support.0, support.1, support)?
        }
        interpolatory => {
            let window = m.truncated_support(2 * s.n);
            let rule = match interpolatory {
                RuleName::Fejer1 => fejer1_rule(s.n, window)?,
                RuleName::Fejer2 => fejer2_rule(s.n, window)?,
                _ => clenshaw_curtis_rule(s.n, window)?,
            };
            let w = rule.nodes().iter().zip(rule.weights()).map(|(&x, &w)| w * m.density(x)).collect();
            return Ok((rule.nodes().to_vec(), w));
        }
    };
    Ok((rule.nodes().to_vec(), rule.weights().to_vec()))
}

pub fn quad(ctx: &Context) -> Result<()> {
    let s: QuadSpec = ctx.load()?;
    let m = s.measure.build()?;
    let (nodes, weights) = measure_rule(&m, &s)?;
    let rows = nodes.iter().zip(&weights).map(|(&x, &w)| vec![Cell::from(x), Cell::from(w)]);
    write_csv(&artifact(&ctx.out, ".csv"), &["node", "weight"], rows)
}

pub fn tensor(ctx: &Context) -> Result<()> {
    let s: TensorSpec = ctx.load()?;
    if s.measures.is_empty() {
        bail!("tensor spec needs at least one measure");
    }
    let measures = s.measures.iter().map(|m| m.build()).collect::<pce_core::Result<Vec<_>>>()?;
    let mb = MultiOrthoBasis::from_measures(measures, s.degree)?;
    let t = compute_tensor(&mb, s.order)?;
    let mut header: Vec<String> = (1..=s.order).map(|i| format!("k{i}")).collect();
    header.push("value".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = t.entries().map(|(idx, v)| {
        let mut row: Vec<Cell> = idx.iter().map(|&i| Cell::from(i)).collect();
        row.push(Cell::from(v));
        row
    });
    write_csv(&artifact(&ctx.out, ".csv"), &header, rows)?;
    write_json(
        &artifact(&ctx.out, ".json"),
        &json!({
            "measures": s.measures,
            "degree": s.degree,
            "order": s.order,
            "basis_size": mb.len(),
            "nonzeros": t.nnz(),
            "index_set": mb.index_set(),
        }),
    )
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn propagate(ctx: &Context) -> Result<()> {
    let s: PropagateSpec = ctx.load()?;
    let cfg = VanDeVusseConfig::from_parameters(&s.parameters)?;
    let tensors = VdvTensors::new(cfg.basis())?;
    let traj = vdv_propagate_with(&cfg, &tensors)?;
    log::info!("propagated {} steps on a basis of size {}", traj.times.len() - 1, cfg.r1.len());
    write_csv(
        &artifact(&ctx.out, ".csv"),
        &["t", "mean_cA", "std_cA", "mean_cB", "std_cB"],
        traj.envelopes.iter().map(|e| vec![e.t.into(), e.mean_ca.into(), e.std_ca.into(), e.mean_cb.into(), e.std_cb.into()]),
    )?;
    let mut summary = json!({
        "parameters": s.parameters,
        "basis_size": cfg.r1.len(),
        "steps": traj.times.len() - 1,
        "final": traj.envelopes.last(),
        "seed": ctx.seed,
    });
    if s.mc_samples > 0 {
        let mc = vdv_monte_carlo(&cfg, s.mc_samples, ctx.seed, s.checkpoints, s.paths)?;
        let pce = traj.checkpoints(s.checkpoints);
        write_csv(
            &artifact(&ctx.out, "_mc.csv"),
            &[
                "t", "pce_mean_cA", "mc_mean_cA", "pce_std_cA", "mc_std_cA", "pce_mean_cB", "mc_mean_cB", "pce_std_cB",
                "mc_std_cB",
            ],
            pce.iter().zip(&mc.checkpoints).map(|(p, m)| {
                [p.t, p.mean_ca, m.mean_ca, p.std_ca, m.std_ca, p.mean_cb, m.mean_cb, p.std_cb, m.std_cb]
                    .into_iter()
                    .map(Cell::from)
                    .collect()
            }),
        )?;
        write_csv(
            &artifact(&ctx.out, "_paths.csv"),
            &["path", "t", "cA", "cB"],
            mc.paths.iter().enumerate().flat_map(|(i, path)| {
                path.iter().zip(&pce).map(move |(&(a, b), p)| vec![i.into(), p.t.into(), a.into(), b.into()])
            }),
        )?;
        let worst = |f: &dyn Fn(&pce_core::applications::vdv::Envelope) -> f64| {
            pce.iter().zip(&mc.checkpoints).map(|(p, m)| relative(f(p), f(m))).fold(0.0, f64::max)
        };
        summary["monte_carlo"] = json!({
            "samples": s.mc_samples,
            "max_rel_mean_cA": worst(&|e| e.mean_ca),
            "max_rel_mean_cB": worst(&|e| e.mean_cb),
            "max_rel_std_cA": worst(&|e| e.std_ca),
            "max_rel_std_cB": worst(&|e| e.std_cb),
        });
    }
    write_json(&artifact(&ctx.out, ".json"), &summary)
}

pub fn ocp(ctx: &Context) -> Result<()> {
    let s: OcpSpec = ctx.load()?;
    let cfg = OcpConfig::from_parameters(&s.parameters, s.k_measure.build()?)?;
    let tensors = OcpTensors::new(cfg.basis())?;
    let sol = ocp_solve_with(&cfg, &tensors, &BarrierOptions::default())?;
    log::info!("solved with objective {} after {} Newton steps", sol.objective, sol.report.newton_iterations);
    let rows = sol.moments(&cfg.basis().norms_squared()).into_iter().map(|m| {
        vec![
            m.t.into(),
            m.u.map_or(Cell::from(""), Cell::from),
            m.mean_x1.into(),
            m.std_x1.into(),
            m.mean_x2.into(),
            m.std_x2.into(),
        ]
    });
    write_csv(&artifact(&ctx.out, ".csv"), &["t", "u", "mean_x1", "std_x1", "mean_x2", "std_x2"], rows)?;
    let rate = if s.mc_samples > 0 { Some(violation_rate(&cfg, &sol.u, s.mc_samples, ctx.seed)?) } else { None };
    let r = &sol.report;
    write_json(
        &artifact(&ctx.out, ".json"),
        &json!({
            "parameters": s.parameters,
            "k_measure": s.k_measure,
            "objective": sol.objective,
            "violation_rate": rate,
            "mc_samples": s.mc_samples,
            "seed": ctx.seed,
            "solver": {
                "stationarity": r.stationarity,
                "complementarity": r.complementarity,
                "gap": r.gap,
                "max_constraint_violation": r.max_constraint_violation,
                "newton_iterations": r.newton_iterations,
                "outer_iterations": r.outer_iterations,
            },
            "u": sol.u,
        }),
    )
}

pub fn bench(ctx: &Context) -> Result<()> {
    let s: BenchSpec = ctx.load()?;
    let mut rows = Vec::new();
    for example in pce_bench::examples()? {
        let t = pce_bench::time_example(&example, s.reps)?;
        println!(
            "{:<14} N_unc={} basis {:>10.1} us  tensor2 {:>10.1} us  tensor3 {:>10.1} us",
            example.name,
            example.uncertainties(),
            t.basis_us,
            t.order2_us,
            t.order3_us
        );
        rows.push(vec![
            Cell::from(example.name),
            example.uncertainties().into(),
            s.reps.into(),
            t.basis_us.into(),
            t.order2_us.into(),
            t.order3_us.into(),
        ]);
    }
    write_csv(&artifact(&ctx.out, ".csv"), &["example", "n_unc", "reps", "basis_us", "tensor2_us", "tensor3_us"], rows)
}
