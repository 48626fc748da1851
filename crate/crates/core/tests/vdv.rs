use pce_core::applications::vdv::{
    vdv_galerkin_rhs, vdv_monte_carlo, vdv_propagate_with, VanDeVusseConfig, VanDeVusseParameters, VdvRealization,
    VdvTensors,
};
use pce_core::pce::sample_germ;

fn default_config() -> VanDeVusseConfig {
    VanDeVusseConfig::from_parameters(&VanDeVusseParameters::default()).unwrap()
}

#[test]
fn galerkin_moments_match_monte_carlo() {
    let cfg = default_config();
    let tensors = VdvTensors::new(cfg.basis()).unwrap();
    let traj = vdv_propagate_with(&cfg, &tensors).unwrap();
    let samples = 100_000;
    let mc = vdv_monte_carlo(&cfg, samples, 7, 10, 20).unwrap();
    let pce = traj.checkpoints(10);
    let se = |std: f64| 5.0 * std / (samples as f64).sqrt();
    for (p, m) in pce.iter().zip(&mc.checkpoints) {
        assert!((p.t - m.t).abs() < 1e-12);
        for (pm, mm, ps, ms) in [
            (p.mean_ca, m.mean_ca, p.std_ca, m.std_ca),
            (p.mean_cb, m.mean_cb, p.std_cb, m.std_cb),
        ] {
            assert!((pm - mm).abs() <= 0.01 * mm.abs(), "mean {pm} vs {mm} at t = {}", p.t);
            assert!((pm - mm).abs() <= se(ms), "mean {pm} outside 5 standard errors of {mm} at t = {}", p.t);
            assert!((ps - ms).abs() <= 0.05 * ms, "std {ps} vs {ms} at t = {}", p.t);
        }
    }

    let mut inside = 0;
    let mut total = 0;
    for path in &mc.paths {
        for (&(a, b), env) in path.iter().zip(&pce) {
            inside += usize::from((a - env.mean_ca).abs() <= 3.0 * env.std_ca);
            inside += usize::from((b - env.mean_cb).abs() <= 3.0 * env.std_cb);
            total += 2;
        }
    }
    assert_eq!(mc.paths.len(), 20);
    assert!(inside as f64 >= 0.99 * total as f64, "{inside} of {total}");
}

#[test]
fn zero_uncertainty_is_deterministic_rk4() {
    let p = VanDeVusseParameters { r1_std: 0.0, r2_std: 0.0, ..Default::default() };
    let cfg = VanDeVusseConfig::from_parameters(&p).unwrap();
    let traj = vdv_propagate_with(&cfg, &VdvTensors::new(cfg.basis()).unwrap()).unwrap();
    let steps = cfg.steps().unwrap();
    let scalar = VdvRealization { r1: p.r1_mean, r2: p.r2_mean, r3: p.r3, u: p.u, ca0: p.ca0, cb0: p.cb0 }
        .integrate(p.dt, steps)
        .unwrap();
    assert_eq!(traj.envelopes.len(), scalar.len());
    for (env, &(a, b)) in traj.envelopes.iter().zip(&scalar) {
        assert!((env.mean_ca - a).abs() <= 1e-12 && (env.mean_cb - b).abs() <= 1e-12);
        assert!(env.std_ca <= 1e-12 && env.std_cb <= 1e-12);
    }
}

#[test]
fn initial_mean_rate_matches_monte_carlo() {
    let cfg = default_config();
    let tensors = VdvTensors::new(cfg.basis()).unwrap();
    let (da, db) = vdv_galerkin_rhs(cfg.ca0.coefficients(), cfg.cb0.coefficients(), &cfg, &tensors.nu).unwrap();
    // forward differences of one tiny RK4 step per realization
    let h = 1e-8;
    let n = 100_000;
    let rates: Vec<(f64, f64)> = sample_germ(cfg.basis(), n, 11)
        .iter()
        .map(|tau| {
            let r = cfg.realize(tau).unwrap();
            let path = r.integrate(h, 1).unwrap();
            ((path[1].0 - path[0].0) / h, (path[1].1 - path[0].1) / h)
        })
        .collect();
    let stats = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let m = rates.iter().map(f).sum::<f64>() / n as f64;
        let v = rates.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, (v / n as f64).sqrt())
    };
    let (ma, sea) = stats(&|r| r.0);
    let (mb, seb) = stats(&|r| r.1);
    assert!((da[0] - ma).abs() <= 5.0 * sea + 1e-6 * ma.abs(), "{} vs {ma} ± {sea}", da[0]);
    assert!((db[0] - mb).abs() <= 5.0 * seb + 1e-6 * mb.abs(), "{} vs {mb} ± {seb}", db[0]);
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let p = VanDeVusseParameters { t_end: 0.01, ..Default::default() };
    let cfg = VanDeVusseConfig::from_parameters(&p).unwrap();
    let a = vdv_monte_carlo(&cfg, 500, 3, 5, 2).unwrap();
    let b = vdv_monte_carlo(&cfg, 500, 3, 5, 2).unwrap();
    let c = vdv_monte_carlo(&cfg, 500, 4, 5, 2).unwrap();
    assert_eq!(a.checkpoints, b.checkpoints);
    assert_eq!(a.paths, b.paths);
    assert_ne!(a.checkpoints, c.checkpoints);
}
