use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn pce(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pce")).current_dir(dir).args(args).output().expect("spawn pce")
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

#[test]
fn two_point_gauss_rule() {
    let dir = tempfile::tempdir().unwrap();
    let out = pce(dir.path(), &["quad", "--rule", "gauss", "--n", "2", "--out", "q"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("q.csv"));
    assert_eq!(header, "node,weight");
    let r = 0.5 / 3f64.sqrt();
    assert_eq!(rows.len(), 2);
    for (row, x) in rows.iter().zip([0.5 - r, 0.5 + r]) {
        assert!((row[0] - x).abs() < 1e-15 && (row[1] - 0.5).abs() < 1e-15, "{row:?}");
    }
}

#[test]
fn mixture_basis_matches_published_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{
        "measure": {"kind": "mixture", "weights": [0.3, 0.7],
                    "components": [{"kind": "beta01", "alpha": 2, "beta": 4.5},
                                   {"kind": "beta01", "alpha": 4, "beta": 1.5}]},
        "degree": 4
    }"#;
    std::fs::write(dir.path().join("mix.json"), spec).unwrap();
    let out = pce(dir.path(), &["basis", "--spec", "mix.json", "--out", "b"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    // ascending powers, rounded to two decimals
    let published: [&[f64]; 4] = [
        &[-0.6, 1.0],
        &[0.23, -1.09, 1.0],
        &[-0.08, 0.73, -1.6, 1.0],
        &[0.03, -0.38, 1.47, -2.11, 1.0],
    ];
    let got = json["monic"].as_array().unwrap();
    let (header, rows) = read_csv(&dir.path().join("b.csv"));
    assert_eq!(header, "k,c0,c1,c2,c3,c4");
    assert_eq!(rows[4][5], 1.0);
    for (k, want) in published.iter().enumerate() {
        let coeffs: Vec<f64> = got[k + 1].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(coeffs.len(), want.len());
        for (c, w) in coeffs.iter().zip(*want) {
            assert!((c - w).abs() <= 0.005, "φ{}: {c} vs {w}", k + 1);
        }
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = |prefix: &'static str| {
        vec![
            "propagate", "--out", prefix, "--seed", "9", "--set", "mc_samples=200", "--set", "parameters.t_end=0.01",
            "--set", "parameters.degree=2",
        ]
    };
    for prefix in ["a", "b"] {
        let out = pce(dir.path(), &args(prefix));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for suffix in [".csv", "_mc.csv", "_paths.csv"] {
        let a = std::fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix}");
    }
    let (header, rows) = read_csv(&dir.path().join("a.csv"));
    assert_eq!(header, "t,mean_cA,std_cA,mean_cB,std_cB");
    assert_eq!(rows.len(), 101);
}

#[test]
fn tensor_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = pce(dir.path(), &["tensor", "--order", "3", "--set", "degree=2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("tensor.csv"));
    assert_eq!(header, "k1,k2,k3,value");
    // Gaussian: ⟨φ1 φ1 φ2⟩ = 2
    let e = rows.iter().find(|r| r[..3] == [1.0, 1.0, 2.0]).unwrap();
    assert!((e[3] - 2.0).abs() < 1e-12);
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"n\": 2,\n \"rule\": }").unwrap();
    let cases: [&[&str]; 5] = [
        &["quad", "--spec", "bad.json"],
        &["quad", "--spec", "missing.json"],
        &["quad", "--set", "nodes=4"],
        &["quad", "--set", "rule=radau", "--set", "endpoint=0.5"],
        &["basis", "--set", "measure.kind=beta01", "--set", "measure.alpha=-1", "--set", "measure.beta=2"],
    ];
    for args in cases {
        let out = pce(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
    let out = pce(dir.path(), &["quad", "--spec", "bad.json"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_ne!(pce(dir.path(), &["unknown"]).status.code(), Some(0));
}

#[test]
fn ocp_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = pce(dir.path(), &["ocp", "--set", "mc_samples=2000", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("o.json")).unwrap()).unwrap();
    assert!((json["objective"].as_f64().unwrap() - 2.579_740_201).abs() < 1e-6);
    assert!(json["solver"]["max_constraint_violation"].as_f64().unwrap() <= 1e-8);
    let (header, rows) = read_csv(&dir.path().join("o.csv"));
    assert_eq!(header, "t,u,mean_x1,std_x1,mean_x2,std_x2");
    assert_eq!(rows.len(), 76);
    assert!(rows[75][1].is_nan());
}
