use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubit-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(csv: &[u8]) -> (String, Vec<Vec<f64>>) {
    let text = String::from_utf8(csv.to_vec()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let data = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, data)
}

fn max_position_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x[1] - y[1]).abs().max((x[2] - y[2]).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn evolve_writes_header_and_samples() {
    let out = lab(&[
        "evolve",
        "--mode",
        "classical",
        "--ax",
        "0.3",
        "--ay",
        "0.4",
        "--i0",
        "0.3",
        "--t-final",
        "0.1",
        "--dt",
        "0.01",
    ]);
    assert!(out.status.success());
    let (header, data) = rows(&out.stdout);
    assert_eq!(header, "t,I,Phi,dI,dPhi");
    assert_eq!(data.len(), 11);
    assert!((data[10][0] - 0.1).abs() < 1e-15);
}

#[test]
fn quantum_and_classical_modes_agree() {
    let common = [
        "--ax",
        "0.3",
        "--ay",
        "0.4",
        "--i0",
        "0.3",
        "--phi0",
        "0.9",
        "--t-final",
        "1",
    ];
    let q = lab(&[&["evolve", "--mode", "quantum"][..], &common].concat());
    let c = lab(&[&["evolve", "--mode", "classical"][..], &common].concat());
    assert!(q.status.success() && c.status.success());
    let gap = max_position_gap(&rows(&q.stdout).1, &rows(&c.stdout).1);
    assert!(gap < 1e-6, "gap {gap}");
}

#[test]
fn action_outside_domain_is_a_usage_error() {
    let out = lab(&["evolve", "--mode", "classical", "--i0", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(
        lab(&["evolve", "--mode", "classical", "--warp", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_file_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "mode = classical\nwarp = 9\n").unwrap();
    let out = lab(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp"));
}

#[test]
fn config_file_supplies_defaults_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "mode = classical\nax = 0.3\ni0 = 0.2\nt_final = 0.05\ndt = 0.01\n",
    )
    .unwrap();
    let out = lab(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--t-final",
        "0.02",
    ]);
    assert!(out.status.success());
    let (_, data) = rows(&out.stdout);
    assert_eq!(data.len(), 3);
    assert_eq!(data[0][1], 0.2);
}

#[test]
fn singular_run_flushes_partial_trajectory_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let out = lab(&[
        "evolve",
        "--mode",
        "dissipative",
        "--ax",
        "1",
        "--az",
        "0.5",
        "--gamma",
        "0.5",
        "--i0",
        "0.2",
        "--t-final",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
    let (_, data) = rows(&std::fs::read(&csv).unwrap());
    assert!(data.len() > 10);
    assert!(data.last().unwrap()[0] < 50.0);
}

#[test]
fn dissipative_without_seed_reports_one() {
    let out = lab(&[
        "evolve",
        "--mode",
        "dissipative",
        "--ax",
        "1",
        "--gamma",
        "0.1",
        "--noise-sigma",
        "0.1",
        "--t-final",
        "0.01",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed = "));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("t,I,Phi,dI,dPhi,xi"));
}

#[test]
fn seeded_dissipative_runs_repeat() {
    let args = [
        "evolve",
        "--mode",
        "dissipative",
        "--ax",
        "1",
        "--gamma",
        "0.1",
        "--noise-sigma",
        "0.2",
        "--t-final",
        "0.5",
        "--seed",
        "11",
    ];
    assert_eq!(lab(&args).stdout, lab(&args).stdout);
}

#[test]
fn flat_geodesic_is_a_straight_line() {
    let out = lab(&[
        "geodesic",
        "--connection",
        "flat",
        "--i0",
        "0.1",
        "--phi0",
        "0.2",
        "--v",
        "0.3",
        "-0.5",
        "--t-final",
        "1",
        "--dt",
        "0.25",
    ]);
    assert!(out.status.success());
    let (_, data) = rows(&out.stdout);
    for r in &data {
        assert!((r[1] - (0.1 + 0.3 * r[0])).abs() < 1e-12);
        assert!((r[2] - (0.2 - 0.5 * r[0])).abs() < 1e-12);
    }
}

#[test]
fn spherical_geodesic_uses_polar_columns() {
    let out = lab(&[
        "geodesic",
        "--connection",
        "cot-theta",
        "--v",
        "0",
        "1",
        "--t-final",
        "0.1",
        "--dt",
        "0.05",
    ]);
    assert!(out.status.success());
    let (header, data) = rows(&out.stdout);
    assert_eq!(header, "t,theta,Phi,dtheta,dPhi");
    assert!((data[0][1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn action_angle_geodesic_tracks_hamilton_flow() {
    let common = [
        "--ax",
        "0.3",
        "--ay",
        "0.4",
        "--i0",
        "0.3",
        "--phi0",
        "1",
        "--t-final",
        "1",
    ];
    let g = lab(&[
        &["geodesic", "--connection", "eq5", "--from-dynamics"][..],
        &common,
    ]
    .concat());
    let c = lab(&[&["evolve", "--mode", "classical"][..], &common].concat());
    assert!(g.status.success() && c.status.success());
    let gap = max_position_gap(&rows(&g.stdout).1, &rows(&c.stdout).1);
    assert!(gap < 1e-6, "gap {gap}");
}

#[test]
fn action_angle_geodesic_refuses_longitudinal_field() {
    let out = lab(&[
        "geodesic",
        "--connection",
        "eq5",
        "--from-dynamics",
        "--ax",
        "0.3",
        "--az",
        "0.2",
        "--i0",
        "0.3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn geodesic_needs_a_velocity() {
    assert_eq!(
        lab(&["geodesic", "--connection", "flat"]).status.code(),
        Some(2)
    );
}

#[test]
fn full_audit_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = lab(&["audit", "--seed", "42", "--out", p.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ja = std::fs::read(&a).unwrap();
    assert_eq!(ja, std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["convention"]["sign"], -1);
    assert!(v["results"].as_array().unwrap().len() > 20);
}

#[test]
fn audit_subset_by_check_and_gamma() {
    let out = lab(&["audit", "--check", "prop7", "--gamma", "0.1", "--seed", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let results = v["results"].as_array().unwrap();
    assert!(!results.is_empty());
    for r in results {
        assert!(r["check_id"].as_str().unwrap().starts_with("prop7"));
        assert_eq!(r["inputs"]["gammas"], serde_json::json!([0.1]));
    }
}

#[test]
fn audit_rejects_unknown_group() {
    assert_eq!(lab(&["audit", "--check", "nope"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_cells_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = lab(&[
        "sweep",
        "--gamma",
        "0.01,0.1",
        "--noise-sigma",
        "0,0.1",
        "--az",
        "0,0.5",
        "--ax",
        "1",
        "--i0",
        "0.2",
        "--t-final",
        "0.5",
        "--seed",
        "3",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let index = std::fs::read_to_string(out_dir.join("index.csv")).unwrap();
    let lines: Vec<&str> = index.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("cell,gamma,noise_sigma,az,seed"));
    for i in 0..8 {
        assert!(Path::new(&out_dir.join(format!("cell_{i:04}.csv"))).exists());
    }
}
