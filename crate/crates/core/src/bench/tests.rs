use super::*;
use crate::io::{fixture_path, write_hamiltonian, Metadata};
use std::fs;



fn write_system(dir: &Path, name: &str, labels: &[(&str, f64)]) -> PathBuf {
    let h = PauliSum::from_labels(labels).unwrap();
    let meta = Metadata {
        system: Some(name.into()),
        ..Metadata::default()
    };
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, write_hamiltonian(&h, &meta)).unwrap();
    path
}

fn small_spec(hamiltonians: Vec<PathBuf>) -> SweepSpec {
    let mut spec = read_sweep_spec(r#"{"hamiltonians": [], "axes": {"optimizer": ["slsqp_equiv", "cobyla"]}}"#).unwrap();
    spec.hamiltonians = hamiltonians;
    spec.defaults.ansatz = AnsatzKind::RealAmplitudes;
    spec.defaults.optimizer.max_iterations = 80;
    spec.restarts = 2;
    spec
}

fn strip_wall_time(csv: &str) -> String {
    let col = csv.lines().next().unwrap().split(',').position(|h| h == "wall_time_s").unwrap();
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(col);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn percent_error_and_units() {
    assert!((percent_error(-1.1, -1.0).unwrap() - 10.0).abs() < 1e-12);
    assert!((percent_error(2.02, 2.0).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(percent_error(-1.0, -1.0).unwrap(), 0.0);
    assert!(matches!(percent_error(1.0, 0.0), Err(Error::Argument(_))));
    assert_eq!(convert_energy(1.0, EnergyUnit::Ev), 27.2114);
    assert_eq!(convert_energy(-2.0, EnergyUnit::Joule), -2.0 * 4.3597e-18);
    assert_eq!(convert_energy(-2.5, EnergyUnit::Hartree), -2.5);
    assert_eq!("ev".parse::<EnergyUnit>().unwrap(), EnergyUnit::Ev);
    assert!("kcal".parse::<EnergyUnit>().is_err());
}

#[test]
fn validation_fails_before_any_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let a = write_system(dir, "a", &[("ZZ", -1.0)]);
    let no_axes = read_sweep_spec(r#"{"hamiltonians": ["a.json"], "axes": {}}"#).unwrap();
    assert!(matches!(no_axes.plan(dir), Err(Error::Validation(_))));
    let empty = read_sweep_spec(r#"{"hamiltonians": ["a.json"], "axes": {"reps": []}}"#).unwrap();
    assert!(matches!(empty.plan(dir), Err(Error::Validation(_))));
    let zero_reps = read_sweep_spec(r#"{"hamiltonians": ["a.json"], "axes": {"reps": [1, 0]}}"#).unwrap();
    assert!(matches!(zero_reps.plan(dir), Err(Error::Validation(_))));
    let mut missing = small_spec(vec![a.clone(), dir.join("missing.json")]);
    assert!(matches!(missing.plan(dir), Err(Error::Io { .. })));
    missing.hamiltonians.pop();
    missing.restarts = 0;
    assert!(matches!(missing.plan(dir), Err(Error::Validation(_))));
    let bad_snapshot =
        read_sweep_spec(r#"{"hamiltonians": ["a.json"], "axes": {"estimator": ["noisy"], "snapshot": ["nowhere"]}}"#)
            .unwrap();
    assert!(bad_snapshot.plan(dir).is_err());
    let e = read_sweep_spec(r#"{"hamiltonians": [], "axes": {}, "typo": 1}"#).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }), "{e}");
    assert!(read_sweep_spec(r#"{"hamiltonians": [], "axes": {"optimizer": ["newton"]}}"#).is_err());
}

#[test]
fn rows_cover_the_full_product() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let a = write_system(dir, "alpha", &[("ZZ", -1.0), ("XX", -0.5)]);
    let b = write_system(dir, "beta", &[("Z", 1.0)]);
    let mut spec = small_spec(vec![b, a]);
    spec.axes.estimator = Some(vec![EstimatorMode::Statevector, EstimatorMode::Shots, EstimatorMode::Noisy]);
    spec.defaults.shots = 256;
    spec.reference_energies = Some([("alpha".to_string(), -1.5)].into());
    let rows = run_sweep(&spec, dir, 2).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    // Ordered by system, then optimizer, then estimator.
    assert!(rows[..6].iter().all(|r| r.system == "alpha"));
    assert_eq!(rows[0].optimizer, OptimizerKind::SlsqpEquiv);
    assert_eq!(rows[3].optimizer, OptimizerKind::Cobyla);
    assert_eq!(
        rows[..3].iter().map(|r| r.estimator).collect::<Vec<_>>(),
        EstimatorMode::ALL.to_vec()
    );
    for r in &rows {
        assert!(r.failure.is_none(), "{r}: {:?}", r.failure);
        assert_eq!(r.percent_error.is_some(), r.system == "alpha");
        assert_eq!(r.snapshot.is_some(), r.estimator == EstimatorMode::Noisy);
        assert!(r.eval_count > 0 && r.mae.is_some() && r.spread.is_some());
    }
    let alpha = &rows[0];
    assert!((alpha.exact_energy.unwrap() + 1.5).abs() < 1e-9);
    assert!(alpha.percent_error.unwrap() < 1e-4);
}

#[test]
fn failures_become_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // Wider than any bundled snapshot, so only the noisy cell fails.
    let label = "Z".repeat(9);
    let wide = write_system(dir, "wide", &[(&label, 1.0)]);
    let mut spec = small_spec(vec![wide]);
    spec.axes.optimizer = None;
    spec.axes.estimator = Some(vec![EstimatorMode::Statevector, EstimatorMode::Noisy]);
    spec.defaults.optimizer.max_iterations = 5;
    spec.restarts = 1;
    let rows = run_sweep(&spec, dir, 1).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].failure.is_none());
    let failed = &rows[1];
    assert!(failed.failure.as_deref().unwrap().contains("dimension"), "{:?}", failed.failure);
    assert_eq!(failed.vqe_energy, None);
    let csv = rows_to_csv(&rows, EnergyUnit::Hartree);
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let a = write_system(dir, "a", &[("ZZ", -1.0), ("XI", 0.3)]);
    let mut spec = small_spec(vec![a]);
    spec.axes.estimator = Some(vec![EstimatorMode::Shots, EstimatorMode::Noisy]);
    spec.defaults.shots = 128;
    spec.seed = 21;
    let one = run_sweep(&spec, dir, 1).unwrap();
    let four = run_sweep(&spec, dir, 4).unwrap();
    for fmt in [EnergyUnit::Hartree, EnergyUnit::Ev] {
        assert_eq!(strip_wall_time(&rows_to_csv(&one, fmt)), strip_wall_time(&rows_to_csv(&four, fmt)));
    }
    spec.seed = 22;
    let other = run_sweep(&spec, dir, 2).unwrap();
    assert_ne!(
        strip_wall_time(&rows_to_csv(&one, EnergyUnit::Hartree)),
        strip_wall_time(&rows_to_csv(&other, EnergyUnit::Hartree))
    );
}

#[test]
fn writers() {
    let row = MetricRow {
        system: "h2, stretched".into(),
        basis: Some("sto-3g".into()),
        optimizer: OptimizerKind::Spsa,
        ansatz: AnsatzKind::Circuit3,
        reps: 2,
        estimator: EstimatorMode::Shots,
        snapshot: None,
        n_parameters: 6,
        vqe_energy: Some(-1.0),
        exact_energy: Some(-2.0),
        mae: Some(0.1),
        spread: Some(0.0),
        percent_error: None,
        wall_time: 0.5,
        eval_count: 40,
        failure: Some("said \"no\"".into()),
    };
    let csv = rows_to_csv(&[row.clone()], EnergyUnit::Ev);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("vqe_energy_ev,exact_energy_ev,mae_ev,spread_ev,percent_error"));
    assert_eq!(
        lines.next().unwrap(),
        "\"h2, stretched\",sto-3g,spsa,circuit3,2,shots,,6,-27.2114,-54.4228,2.72114,0.0,,0.5,40,\"said \"\"no\"\"\""
    );
    let json: serde_json::Value = serde_json::from_str(&rows_to_json(&[row.clone()], EnergyUnit::Hartree)).unwrap();
    let back: MetricRow = serde_json::from_value(json["rows"][0].clone()).unwrap();
    assert_eq!(back, row);
    let table = rows_to_table(&[row], EnergyUnit::Hartree);
    assert!(table.contains("-1.000 00") && table.contains("0.100 00 ± 0.000 000"), "{table}");
}

#[test]
fn bond_scan_follows_the_fixture_curve() {
    let (spec, series) = read_series_file(&fixture_path("scan/series.json")).unwrap();
    let base = fixture_path("scan");
    let points = run_series(&spec, &series, &base).unwrap();
    assert_eq!(points.len(), 7);
    for p in &points {
        let expected = (p.distance - 0.26).powi(2) - 1.0;
        assert!((p.energy - expected).abs() < 1e-6, "{} at {}", p.energy, p.distance);
    }
    let lowest = points.iter().min_by(|a, b| a.energy.total_cmp(&b.energy)).unwrap();
    assert!((lowest.distance - 0.26).abs() < 1e-12);
    let csv = scan_to_csv(&points, EnergyUnit::Hartree);
    assert!(csv.starts_with("distance_nm,energy_hartree\n0.2,"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 2));
}

#[test]
fn bond_scan_rejects_bad_series() {
    let h = PauliSum::from_labels(&[("Z", 1.0)]).unwrap();
    let ansatz = AnsatzSpec::new(AnsatzKind::Circuit1, 1, 1);
    let opt = OptimizerSpec::new(OptimizerKind::SlsqpEquiv);
    let est = EstimatorConfig::statevector();
    let one = vec![(0.1, h.clone())];
    assert!(matches!(bond_scan(&one, &ansatz, &opt, &est, 1, 0), Err(Error::Argument(_))));
    let dup = vec![(0.1, h.clone()), (0.1, h.clone())];
    assert!(matches!(bond_scan(&dup, &ansatz, &opt, &est, 1, 0), Err(Error::Argument(_))));
    let down = vec![(0.2, h.clone()), (0.1, h)];
    assert!(matches!(bond_scan(&down, &ansatz, &opt, &est, 1, 0), Err(Error::Argument(_))));
}

#[test]
fn bundled_sweeps_plan() {
    for name in ["sweeps/reps.json", "sweeps/grid.json"] {
        let path = fixture_path(name);
        let spec = read_sweep_spec_file(&path).unwrap();
        let plan = spec.plan(path.parent().unwrap()).unwrap();
        assert!(!plan.cells.is_empty());
    }
}
