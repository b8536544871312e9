use super::*;
use crate::ansatz::AnsatzKind;
use crate::exact::tests::random_hermitian_sum;
use crate::noise::bundled_snapshot;
use crate::optimize::OptimizerKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bell_hamiltonian() -> PauliSum {
    PauliSum::from_labels(&[("XX", -1.0), ("ZZ", -1.0)]).unwrap()
}

fn slsqp() -> OptimizerSpec {
    OptimizerSpec::new(OptimizerKind::SlsqpEquiv)
}

fn strip_times(mut r: VqeResult) -> VqeResult {
    r.wall_time = 0.0;
    r.restarts.iter_mut().for_each(|x| x.wall_time = 0.0);
    r
}

#[test]
fn single_qubit_cosine_landscape() {
    let h = PauliSum::from_labels(&[("Z", 1.0)]).unwrap();
    let ansatz = AnsatzSpec::new(AnsatzKind::Circuit1, 1, 1);
    let r = run_vqe(&h, &ansatz, &slsqp(), &EstimatorConfig::statevector(), 1, 0).unwrap();
    assert!((r.energy + 1.0).abs() < 1e-8, "{}", r.energy);
    assert_eq!(r.exact_reference, Some(-1.0));
}

#[test]
fn two_qubit_ground_state() {
    let h = bell_hamiltonian();
    let ansatz = AnsatzSpec::new(AnsatzKind::EfficientSu2, 2, 1);
    let r = run_vqe(&h, &ansatz, &slsqp(), &EstimatorConfig::statevector(), 3, 1).unwrap();
    let exact = ground_energy(&h).unwrap();
    assert!((r.energy - exact).abs() < 1e-6, "{} vs {exact}", r.energy);
    assert!(r.restarts.iter().all(|x| r.energy <= x.energy));
}

#[test]
fn shot_mode_tracks_statevector() {
    let h = bell_hamiltonian();
    let ansatz = AnsatzSpec::new(AnsatzKind::EfficientSu2, 2, 1);
    let sv = run_vqe(&h, &ansatz, &slsqp(), &EstimatorConfig::statevector(), 1, 2).unwrap();
    let est = EstimatorConfig::shots(8192).with_seed(5);
    let opt = OptimizerSpec::new(OptimizerKind::Spsa).with_max_iterations(300).with_seed(1);
    let r = run_vqe(&h, &ansatz, &opt, &est, 1, 2).unwrap();
    assert!(r.stderr > 0.0);
    assert!((r.energy - sv.energy).abs() <= 5.0 * r.stderr, "{} ± {} vs {}", r.energy, r.stderr, sv.energy);
    assert!(r.energy >= sv.energy - 3.0 * r.stderr);
}

#[test]
fn traces_respect_the_variational_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..6 {
        let n = 2 + case % 2;
        let h = random_hermitian_sum(&mut rng, n, 6);
        let floor = ground_energy(&h).unwrap();
        let kind = OptimizerKind::ALL[case % 4];
        let opt = OptimizerSpec::new(kind).with_max_iterations(60).with_seed(case as u64);
        let ansatz = AnsatzSpec::new(AnsatzKind::RealAmplitudes, n, 1);
        let r = run_vqe(&h, &ansatz, &opt, &EstimatorConfig::statevector(), 2, case as u64).unwrap();
        for x in &r.restarts {
            assert!(x.trace.values().all(|v| v >= floor - 1e-9));
            assert!(r.energy <= x.energy);
        }
        assert!(r.energy >= floor - 1e-9);
    }
}

#[test]
fn runs_are_deterministic() {
    let h = bell_hamiltonian();
    let ansatz = AnsatzSpec::new(AnsatzKind::Circuit2, 2, 1);
    let opt = OptimizerSpec::new(OptimizerKind::Cobyla).with_max_iterations(150);
    for est in [
        EstimatorConfig::statevector(),
        EstimatorConfig::shots(512).with_seed(3),
        EstimatorConfig::noisy(256, bundled_snapshot("tokyo-like").unwrap()).with_seed(4),
    ] {
        let a = strip_times(run_vqe(&h, &ansatz, &opt, &est, 3, 9).unwrap());
        let b = strip_times(run_vqe(&h, &ansatz, &opt, &est, 3, 9).unwrap());
        assert_eq!(a, b, "{}", est.mode);
        let c = strip_times(run_vqe(&h, &ansatz, &opt, &est, 3, 10).unwrap());
        assert_ne!(a.restarts[0].initial_point, c.restarts[0].initial_point);
    }
}

#[test]
fn argument_errors() {
    let h = bell_hamiltonian();
    let sv = EstimatorConfig::statevector();
    let three = AnsatzSpec::new(AnsatzKind::Circuit1, 3, 1);
    assert!(matches!(run_vqe(&h, &three, &slsqp(), &sv, 1, 0), Err(Error::Dimension(_))));
    let two = AnsatzSpec::new(AnsatzKind::Circuit1, 2, 1);
    assert!(matches!(run_vqe(&h, &two, &slsqp(), &sv, 0, 0), Err(Error::Argument(_))));
    let mut bad = EstimatorConfig::shots(0);
    assert!(run_vqe(&h, &two, &slsqp(), &bad, 1, 0).is_err());
    bad.mode = EstimatorMode::Noisy;
    bad.shots = Some(10);
    assert!(matches!(bad.validate(), Err(Error::Spec(_))));
    let mut sv_shots = EstimatorConfig::statevector();
    sv_shots.shots = Some(10);
    assert!(sv_shots.validate().is_err());
    let snap = bundled_snapshot("toronto-like").unwrap();
    let mut shots_snap = EstimatorConfig::shots(10);
    shots_snap.snapshot = Some(snap);
    assert!(shots_snap.validate().is_err());
    assert_eq!("noisy".parse::<EstimatorMode>().unwrap(), EstimatorMode::Noisy);
    assert!("qasm".parse::<EstimatorMode>().is_err());
}

#[test]
fn mae_examples() {
    assert_eq!(mae_spread(&[-1.0], -1.0).unwrap(), (0.0, 0.0));
    let (mae, spread) = mae_spread(&[-1.001, -0.999], -1.0).unwrap();
    assert!((mae - 0.001).abs() < 1e-12 && spread.abs() < 1e-12);
    assert!(mae_spread(&[], 0.0).is_err());
    assert!(mae_report(&[], 0.0).is_err());
    // Two errors 0.1 and 0.3: mean 0.2, sample deviation √0.02.
    let (mae, spread) = mae_spread(&[0.1, -0.3], 0.0).unwrap();
    assert!((mae - 0.2).abs() < 1e-15 && (spread - 0.02f64.sqrt()).abs() < 1e-15);
}

#[test]
fn grouped_formatting() {
    assert_eq!(format_mae(0.00292, 0.0), "0.002 92 ± 0.000 000");
    assert_eq!(format_mae(0.59508, 0.000031), "0.595 08 ± 0.000 031");
    assert_eq!(format_grouped(-477.79905, 5), "-477.799 05");
    assert_eq!(format_grouped(1234567.5, 1), "1 234 567.5");
    assert_eq!(format_grouped(0.1369, 4), "0.136 9");
    assert_eq!(format_grouped(-0.0000001, 3), "0.000");
    assert_eq!(format_grouped(12.0, 0), "12");
}

#[test]
fn result_serializes() {
    let h = PauliSum::from_labels(&[("Z", 1.0)]).unwrap();
    let ansatz = AnsatzSpec::new(AnsatzKind::Circuit1, 1, 1);
    let r = run_vqe(&h, &ansatz, &slsqp(), &EstimatorConfig::statevector(), 2, 0).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: VqeResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.evaluations(), r.restarts.iter().map(|x| x.trace.len()).sum::<usize>());
}
