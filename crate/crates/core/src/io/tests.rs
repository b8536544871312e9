use super::*;
use crate::exact::tests::random_hermitian_sum;
use crate::exact::{dense_matrix, eigh, ground_energy, DenseMatrix};
use crate::fermion::build_hamiltonian;
use crate::pauli::Pauli;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn doc(n: usize, terms: &str) -> String {
    format!(r#"{{"format":"vqe-hamiltonian","version":1,"n_qubits":{n},"terms":[{terms}]}}"#)
}

#[test]
fn single_z() {
    let f = read_hamiltonian(&doc(1, r#"["Z", 1.0, 0.0]"#)).unwrap();
    assert_eq!(f.hamiltonian, PauliSum::from_labels(&[("Z", 1.0)]).unwrap());
}

#[test]
fn labels_are_big_endian_in_files() {
    let f = read_hamiltonian(&doc(2, r#"["XI", 0.5, 0.0]"#)).unwrap();
    let (p, _) = f.hamiltonian.terms().next().unwrap();
    assert_eq!(p.op(1), Pauli::X);
    assert_eq!(p.op(0), Pauli::I);
    let h = PauliSum::from_terms(2, [(PauliString::single(2, 0, Pauli::Y).unwrap(), Complex64::new(1.0, 0.0))]).unwrap();
    assert!(write_hamiltonian(&h, &Metadata::default()).contains("\"IY\""));
}

#[test]
fn parse_errors_name_their_location() {
    let err = read_hamiltonian(&doc(2, r#"["ZZ", 1.0, 0.0], ["XW", 1.0, 0.0]"#)).unwrap_err();
    match err {
        Error::Parse { location, message } => {
            assert!(location.starts_with("terms[1]") && location.contains("character 1"), "{location}");
            assert!(message.contains('W'));
        }
        other => panic!("{other}"),
    }
    let err = read_hamiltonian(&doc(3, r#"["ZZ", 1.0, 0.0]"#)).unwrap_err();
    assert!(matches!(err, Error::Parse { ref location, .. } if location == "terms[0]"), "{err}");
    let v2 = r#"{"format":"vqe-hamiltonian","version":2,"n_qubits":1,"terms":[]}"#;
    assert!(matches!(read_hamiltonian(v2).unwrap_err(), Error::Parse { ref location, .. } if location == "version"));
    let other = r#"{"format":"qiskit","version":1,"n_qubits":1,"terms":[]}"#;
    assert!(matches!(read_hamiltonian(other).unwrap_err(), Error::Parse { ref location, .. } if location == "format"));
    let extra = r#"{"format":"vqe-hamiltonian","version":1,"n_qubits":1,"terms":[],"shots":3}"#;
    assert!(matches!(read_hamiltonian(extra).unwrap_err(), Error::Parse { ref message, .. } if message.contains("shots")));
    let broken = "{\n\"format\": \"vqe-hamiltonian\",\n\"version\": 1,,\n}";
    assert!(matches!(read_hamiltonian(broken).unwrap_err(), Error::Parse { ref location, .. } if location.contains("line 3")));
    assert!(matches!(
        read_hamiltonian(&doc(1, r#"["Y", 0.0, 1.0]"#)).unwrap_err(),
        Error::Observable { .. }
    ));
}

#[test]
fn metadata_is_preserved() {
    let text = r#"{"format":"vqe-hamiltonian","version":1,"n_qubits":1,"terms":[["Z",1.0,0.0]],
        "metadata":{"system":"Al2","basis":"sto-3g","charge":0,"active_space":"(2e, 2o)",
        "geometry":"Al 0 0 0; Al 0 0 0.26 nm","note":{"source":"hand"}}}"#;
    let f = read_hamiltonian(text).unwrap();
    assert_eq!(f.metadata.system.as_deref(), Some("Al2"));
    assert_eq!(f.metadata.charge, Some(0));
    assert_eq!(f.metadata.extra["note"]["source"], "hand");
    let again = read_hamiltonian(&write_hamiltonian(&f.hamiltonian, &f.metadata)).unwrap();
    assert_eq!(again, f);
}

#[test]
fn canonical_round_trip_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..25 {
        let n = 1 + case % 5;
        let h = random_hermitian_sum(&mut rng, n, 8);
        // A scrambled document: shuffled terms, some split in two halves.
        let mut terms: Vec<String> = Vec::new();
        for (p, c) in h.terms() {
            if rng.gen_bool(0.3) {
                let a = c.re * 0.25;
                terms.push(format!(r#"["{}", {a:?}, 0.0]"#, p.to_label()));
                terms.push(format!(r#"["{}", {:?}, 0.0]"#, p.to_label(), c.re - a));
            } else {
                terms.push(format!(r#"["{}", {:?}, 0.0]"#, p.to_label(), c.re));
            }
        }
        terms.shuffle(&mut rng);
        let scrambled = read_hamiltonian(&doc(n, &terms.join(","))).unwrap();
        let canonical = write_hamiltonian(&scrambled.hamiltonian, &scrambled.metadata);
        let reread = read_hamiltonian(&canonical).unwrap();
        assert_eq!(write_hamiltonian(&reread.hamiltonian, &reread.metadata), canonical);
        for (p, c) in h.terms() {
            assert!((reread.hamiltonian.coefficient(p) - c).norm() < 1e-15);
        }
    }
}

fn native_integrals(n: usize, one: &str, two: &str) -> String {
    format!(r#"{{"format":"vqe-integrals","version":1,"n_spin_orbitals":{n},"one_body":[{one}],"two_body":[{two}]}}"#)
}

#[test]
fn filled_two_level_system() {
    let ints = read_integrals(&native_integrals(2, "[0,0,-1.0],[1,1,-1.0]", ""), Convention::Physicist).unwrap();
    let e = ground_energy(&build_hamiltonian(&ints).unwrap()).unwrap();
    assert!((e + 2.0).abs() < 1e-12);
}

#[test]
fn integral_errors() {
    let asym = native_integrals(2, "[0,1,0.5],[1,0,0.4]", "");
    assert!(matches!(read_integrals(&asym, Convention::Physicist), Err(Error::Integral(_))));
    let odd = native_integrals(3, "[0,0,-1.0]", "");
    match read_integrals(&odd, Convention::Physicist) {
        Err(Error::Constraint(m)) => assert!(m.contains("even")),
        other => panic!("{other:?}"),
    }
    let dup = native_integrals(2, "[0,0,-1.0],[0,0,-1.0]", "");
    assert!(matches!(read_integrals(&dup, Convention::Physicist), Err(Error::Parse { ref location, .. }) if location == "one_body[1]"));
    let range = native_integrals(2, "", "[0,0,0,2,1.0]");
    assert!(matches!(read_integrals(&range, Convention::Chemist), Err(Error::Parse { ref location, .. }) if location == "two_body[0]"));
    // A lone ⟨01|01⟩ lacks its ⟨10|10⟩ partner.
    let half = native_integrals(2, "", "[0,1,0,1,0.3]");
    assert!(matches!(read_integrals(&half, Convention::Physicist), Err(Error::Integral(_))));
}

/// Fock-space matrix of `E_core + Σ h a†a + ½ Σ ⟨pq|rs⟩ a†p a†q a_s a_r`
/// built from occupation bitstrings.
fn fock_oracle(ints: &IntegralSet) -> Vec<f64> {
    let n = ints.n_spin_orbitals;
    let dim = 1usize << n;
    // a†_p / a_p on a determinant: sign from occupied modes below p.
    let ladder = |state: usize, p: usize, create: bool| -> Option<(usize, f64)> {
        let occupied = state >> p & 1 == 1;
        if occupied == create {
            return None;
        }
        let sign = if (state & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Some((state ^ (1 << p), sign))
    };
    let apply = |state: usize, ops: &[(usize, bool)]| -> Option<(usize, f64)> {
        let mut s = state;
        let mut sign = 1.0;
        for &(p, create) in ops.iter().rev() {
            let (t, g) = ladder(s, p, create)?;
            s = t;
            sign *= g;
        }
        Some((s, sign))
    };
    let mut m = DenseMatrix::zeros(dim);
    for j in 0..dim {
        m[(j, j)] += Complex64::new(ints.core_energy, 0.0);
        for p in 0..n {
            for q in 0..n {
                if let Some((i, s)) = apply(j, &[(p, true), (q, false)]) {
                    m[(i, j)] += Complex64::new(s * ints.h1[p][q], 0.0);
                }
                for r in 0..n {
                    for t in 0..n {
                        let v = ints.h2[p][q][r][t];
                        if v == 0.0 {
                            continue;
                        }
                        if let Some((i, s)) = apply(j, &[(p, true), (q, true), (t, false), (r, false)]) {
                            m[(i, j)] += Complex64::new(0.5 * s * v, 0.0);
                        }
                    }
                }
            }
        }
    }
    eigh(&m, false).0
}

fn two_body_fixture() -> IntegralSet {
    // Two spatial orbitals, chemist entries listed with all their partners.
    let mut chem = vec![vec![vec![vec![0.0; 4]; 4]; 4]; 4];
    let spatial = [
        ((0, 0, 0, 0), 0.61),
        ((1, 1, 1, 1), 0.64),
        ((0, 0, 1, 1), 0.59),
        ((0, 1, 0, 1), 0.17),
        ((0, 0, 0, 1), 0.05),
        ((0, 1, 1, 1), -0.03),
    ];
    for &((i, j, k, l), v) in &spatial {
        for (a, b, c, d) in [(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k), (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)] {
            for s in 0..2 {
                for t in 0..2 {
                    chem[2 * a + s][2 * b + s][2 * c + t][2 * d + t] = v;
                }
            }
        }
    }
    let mut ints = IntegralSet::zeros(4);
    for (i, j, v) in [(0, 0, -1.2), (1, 1, -0.5), (0, 1, 0.1), (1, 0, 0.1)] {
        for s in 0..2 {
            ints.h1[2 * i + s][2 * j + s] = v;
        }
    }
    ints.h2 = IntegralSet::chemist_to_physicist(&chem);
    ints.core_energy = 0.7;
    ints
}

#[test]
fn two_body_fixture_matches_fock_oracle() {
    let ints = two_body_fixture();
    ints.validate(INTEGRAL_SYMMETRY_TOL).unwrap();
    let text = write_integrals(&ints);
    let back = read_integrals(&text, Convention::Physicist).unwrap();
    assert_eq!(back, ints);
    let oracle = fock_oracle(&ints);
    let h = build_hamiltonian(&back).unwrap();
    let e = eigh(&dense_matrix(&h).unwrap(), false).0;
    for (a, b) in e.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert!((ground_energy(&h).unwrap() - oracle[0]).abs() < 1e-8);
    // The same tensor written in chemist order reads back identically.
    let fcidump = write_fcidump(&ints).unwrap();
    assert_eq!(read_integrals(&fcidump, Convention::Physicist).unwrap().h2, ints.h2);
}

#[test]
fn chemist_and_physicist_inputs_agree() {
    let ints = two_body_fixture();
    let n = 4;
    let mut chem_entries = Vec::new();
    let mut phys_entries = Vec::new();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.h2[p][q][r][s];
                    if v != 0.0 {
                        phys_entries.push(format!("[{p},{q},{r},{s},{v:?}]"));
                        // ⟨pq|rs⟩ = (pr|qs)
                        chem_entries.push(format!("[{p},{r},{q},{s},{v:?}]"));
                    }
                }
            }
        }
    }
    let a = read_integrals(&native_integrals(4, "", &phys_entries.join(",")), Convention::Physicist).unwrap();
    let b = read_integrals(&native_integrals(4, "", &chem_entries.join(",")), Convention::Chemist).unwrap();
    assert_eq!(a.h2, b.h2);
    assert_eq!(a.h2, ints.h2);
}

#[test]
fn h2_fcidump_matches_two_determinant_ci() {
    let ints = read_integrals_file(&fixture_path("integrals/h2-sto3g.fcidump"), Convention::Chemist).unwrap();
    assert_eq!(ints.n_spin_orbitals, 4);
    assert_eq!(ints.metadata["fcidump.nelec"], "2");
    let e = ground_energy(&build_hamiltonian(&ints).unwrap()).unwrap();
    // Singlet CI between σg² and σu²: [[2h₁₁ + J₁₁, K], [K, 2h₂₂ + J₂₂]].
    let (h11, h22, j11, j22, k12, nuc): (f64, f64, f64, f64, f64, f64) = (-1.2528, -0.4756, 0.6746, 0.6975, 0.1813, 1.0 / 1.4);
    let a = 2.0 * h11 + j11;
    let d = 2.0 * h22 + j22;
    let ci = (a + d) / 2.0 - (((a - d) / 2.0).powi(2) + k12 * k12).sqrt() + nuc;
    assert!((e - ci).abs() < 1e-8, "{e} vs {ci}");
    // Textbook full-CI energy at 1.4 bohr.
    assert!((e + 1.1373).abs() < 5e-4);
}

#[test]
fn fcidump_round_trip_and_errors() {
    let text = std::fs::read_to_string(fixture_path("integrals/h2-sto3g.fcidump")).unwrap();
    let a = read_fcidump(&text).unwrap();
    let b = read_fcidump(&write_fcidump(&a).unwrap()).unwrap();
    assert_eq!(a.h1, b.h1);
    assert_eq!(a.h2, b.h2);
    assert_eq!(a.core_energy, b.core_energy);
    let c = read_fcidump(&write_fcidump(&b).unwrap()).unwrap();
    assert_eq!(b, c);

    let bad = text.replace("6.6360000000000000E-01", "6.636x");
    assert!(matches!(read_fcidump(&bad), Err(Error::Parse { ref location, .. }) if location == "line 7"));
    let wide = text.replace("    2    2    2    2", "    3    2    2    2");
    assert!(matches!(read_fcidump(&wide), Err(Error::Parse { .. })));
    let clash = format!("{text}  0.5 1 1 2 2\n");
    assert!(matches!(read_fcidump(&clash), Err(Error::Integral(_))));
    assert!(read_fcidump("&FCI NELEC=2 &END\n").is_err());
    let mut broken = a.clone();
    broken.h1[0][0] = -2.0;
    assert!(write_fcidump(&broken).is_err());
}

#[test]
fn bundled_fixtures_load() {
    let f = read_hamiltonian_file(&fixture_path("hamiltonians/toy-3q.json")).unwrap();
    assert_eq!(f.hamiltonian.n_qubits(), 3);
    assert_eq!(f.metadata.label_or("?"), "toy-3q");
    let missing = read_hamiltonian_file(Path::new("/nonexistent/h.json")).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }));
}
