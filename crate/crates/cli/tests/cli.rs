use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqe-bench")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_sweep(dir: &Path, hamiltonian_terms: &str, axes: &str) -> PathBuf {
    let n = hamiltonian_terms.split('"').nth(1).unwrap().len();
    let h = format!(
        r#"{{"format": "vqe-hamiltonian", "version": 1, "n_qubits": {n}, "terms": {hamiltonian_terms}, "metadata": {{"system": "t"}}}}"#
    );
    fs::write(dir.join("h.json"), h).unwrap();
    let sweep = format!(
        r#"{{"hamiltonians": ["h.json"], "axes": {axes}, "restarts": 1, "seed": 4,
            "defaults": {{"ansatz": "real_amplitudes", "shots": 128, "optimizer": {{"kind": "cobyla", "max_iterations": 40}}}}}}"#
    );
    let path = dir.join("sweep.json");
    fs::write(&path, sweep).unwrap();
    path
}

#[test]
fn validate_reports_kind_and_rejects_bad_files() {
    for (name, kind) in [
        ("sweeps/grid.json", "sweep"),
        ("hamiltonians/toy-3q.json", "Hamiltonian"),
        ("integrals/h2-sto3g.fcidump", "FCIDUMP"),
        ("tokyo-like.json", "snapshot"),
        ("scan/series.json", "series"),
    ] {
        let o = bench(&["validate", data(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}");
        assert!(stdout(&o).contains(kind), "{name}: {}", stdout(&o));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"format": "vqe-hamiltonian", "version": 1, "n_qubits": 2, "terms": [["ZQ", 1.0, 0.0]]}"#).unwrap();
    let o = bench(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("terms[0]"));
    assert_eq!(bench(&["run", "--sweep", "x.json", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(bench(&["run", "--sweep", "/nonexistent/sweep.json"]).status.code(), Some(1));
}

#[test]
fn exact_prints_the_ground_energy() {
    let o = bench(&["exact", "--hamiltonian", data("scan/toy-d0.26.json").to_str().unwrap()]);
    assert!(o.status.success());
    let e: f64 = stdout(&o).trim().parse().unwrap();
    assert!((e + 1.0).abs() < 1e-12);
    let o = bench(&["exact", "--hamiltonian", data("scan/toy-d0.26.json").to_str().unwrap(), "--unit", "ev"]);
    let e: f64 = stdout(&o).trim().parse().unwrap();
    assert!((e + 27.2114).abs() < 1e-9);
    let o = bench(&["exact", "--integrals", data("integrals/h2-sto3g.fcidump").to_str().unwrap()]);
    let e: f64 = stdout(&o).trim().parse().unwrap();
    assert!((e + 1.1373).abs() < 5e-4, "{e}");
}

#[test]
fn run_writes_deterministic_rows() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = write_sweep(dir.path(), r#"[["ZZ", -1.0, 0.0], ["XI", 0.2, 0.0]]"#, r#"{"estimator": ["statevector", "shots"]}"#);
    let s = sweep.to_str().unwrap();
    let a = bench(&["run", "--sweep", s, "--workers", "1"]);
    let b = bench(&["run", "--sweep", s, "--workers", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(13);
                f.join(",")
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a).len(), 3);
    let c = bench(&["run", "--sweep", s, "--seed", "5"]);
    assert_ne!(strip(&a), strip(&c));
    let json = bench(&["run", "--sweep", s, "--format", "json", "--unit", "ev"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(doc["unit"], "ev");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    let out = dir.path().join("rows.csv");
    let table = bench(&["run", "--sweep", s, "--format", "table", "--output", out.to_str().unwrap()]);
    assert!(table.status.success() && stdout(&table).is_empty());
    assert!(fs::read_to_string(out).unwrap().contains(" ± "));
}

#[test]
fn partial_failures_exit_two_with_rows() {
    let dir = tempfile::tempdir().unwrap();
    // Nine qubits exceed every bundled snapshot; the noisy cell fails.
    let sweep = write_sweep(dir.path(), r#"[["ZZZZZZZZZ", 1.0, 0.0]]"#, r#"{"estimator": ["statevector", "noisy"]}"#);
    let o = bench(&["run", "--sweep", sweep.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().contains("dimension"));
}

#[test]
fn scan_emits_two_columns() {
    let o = bench(&["scan", "--series", data("scan/series.json").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("distance_nm,energy_hartree"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (d, e) = l.split_once(',').unwrap();
            (d.parse().unwrap(), e.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.json");
    let one = format!(
        r#"{{"points": [{{"distance_nm": 0.1, "hamiltonian": "{0}"}}, {{"distance_nm": 0.1, "hamiltonian": "{0}"}}]}}"#,
        data("scan/toy-d0.20.json").display()
    );
    fs::write(&series, one).unwrap();
    assert_eq!(bench(&["scan", "--series", series.to_str().unwrap()]).status.code(), Some(1));
}
