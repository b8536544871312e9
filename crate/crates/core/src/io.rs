//! File formats: native Hamiltonian and integral documents, FCIDUMP.
//!
//! The native formats are versioned JSON. Pauli labels are written with the
//! leftmost character on the highest qubit and stored little-endian once
//! loaded (see [`PauliString::from_label`]).

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{Convention, IntegralSet, INTEGRAL_SYMMETRY_TOL};
use crate::pauli::{PauliString, PauliSum};
use crate::statevector::EXPECTATION_IMAG_TOL;

pub const HAMILTONIAN_FORMAT: &str = "vqe-hamiltonian";
pub const INTEGRALS_FORMAT: &str = "vqe-integrals";
pub const FORMAT_VERSION: u32 = 1;

/// Descriptive fields carried alongside a Hamiltonian or integral set.
/// Unknown keys are kept verbatim.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_space: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Metadata {
    /// Display label: the system name, or `fallback`.
    pub fn label_or(&self, fallback: &str) -> String {
        self.system.clone().unwrap_or_else(|| fallback.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianDoc {
    format: String,
    version: u32,
    n_qubits: usize,
    /// `[label, re, im]`.
    terms: Vec<(String, f64, f64)>,
    #[serde(default)]
    metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianFile {
    pub hamiltonian: PauliSum,
    pub metadata: Metadata,
}

fn json_error(what: &str, e: serde_json::Error) -> Error {
    Error::parse(format!("{what} line {} column {}", e.line(), e.column()), e.to_string())
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::parse("format", format!("expected \"{expected}\", got \"{format}\"")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            "version",
            format!("unknown version {version} (this build reads version {FORMAT_VERSION})"),
        ));
    }
    Ok(())
}

/// Parses a native Hamiltonian document.
pub fn read_hamiltonian(text: &str) -> Result<HamiltonianFile> {
    let doc: HamiltonianDoc = serde_json::from_str(text).map_err(|e| json_error("hamiltonian", e))?;
    check_header(&doc.format, doc.version, HAMILTONIAN_FORMAT)?;
    let mut h = PauliSum::zero(doc.n_qubits).map_err(|e| Error::parse("n_qubits", e.to_string()))?;
    for (i, (label, re, im)) in doc.terms.iter().enumerate() {
        let at = format!("terms[{i}]");
        if label.chars().count() != doc.n_qubits {
            return Err(Error::parse(
                at,
                format!("label \"{label}\" has {} characters, expected {}", label.chars().count(), doc.n_qubits),
            ));
        }
        let p = PauliString::from_label(label).map_err(|e| match e {
            Error::Parse { location, message } => Error::parse(format!("{at}: {location}"), message),
            other => other,
        })?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::parse(at, "coefficient is not finite"));
        }
        h.add_term(p, Complex64::new(*re, *im))?;
    }
    h.check_hermitian(EXPECTATION_IMAG_TOL)?;
    Ok(HamiltonianFile {
        hamiltonian: h,
        metadata: doc.metadata,
    })
}

pub fn read_hamiltonian_file(path: &Path) -> Result<HamiltonianFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_hamiltonian(&text).map_err(|e| in_file(path, e))
}

pub(crate) fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    }
}

/// Canonical document: terms sorted by label, duplicates merged.
pub fn write_hamiltonian(h: &PauliSum, metadata: &Metadata) -> String {
    let mut terms: Vec<(String, f64, f64)> = h.terms().map(|(p, c)| (p.to_label(), c.re, c.im)).collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let doc = HamiltonianDoc {
        format: HAMILTONIAN_FORMAT.into(),
        version: FORMAT_VERSION,
        n_qubits: h.n_qubits(),
        terms,
        metadata: metadata.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegralsDoc {
    format: String,
    version: u32,
    n_spin_orbitals: usize,
    #[serde(default)]
    core_energy: f64,
    /// `[p, q, value]`.
    #[serde(default)]
    one_body: Vec<(usize, usize, f64)>,
    /// `[p, q, r, s, value]` in the convention passed to the reader.
    #[serde(default)]
    two_body: Vec<(usize, usize, usize, usize, f64)>,
    #[serde(default)]
    metadata: Metadata,
}

/// Reads spin-orbital integrals, native JSON or FCIDUMP (detected by its
/// `&FCI` header). Two-body indices are read in `convention` and stored in
/// physicist order; FCIDUMP files are always chemist-ordered over spatial
/// orbitals and ignore `convention`.
pub fn read_integrals(text: &str, convention: Convention) -> Result<IntegralSet> {
    let ints = if text.trim_start().starts_with('&') {
        read_fcidump(text)?
    } else {
        read_native_integrals(text, convention)?
    };
    ints.validate(INTEGRAL_SYMMETRY_TOL)?;
    Ok(ints)
}

pub fn read_integrals_file(path: &Path, convention: Convention) -> Result<IntegralSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_integrals(&text, convention).map_err(|e| in_file(path, e))
}

fn metadata_to_strings(m: &Metadata) -> BTreeMap<String, String> {
    match serde_json::to_value(m).expect("metadata serializes") {
        serde_json::Value::Object(map) => map
            .into_iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => (k, s),
                other => (k, other.to_string()),
            })
            .collect(),
        _ => BTreeMap::new(),
    }
}

fn strings_to_metadata(m: &BTreeMap<String, String>) -> Metadata {
    let map: serde_json::Map<String, serde_json::Value> = m
        .iter()
        .map(|(k, v)| {
            let value = if k == "charge" {
                v.parse::<i64>().map_or_else(|_| v.clone().into(), Into::into)
            } else {
                v.clone().into()
            };
            (k.clone(), value)
        })
        .collect();
    serde_json::from_value(serde_json::Value::Object(map)).unwrap_or_default()
}

fn read_native_integrals(text: &str, convention: Convention) -> Result<IntegralSet> {
    let doc: IntegralsDoc = serde_json::from_str(text).map_err(|e| json_error("integrals", e))?;
    check_header(&doc.format, doc.version, INTEGRALS_FORMAT)?;
    let n = doc.n_spin_orbitals;
    if n == 0 || n % 2 != 0 {
        // Shape checks need the size first; the message is the builder's.
        return Err(IntegralSet::zeros(n).validate(INTEGRAL_SYMMETRY_TOL).unwrap_err());
    }
    let mut ints = IntegralSet::zeros(n);
    ints.core_energy = doc.core_energy;
    ints.metadata = metadata_to_strings(&doc.metadata);
    let mut seen = std::collections::HashSet::new();
    for (i, &(p, q, v)) in doc.one_body.iter().enumerate() {
        if p >= n || q >= n {
            return Err(Error::parse(format!("one_body[{i}]"), format!("index out of range for {n} spin orbitals")));
        }
        if !seen.insert((p, q, usize::MAX, usize::MAX)) {
            return Err(Error::parse(format!("one_body[{i}]"), format!("duplicate entry ({p}, {q})")));
        }
        ints.h1[p][q] = v;
    }
    let mut chem = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for (i, &(p, q, r, s, v)) in doc.two_body.iter().enumerate() {
        if [p, q, r, s].iter().any(|&k| k >= n) {
            return Err(Error::parse(format!("two_body[{i}]"), format!("index out of range for {n} spin orbitals")));
        }
        if !seen.insert((p, q, r, s)) {
            return Err(Error::parse(format!("two_body[{i}]"), format!("duplicate entry ({p}, {q}, {r}, {s})")));
        }
        match convention {
            Convention::Physicist => ints.h2[p][q][r][s] = v,
            Convention::Chemist => chem[p][q][r][s] = v,
        }
    }
    if convention == Convention::Chemist {
        ints.h2 = IntegralSet::chemist_to_physicist(&chem);
    }
    Ok(ints)
}

/// Native document with physicist-ordered two-body entries (read it back
/// with [`Convention::Physicist`]); zeros are omitted.
pub fn write_integrals(ints: &IntegralSet) -> String {
    let n = ints.n_spin_orbitals;
    let mut one_body = Vec::new();
    let mut two_body = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if ints.h1[p][q] != 0.0 {
                one_body.push((p, q, ints.h1[p][q]));
            }
            for r in 0..n {
                for s in 0..n {
                    let v = ints.h2[p][q][r][s];
                    if v != 0.0 {
                        two_body.push((p, q, r, s, v));
                    }
                }
            }
        }
    }
    let doc = IntegralsDoc {
        format: INTEGRALS_FORMAT.into(),
        version: FORMAT_VERSION,
        n_spin_orbitals: n,
        core_energy: ints.core_energy,
        one_body,
        two_body,
        metadata: strings_to_metadata(&ints.metadata),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

/// Splits the `&FCI … &END` (or `/`) namelist into key → raw value.
fn fcidump_header(text: &str) -> Result<(BTreeMap<String, String>, usize)> {
    let mut header = String::new();
    let mut body_start = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        let done = t.eq_ignore_ascii_case("&END") || t == "/" || t.ends_with("&END") || t.ends_with('/');
        header.push_str(t.trim_end_matches("&END").trim_end_matches('/'));
        header.push(' ');
        if done {
            body_start = Some(i + 1);
            break;
        }
    }
    let body_start = body_start.ok_or_else(|| Error::parse("FCIDUMP header", "missing &END"))?;
    let header = header.trim_start();
    let header = header
        .strip_prefix("&FCI")
        .or_else(|| header.strip_prefix("&fci"))
        .ok_or_else(|| Error::parse("line 1", "expected &FCI"))?;
    // KEY=value pairs; values may be comma-separated lists.
    let mut fields = BTreeMap::new();
    let mut key: Option<String> = None;
    let mut value = String::new();
    for token in header.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let (k, v) = match token.split_once('=') {
            Some((k, v)) => (Some(k.trim().to_ascii_uppercase()), v.trim()),
            None => (None, token),
        };
        if let Some(k) = k {
            if let Some(prev) = key.take() {
                fields.insert(prev, value.trim_end_matches(',').to_string());
            }
            key = Some(k);
            value.clear();
        }
        if !v.is_empty() {
            value.push_str(v);
            value.push(',');
        }
    }
    if let Some(prev) = key {
        fields.insert(prev, value.trim_end_matches(',').to_string());
    }
    Ok((fields, body_start))
}

fn set_symmetric(slot: &mut f64, v: f64, line: usize) -> Result<()> {
    if *slot != 0.0 && (*slot - v).abs() > INTEGRAL_SYMMETRY_TOL {
        return Err(Error::Integral(format!(
            "line {line}: value {v} contradicts a symmetry-equivalent entry {slot}"
        )));
    }
    *slot = v;
    Ok(())
}

/// FCIDUMP over `NORB` spatial orbitals, expanded to `2·NORB` interleaved
/// spin orbitals (`2i` up, `2i + 1` down). Records are `value i j k l`
/// with 1-based chemist indices; `k = l = 0` marks one-body terms and all
/// zeros the core energy. Orbital-energy records (`i 0 0 0`) are skipped.
pub fn read_fcidump(text: &str) -> Result<IntegralSet> {
    let (fields, body_start) = fcidump_header(text)?;
    let norb: usize = fields
        .get("NORB")
        .ok_or_else(|| Error::parse("FCIDUMP header", "missing NORB"))?
        .parse()
        .map_err(|_| Error::parse("FCIDUMP header NORB", "not an integer"))?;
    if norb == 0 {
        return Err(Error::parse("FCIDUMP header NORB", "must be positive"));
    }
    if let Some(uhf) = fields.get("UHF") {
        if uhf.to_ascii_uppercase().contains('T') {
            return Err(Error::parse("FCIDUMP header UHF", "unrestricted integrals are not supported"));
        }
    }
    let mut h = vec![vec![0.0; norb]; norb];
    let mut eri = vec![vec![vec![vec![0.0; norb]; norb]; norb]; norb];
    let mut core = 0.0;
    for (offset, line) in text.lines().skip(body_start).enumerate() {
        let lineno = body_start + offset + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(Error::parse(format!("line {lineno}"), format!("expected 5 fields, got {}", parts.len())));
        }
        let v: f64 = parts[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::parse(format!("line {lineno}"), format!("bad value \"{}\"", parts[0])))?;
        let mut idx = [0usize; 4];
        for (k, s) in parts[1..].iter().enumerate() {
            idx[k] = s
                .parse()
                .map_err(|_| Error::parse(format!("line {lineno}"), format!("bad index \"{s}\"")))?;
            if idx[k] > norb {
                return Err(Error::parse(format!("line {lineno}"), format!("index {} exceeds NORB = {norb}", idx[k])));
            }
        }
        match idx {
            [0, 0, 0, 0] => core += v,
            [_, 0, 0, 0] => {}
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (i, j) = (i - 1, j - 1);
                set_symmetric(&mut h[i][j], v, lineno)?;
                set_symmetric(&mut h[j][i], v, lineno)?;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
                for (a, b, c, d) in [
                    (i, j, k, l),
                    (j, i, k, l),
                    (i, j, l, k),
                    (j, i, l, k),
                    (k, l, i, j),
                    (l, k, i, j),
                    (k, l, j, i),
                    (l, k, j, i),
                ] {
                    set_symmetric(&mut eri[a][b][c][d], v, lineno)?;
                }
            }
            _ => return Err(Error::parse(format!("line {lineno}"), format!("malformed index pattern {idx:?}"))),
        }
    }
    let n = 2 * norb;
    let mut ints = IntegralSet::zeros(n);
    ints.core_energy = core;
    let mut chem = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..norb {
        for j in 0..norb {
            for s in 0..2 {
                ints.h1[2 * i + s][2 * j + s] = h[i][j];
            }
            for k in 0..norb {
                for l in 0..norb {
                    for s in 0..2 {
                        for t in 0..2 {
                            chem[2 * i + s][2 * j + s][2 * k + t][2 * l + t] = eri[i][j][k][l];
                        }
                    }
                }
            }
        }
    }
    ints.h2 = IntegralSet::chemist_to_physicist(&chem);
    ints.metadata = fields.into_iter().map(|(k, v)| (format!("fcidump.{}", k.to_ascii_lowercase()), v)).collect();
    Ok(ints)
}

/// Writes a spin-restricted set as FCIDUMP, one record per symmetry-unique
/// nonzero integral. Fails if the set is not spin-restricted.
pub fn write_fcidump(ints: &IntegralSet) -> Result<String> {
    let n = ints.n_spin_orbitals;
    if n % 2 != 0 {
        return Err(Error::Constraint(format!("{n} spin orbitals cannot come from spatial orbitals")));
    }
    let norb = n / 2;
    // Reconstruct spatial integrals and check every spin block matches.
    let mut recon = IntegralSet::zeros(n);
    recon.core_energy = ints.core_energy;
    let mut chem = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    let spatial_h = |i: usize, j: usize| ints.h1[2 * i][2 * j];
    // (ij|kl) = ⟨ik|jl⟩ on the up-up block.
    let spatial_eri = |i: usize, j: usize, k: usize, l: usize| ints.h2[2 * i][2 * k][2 * j][2 * l];
    for i in 0..norb {
        for j in 0..norb {
            for s in 0..2 {
                recon.h1[2 * i + s][2 * j + s] = spatial_h(i, j);
            }
            for k in 0..norb {
                for l in 0..norb {
                    for s in 0..2 {
                        for t in 0..2 {
                            chem[2 * i + s][2 * j + s][2 * k + t][2 * l + t] = spatial_eri(i, j, k, l);
                        }
                    }
                }
            }
        }
    }
    recon.h2 = IntegralSet::chemist_to_physicist(&chem);
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= INTEGRAL_SYMMETRY_TOL);
    let flat2 = |m: &Vec<Vec<Vec<Vec<f64>>>>| m.iter().flatten().flatten().flatten().copied().collect::<Vec<f64>>();
    let flat1 = |m: &Vec<Vec<f64>>| m.iter().flatten().copied().collect::<Vec<f64>>();
    if !close(&flat1(&ints.h1), &flat1(&recon.h1)) || !close(&flat2(&ints.h2), &flat2(&recon.h2)) {
        return Err(Error::Integral("integrals are not spin-restricted; FCIDUMP cannot represent them".into()));
    }
    let nelec = ints.metadata.get("fcidump.nelec").cloned().unwrap_or_else(|| norb.to_string());
    let ms2 = ints.metadata.get("fcidump.ms2").cloned().unwrap_or_else(|| "0".into());
    let mut out = format!(" &FCI NORB={norb},NELEC={nelec},MS2={ms2},\n  ORBSYM={}\n  ISYM=1,\n &END\n", vec!["1"; norb].join(","));
    let record = |v: f64, i: usize, j: usize, k: usize, l: usize| format!("{v:24.16E} {i:4} {j:4} {k:4} {l:4}\n");
    for i in 0..norb {
        for j in 0..=i {
            for k in 0..norb {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = spatial_eri(i, j, k, l);
                    if v != 0.0 {
                        out.push_str(&record(v, i + 1, j + 1, k + 1, l + 1));
                    }
                }
            }
        }
    }
    for i in 0..norb {
        for j in 0..=i {
            let v = spatial_h(i, j);
            if v != 0.0 {
                out.push_str(&record(v, i + 1, j + 1, 0, 0));
            }
        }
    }
    out.push_str(&record(ints.core_energy, 0, 0, 0, 0));
    Ok(out)
}

/// Path of a fixture shipped in the crate's `data` directory.
pub fn fixture_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[cfg(test)]
mod tests;
