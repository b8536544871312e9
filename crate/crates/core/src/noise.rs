//! Backend snapshots and noisy estimation.
//!
//! A [`BackendSnapshot`] carries per-gate depolarizing rates, per-qubit
//! readout flips and relaxation times. [`noisy_expectation`] samples Pauli
//! error trajectories from it; [`density_oracle`] evaluates the same channels
//! exactly on small registers.
//!
//! Channel conventions:
//! - depolarizing with rate `p` on `k` qubits is `ρ → (1 − p)ρ + p·I/2ᵏ`,
//!   i.e. with probability `p` a Pauli drawn uniformly from all `4ᵏ` strings
//!   (identity included) follows the gate;
//! - relaxation over the accumulated gate time `T` of a qubit is the
//!   Pauli-twirled amplitude and phase damping channel
//!   `p_x = p_y = (1 − e^{−T/T1})/4`, `p_z = (1 − e^{−T/T2})/2 − p_x`,
//!   applied once before readout;
//! - readout flips each measured bit independently (`p01`: 0 read as 1,
//!   `p10`: 1 read as 0).

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::rng::{substream, Purpose};
use crate::statevector::{
    even_parity_probability, parity_mean, Estimate, EstimateAccumulator, State, EXPECTATION_IMAG_TOL,
};

pub const MAX_DENSITY_QUBITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateError {
    pub gate: String,
    pub qubits: Vec<usize>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutError {
    pub qubit: usize,
    pub p01: f64,
    pub p10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDuration {
    pub gate: String,
    pub qubits: Vec<usize>,
    pub seconds: f64,
}

/// Calibration snapshot of a device. Gate names are matched
/// case-insensitively against [`GateKind::name`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSnapshot {
    pub name: String,
    pub n_qubits: usize,
    pub coupling_map: Vec<[usize; 2]>,
    pub basis_gates: Vec<String>,
    pub gate_errors: Vec<GateError>,
    pub readout_errors: Vec<ReadoutError>,
    pub gate_durations: Vec<GateDuration>,
    /// Seconds, one per qubit.
    pub t1: Vec<f64>,
    /// Seconds, one per qubit.
    pub t2: Vec<f64>,
}

pub const BUNDLED_SNAPSHOTS: [&str; 5] = [
    "sherbrooke-like",
    "manhattan-like",
    "toronto-like",
    "tokyo-like",
    "montreal-like",
];

/// Loads one of the illustrative snapshots shipped with the crate.
pub fn bundled_snapshot(name: &str) -> Result<BackendSnapshot> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    let text = match name {
        "sherbrooke-like" => include_str!("../data/sherbrooke-like.json"),
        "manhattan-like" => include_str!("../data/manhattan-like.json"),
        "toronto-like" => include_str!("../data/toronto-like.json"),
        "tokyo-like" => include_str!("../data/tokyo-like.json"),
        "montreal-like" => include_str!("../data/montreal-like.json"),
        _ => return Err(Error::Spec(format!("unknown bundled snapshot `{name}`"))),
    };
    load_snapshot(text)
}

/// Parses and validates a snapshot document (JSON).
pub fn load_snapshot(text: &str) -> Result<BackendSnapshot> {
    let snap: BackendSnapshot = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("snapshot line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    snap.validate()?;
    Ok(snap)
}

pub fn load_snapshot_file(path: &Path) -> Result<BackendSnapshot> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_snapshot(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

fn check_probability(field: String, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Physicality(format!("{field} = {p} is not a probability")));
    }
    Ok(())
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().all(|q| b.contains(q))
}

/// Lookup shared by error rates and durations: exact (gate, qubits), then
/// the mean over same-arity gates on the same qubit set, then the mean over
/// all gates of that arity, then zero.
fn lookup(entries: &[(&str, &[usize], f64)], kind: GateKind, qubits: &[usize]) -> f64 {
    if let Some(&(_, _, v)) = entries
        .iter()
        .find(|(g, q, _)| g.eq_ignore_ascii_case(kind.name()) && *q == qubits)
    {
        return v;
    }
    mean(entries.iter().filter(|(_, q, _)| same_set(q, qubits)).map(|e| e.2))
        .or_else(|| mean(entries.iter().filter(|(_, q, _)| q.len() == qubits.len()).map(|e| e.2)))
        .unwrap_or(0.0)
}

impl BackendSnapshot {
    /// A snapshot whose every rate is zero.
    pub fn noiseless(n_qubits: usize) -> Self {
        BackendSnapshot {
            name: "noiseless".into(),
            n_qubits,
            coupling_map: (1..n_qubits).map(|q| [q - 1, q]).collect(),
            basis_gates: GateKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            gate_errors: Vec::new(),
            readout_errors: Vec::new(),
            gate_durations: Vec::new(),
            t1: vec![1.0; n_qubits],
            t2: vec![1.0; n_qubits],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::Parse {
                location: "n_qubits".into(),
                message: "must be positive".into(),
            });
        }
        let in_range = |field: &str, qs: &[usize]| -> Result<()> {
            if let Some(q) = qs.iter().find(|&&q| q >= n) {
                return Err(Error::Parse {
                    location: field.into(),
                    message: format!("qubit {q} out of range for {n} qubits"),
                });
            }
            if qs.is_empty() || qs.len() > 2 || (qs.len() == 2 && qs[0] == qs[1]) {
                return Err(Error::Parse {
                    location: field.into(),
                    message: format!("expected one or two distinct qubits, got {qs:?}"),
                });
            }
            Ok(())
        };
        for (i, pair) in self.coupling_map.iter().enumerate() {
            in_range(&format!("coupling_map[{i}]"), pair)?;
        }
        for (i, e) in self.gate_errors.iter().enumerate() {
            in_range(&format!("gate_errors[{i}].qubits"), &e.qubits)?;
            check_probability(format!("gate_errors[{i}].p"), e.p)?;
        }
        for (i, d) in self.gate_durations.iter().enumerate() {
            in_range(&format!("gate_durations[{i}].qubits"), &d.qubits)?;
            if !(d.seconds >= 0.0 && d.seconds.is_finite()) {
                return Err(Error::Physicality(format!(
                    "gate_durations[{i}].seconds = {} must be non-negative",
                    d.seconds
                )));
            }
        }
        let mut seen = vec![false; n];
        for (i, r) in self.readout_errors.iter().enumerate() {
            in_range(&format!("readout_errors[{i}].qubit"), &[r.qubit])?;
            if std::mem::replace(&mut seen[r.qubit], true) {
                return Err(Error::Parse {
                    location: format!("readout_errors[{i}].qubit"),
                    message: format!("qubit {} listed twice", r.qubit),
                });
            }
            check_probability(format!("readout_errors[{i}].p01"), r.p01)?;
            check_probability(format!("readout_errors[{i}].p10"), r.p10)?;
        }
        for (field, times) in [("t1", &self.t1), ("t2", &self.t2)] {
            if times.len() != n {
                return Err(Error::Parse {
                    location: field.into(),
                    message: format!("expected {n} entries, got {}", times.len()),
                });
            }
            if let Some((q, t)) = times.iter().enumerate().find(|(_, t)| !(**t > 0.0 && t.is_finite())) {
                return Err(Error::Physicality(format!("{field}[{q}] = {t} must be positive")));
            }
        }
        for q in 0..n {
            if self.t2[q] > 2.0 * self.t1[q] {
                return Err(Error::Physicality(format!(
                    "t2[{q}] = {} exceeds 2·t1 = {}",
                    self.t2[q],
                    2.0 * self.t1[q]
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    /// Copy with every gate error multiplied by `k` (capped at 1).
    pub fn with_scaled_gate_errors(&self, k: f64) -> Self {
        let mut s = self.clone();
        s.gate_errors.iter_mut().for_each(|e| e.p = (e.p * k).min(1.0));
        s
    }

    pub fn gate_error(&self, kind: GateKind, qubits: &[usize]) -> f64 {
        let entries: Vec<_> = self.gate_errors.iter().map(|e| (e.gate.as_str(), e.qubits.as_slice(), e.p)).collect();
        lookup(&entries, kind, qubits)
    }

    pub fn gate_duration(&self, kind: GateKind, qubits: &[usize]) -> f64 {
        let entries: Vec<_> = self
            .gate_durations
            .iter()
            .map(|d| (d.gate.as_str(), d.qubits.as_slice(), d.seconds))
            .collect();
        lookup(&entries, kind, qubits)
    }

    /// `(p01, p10)` for qubit `q`; zero if the snapshot lists none.
    pub fn readout_error(&self, q: usize) -> (f64, f64) {
        self.readout_errors
            .iter()
            .find(|r| r.qubit == q)
            .map_or((0.0, 0.0), |r| (r.p01, r.p10))
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.coupling_map.iter().any(|p| same_set(p, &[a, b]))
    }
}

/// One noise process, in the form both estimators consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NoiseChannel {
    Depolarizing { qubits: Vec<usize>, p: f64 },
    /// Pauli-twirled relaxation on one qubit; identity takes the remainder.
    ThermalRelaxation { qubit: usize, px: f64, py: f64, pz: f64 },
    BitFlipReadout { qubit: usize, p01: f64, p10: f64 },
}

impl NoiseChannel {
    pub fn thermal_relaxation(qubit: usize, time: f64, t1: f64, t2: f64) -> Self {
        let damp = 1.0 - (-time / t1).exp();
        let dephase = 1.0 - (-time / t2).exp();
        let px = damp / 4.0;
        NoiseChannel::ThermalRelaxation {
            qubit,
            px,
            py: px,
            pz: (dephase / 2.0 - px).max(0.0),
        }
    }

    /// Total probability of a non-trivial outcome; at most 1.
    pub fn weight(&self) -> f64 {
        match self {
            NoiseChannel::Depolarizing { p, .. } => *p,
            NoiseChannel::ThermalRelaxation { px, py, pz, .. } => px + py + pz,
            NoiseChannel::BitFlipReadout { p01, p10, .. } => p01.max(*p10),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.weight() == 0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseOptions {
    /// Reject two-qubit gates on pairs missing from the coupling map.
    pub enforce_coupling: bool,
}

/// The channels a snapshot induces on a specific circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Depolarizing channel following each gate.
    pub after_gate: Vec<NoiseChannel>,
    /// Relaxation per circuit qubit, applied before readout.
    pub relaxation: Vec<NoiseChannel>,
    pub readout: Vec<NoiseChannel>,
}

impl NoiseModel {
    pub fn compile(c: &Circuit, snap: &BackendSnapshot, options: &NoiseOptions) -> Result<Self> {
        snap.validate()?;
        let n = c.n_qubits();
        if n > snap.n_qubits {
            return Err(Error::Dimension(format!(
                "{n}-qubit circuit on the {}-qubit snapshot {}",
                snap.n_qubits, snap.name
            )));
        }
        let mut busy = vec![0.0; n];
        let mut after_gate = Vec::with_capacity(c.gates().len());
        for (i, g) in c.gates().iter().enumerate() {
            if options.enforce_coupling && g.qubits.len() == 2 && !snap.is_coupled(g.qubits[0], g.qubits[1]) {
                return Err(Error::Topology(format!(
                    "gate {i} ({}) on uncoupled pair {:?} of {}",
                    g.kind, g.qubits, snap.name
                )));
            }
            let t = snap.gate_duration(g.kind, &g.qubits);
            g.qubits.iter().for_each(|&q| busy[q] += t);
            after_gate.push(NoiseChannel::Depolarizing {
                qubits: g.qubits.clone(),
                p: snap.gate_error(g.kind, &g.qubits),
            });
        }
        let relaxation = (0..n)
            .map(|q| NoiseChannel::thermal_relaxation(q, busy[q], snap.t1[q], snap.t2[q]))
            .collect();
        let readout = (0..n)
            .map(|q| {
                let (p01, p10) = snap.readout_error(q);
                NoiseChannel::BitFlipReadout { qubit: q, p01, p10 }
            })
            .collect();
        Ok(NoiseModel {
            after_gate,
            relaxation,
            readout,
        })
    }

    fn readout_factors(&self) -> Vec<(f64, f64)> {
        self.readout
            .iter()
            .map(|ch| match ch {
                // Expected ±1 eigenvalue read for a true 0 and a true 1.
                NoiseChannel::BitFlipReadout { p01, p10, .. } => (1.0 - 2.0 * p01, -(1.0 - 2.0 * p10)),
                _ => unreachable!("readout holds bit-flip channels"),
            })
            .collect()
    }
}

/// One sampled error: a Pauli (as masks) inserted after `slot`; the slot
/// past the last gate is the pre-readout relaxation.
type ErrorEvent = (usize, u64, u64);

fn random_pauli(rng: &mut impl Rng, qubits: &[usize]) -> (u64, u64) {
    let (mut x, mut z) = (0u64, 0u64);
    for &q in qubits {
        match rng.gen_range(0..4u8) {
            1 => x |= 1 << q,
            2 => {
                x |= 1 << q;
                z |= 1 << q;
            }
            3 => z |= 1 << q,
            _ => {}
        }
    }
    (x, z)
}

/// Calls `on_hit` for every shot in `0..shots` hit by an event of
/// probability `p`, skipping geometrically between hits.
fn for_each_hit(rng: &mut ChaCha8Rng, p: f64, shots: u64, mut on_hit: impl FnMut(&mut ChaCha8Rng, u64)) {
    if p <= 0.0 {
        return;
    }
    let skip = Geometric::new(p.min(1.0)).expect("probability in range");
    let mut shot = skip.sample(rng);
    while shot < shots {
        on_hit(rng, shot);
        shot = shot.saturating_add(1).saturating_add(skip.sample(rng));
    }
}

/// Error patterns of all shots, grouped: pattern → number of shots.
fn sample_patterns(model: &NoiseModel, n_gates: usize, shots: u64, seed: u64) -> BTreeMap<Vec<ErrorEvent>, u64> {
    let mut rng = substream(seed, Purpose::Noise, 0);
    let mut per_shot: BTreeMap<u64, Vec<ErrorEvent>> = BTreeMap::new();
    for (slot, ch) in model.after_gate.iter().enumerate() {
        let NoiseChannel::Depolarizing { qubits, p } = ch else { continue };
        for_each_hit(&mut rng, *p, shots, |rng, shot| {
            let (x, z) = random_pauli(rng, qubits);
            if x | z != 0 {
                per_shot.entry(shot).or_default().push((slot, x, z));
            }
        });
    }
    for ch in &model.relaxation {
        let NoiseChannel::ThermalRelaxation { qubit, px, py, pz } = *ch else { continue };
        let total = px + py + pz;
        for_each_hit(&mut rng, total, shots, |rng, shot| {
            let r = rng.gen::<f64>() * total;
            let bit = 1u64 << qubit;
            let (x, z) = if r < px {
                (bit, 0)
            } else if r < px + py {
                (bit, bit)
            } else {
                (0, bit)
            };
            per_shot.entry(shot).or_default().push((n_gates, x, z));
        });
    }
    let mut patterns: BTreeMap<Vec<ErrorEvent>, u64> = BTreeMap::new();
    let noisy = per_shot.len() as u64;
    for (_, mut events) in per_shot {
        events.sort_unstable();
        *patterns.entry(events).or_default() += 1;
    }
    if noisy < shots {
        patterns.insert(Vec::new(), shots - noisy);
    }
    patterns
}

fn apply_event(state: &mut State, n: usize, x: u64, z: u64) {
    state.apply_pauli(&PauliString::from_masks(n, x, z).expect("masks in range"));
}

/// Readout-folded probability of even parity on the support of `p`.
fn folded_plus_probability(state: &State, p: &PauliString, factors: &[(f64, f64)]) -> f64 {
    let support = p.support_mask();
    let clean = (0..state.n_qubits())
        .filter(|q| support >> q & 1 == 1)
        .all(|q| factors[q] == (1.0, -1.0));
    if clean {
        return even_parity_probability(state, p);
    }
    let mut rotated = state.clone();
    rotated.rotate_to_measurement_basis(p);
    let qubits: Vec<usize> = (0..state.n_qubits()).filter(|q| support >> q & 1 == 1).collect();
    let e: f64 = rotated
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let w: f64 = qubits
                .iter()
                .map(|&q| if b >> q & 1 == 0 { factors[q].0 } else { factors[q].1 })
                .product();
            a.norm_sqr() * w
        })
        .sum();
    ((1.0 + e) / 2.0).clamp(0.0, 1.0)
}

/// Shot-based estimate of `⟨H⟩` on a noisy device.
///
/// Every shot follows one error trajectory; the trajectories are shared by
/// all terms of `obs`, and each term's readout is drawn from its own seeded
/// substream exactly as in
/// [`sample_expectation`](crate::statevector::sample_expectation), to which
/// this reduces bit-for-bit when every rate is zero.
pub fn noisy_expectation(
    c: &Circuit,
    obs: &PauliSum,
    snap: &BackendSnapshot,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    noisy_expectation_with(c, obs, snap, shots, seed, &NoiseOptions::default())
}

pub fn noisy_expectation_with(
    c: &Circuit,
    obs: &PauliSum,
    snap: &BackendSnapshot,
    shots: u64,
    seed: u64,
    options: &NoiseOptions,
) -> Result<Estimate> {
    if shots == 0 {
        return Err(Error::Argument("shots must be at least 1".into()));
    }
    let n = c.n_qubits();
    if n != obs.n_qubits() {
        return Err(Error::Dimension(format!(
            "{n}-qubit circuit, {}-qubit observable",
            obs.n_qubits()
        )));
    }
    obs.check_hermitian(EXPECTATION_IMAG_TOL)?;
    if let Some(name) = c.parameters().first() {
        return Err(Error::Binding(name.clone()));
    }
    let model = NoiseModel::compile(c, snap, options)?;
    let gates = c.gates();
    let patterns = sample_patterns(&model, gates.len(), shots, seed);

    // Patterns are ordered by their first event, so one cursor walks the
    // noiseless prefix once and each pattern branches off it.
    let advance = |state: &mut State, from: &mut usize, to: usize| -> Result<()> {
        for g in &gates[*from..to] {
            state.apply_gate(g)?;
        }
        *from = to;
        Ok(())
    };
    let mut finals: Vec<(State, u64)> = Vec::with_capacity(patterns.len());
    let mut cursor = State::zero(n)?;
    let mut applied = 0;
    for (events, count) in &patterns {
        // The error-free pattern sorts first and must not move the cursor.
        if let Some(&(slot, _, _)) = events.first() {
            advance(&mut cursor, &mut applied, (slot + 1).min(gates.len()))?;
        }
        let mut state = cursor.clone();
        let mut next = applied;
        for &(slot, x, z) in events {
            advance(&mut state, &mut next, (slot + 1).min(gates.len()))?;
            apply_event(&mut state, n, x, z);
        }
        advance(&mut state, &mut next, gates.len())?;
        finals.push((state, *count));
    }

    let factors = model.readout_factors();
    let mut acc = EstimateAccumulator::default();
    for (t, (p, coef)) in obs.terms().enumerate() {
        if p.is_identity() {
            acc.add_exact(coef.re);
            continue;
        }
        let mut rng = substream(seed, Purpose::Measurement, t as u64);
        let mut plus = 0u64;
        for (state, count) in &finals {
            let q = folded_plus_probability(state, p, &factors);
            plus += Binomial::new(*count, q.clamp(0.0, 1.0))
                .expect("valid binomial")
                .sample(&mut rng);
        }
        let (mean, se) = parity_mean(plus, shots);
        acc.add_term(coef.re, mean, se);
    }
    Ok(acc.finish())
}

/// Vectorized density matrix `ρ[r][c] = v[r + (c << n)]`.
struct Density {
    n: usize,
    vec: State,
}

impl Density {
    fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * n)];
        amps[0] = Complex64::new(1.0, 0.0);
        Density {
            n,
            vec: State::from_raw(2 * n, amps),
        }
    }

    /// `ρ → UρU†`: `U` on the row index, `Ū` on the column index.
    fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        let n = self.n;
        if matches!(g.angle, Some(Angle::Param(_))) {
            return Err(Error::Binding(format!("parameter on {}", g.kind)));
        }
        if let Some(m) = g.kind.matrix_1q(g.literal_angle().unwrap_or(0.0)) {
            let conj = [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]];
            self.vec.apply_1q(g.qubits[0], &m);
            self.vec.apply_1q(g.qubits[0] + n, &conj);
        } else {
            self.vec.apply_gate(g)?;
            let shifted = Gate::fixed(g.kind, g.qubits.iter().map(|q| q + n).collect());
            self.vec.apply_gate(&shifted)?;
        }
        Ok(())
    }

    /// `PρP` for the Pauli with the given masks (Y where both are set).
    fn conjugated(&self, x: u64, z: u64) -> State {
        let n = self.n;
        let both = PauliString::from_masks(2 * n, x | (x << n), z | (z << n)).expect("masks in range");
        let mut out = self.vec.clone();
        out.apply_pauli(&both);
        // The column index carries P̄ = (−1)^{#Y} P.
        if (x & z).count_ones() % 2 == 1 {
            out.amplitudes_mut().iter_mut().for_each(|a| *a = -*a);
        }
        out
    }

    /// `ρ → Σ_k w_k P_k ρ P_k` with `w_0 = 1 − Σ_{k>0} w_k` on the identity.
    fn pauli_mix(&mut self, terms: &[(f64, u64, u64)]) {
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if total == 0.0 {
            return;
        }
        let mut acc: Vec<Complex64> = self.vec.amplitudes().iter().map(|a| a * (1.0 - total)).collect();
        for &(w, x, z) in terms {
            let c = self.conjugated(x, z);
            acc.iter_mut().zip(c.amplitudes()).for_each(|(a, b)| *a += b * w);
        }
        self.vec.amplitudes_mut().copy_from_slice(&acc);
    }

    /// `tr(Pρ) = Σ_j phase_j ρ[j][j ⊕ x]`.
    fn pauli_expectation(&self, p: &PauliString) -> Complex64 {
        let n = self.n;
        let v = self.vec.amplitudes();
        (0..1usize << n)
            .map(|j| {
                let (phase, image) = p.apply_to_basis(j);
                phase * v[j + (image << n)]
            })
            .sum()
    }
}

fn paulis_on(qubits: &[usize]) -> Vec<(u64, u64)> {
    let mut out = vec![(0u64, 0u64)];
    for &q in qubits {
        out = out
            .into_iter()
            .flat_map(|(x, z)| {
                let b = 1u64 << q;
                [(x, z), (x | b, z), (x | b, z | b), (x, z | b)]
            })
            .collect();
    }
    out
}

/// Exact noisy `⟨H⟩` by density-matrix evolution under the snapshot's
/// channels, with readout flips folded into each term.
pub fn density_oracle(c: &Circuit, obs: &PauliSum, snap: &BackendSnapshot) -> Result<f64> {
    density_oracle_with(c, obs, snap, &NoiseOptions::default())
}

pub fn density_oracle_with(c: &Circuit, obs: &PauliSum, snap: &BackendSnapshot, options: &NoiseOptions) -> Result<f64> {
    let n = c.n_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::Capacity {
            what: "density matrix",
            requested: n,
            cap: MAX_DENSITY_QUBITS,
        });
    }
    if n != obs.n_qubits() {
        return Err(Error::Dimension(format!(
            "{n}-qubit circuit, {}-qubit observable",
            obs.n_qubits()
        )));
    }
    obs.check_hermitian(EXPECTATION_IMAG_TOL)?;
    if let Some(name) = c.parameters().first() {
        return Err(Error::Binding(name.clone()));
    }
    let model = NoiseModel::compile(c, snap, options)?;
    let mut rho = Density::zero(n);
    for (g, ch) in c.gates().iter().zip(&model.after_gate) {
        rho.apply_gate(g)?;
        if let NoiseChannel::Depolarizing { qubits, p } = ch {
            let all = paulis_on(qubits);
            let w = p / all.len() as f64;
            let terms: Vec<(f64, u64, u64)> = all.into_iter().map(|(x, z)| (w, x, z)).collect();
            // The identity member is included in the uniform draw.
            rho.pauli_mix(&terms);
        }
    }
    for ch in &model.relaxation {
        if let NoiseChannel::ThermalRelaxation { qubit, px, py, pz } = *ch {
            let b = 1u64 << qubit;
            rho.pauli_mix(&[(px, b, 0), (py, b, b), (pz, 0, b)]);
        }
    }

    // Each measured bit reads ±1 with mean α + β·z, z the ideal eigenvalue,
    // so a term expands into the substrings of its support.
    let factors = model.readout_factors();
    let mut total = 0.0;
    for (p, coef) in obs.terms() {
        let support: Vec<usize> = (0..n).filter(|&q| p.op(q) != Pauli::I).collect();
        let mut e = 0.0;
        for subset in 0..1u64 << support.len() {
            let mut weight = 1.0;
            let mut ops = vec![Pauli::I; n];
            for (k, &q) in support.iter().enumerate() {
                let (f0, f1) = factors[q];
                if subset >> k & 1 == 1 {
                    weight *= (f0 - f1) / 2.0;
                    ops[q] = p.op(q);
                } else {
                    weight *= (f0 + f1) / 2.0;
                }
            }
            if weight != 0.0 {
                e += weight * rho.pauli_expectation(&PauliString::from_ops(&ops)?).re;
            }
        }
        total += coef.re * e;
    }
    Ok(total)
}
