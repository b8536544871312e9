//! Exact statevector evolution, Pauli expectation values and shot sampling.
//!
//! Amplitude `i` holds the basis state whose bit `q` is the value of qubit
//! `q` (little-endian).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::rng::{substream, Purpose};

pub const MAX_STATEVECTOR_QUBITS: usize = 24;

/// Imaginary residue of a Hermitian expectation value tolerated as roundoff.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl State {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Dimension("a state needs at least one qubit".into()));
        }
        if n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::Capacity {
                what: "statevector",
                requested: n_qubits,
                cap: MAX_STATEVECTOR_QUBITS,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(State {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || amplitudes.len() != 1usize << n_qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes do not describe {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("state norm² is {norm}, expected 1")));
        }
        Ok(State {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes without the normalization check; used for
    /// vectorized density matrices.
    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1usize << n_qubits);
        State {
            n_qubits,
            amplitudes,
        }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_1q(&mut self, q: usize, m: &[[Complex64; 2]; 2]) {
        let step = 1usize << q;
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + step {
                let j = i + step;
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * step;
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Applies a gate whose angle, if any, is a literal.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::Dimension(format!(
                "gate on qubit {q} applied to {}-qubit state",
                self.n_qubits
            )));
        }
        match gate.kind {
            GateKind::CX => self.apply_cx(gate.qubits[0], gate.qubits[1]),
            GateKind::CZ => self.apply_cz(gate.qubits[0], gate.qubits[1]),
            kind => {
                let angle = match gate.angle {
                    Some(Angle::Value(v)) => v,
                    Some(Angle::Param(k)) => {
                        return Err(Error::Binding(format!("parameter #{k} on {kind}")))
                    }
                    None => 0.0,
                };
                let m = kind.matrix_1q(angle).expect("single-qubit kind");
                self.apply_1q(gate.qubits[0], &m);
            }
        }
        Ok(())
    }

    /// Applies a Pauli string as an operator (used for error insertion).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        if p.is_identity() {
            return;
        }
        let old = self.amplitudes.clone();
        for (i, amp) in old.into_iter().enumerate() {
            let (phase, j) = p.apply_to_basis(i);
            self.amplitudes[j] = phase * amp;
        }
    }

    /// `⟨ψ|P|ψ⟩` for a single string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Complex64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (phase, j) = p.apply_to_basis(i);
                self.amplitudes[j].conj() * phase * a
            })
            .sum()
    }

    /// Rotates each qubit in the support of `p` so that `p` becomes diagonal
    /// (`X` via `H`, `Y` via `S†` then `H`).
    pub fn rotate_to_measurement_basis(&mut self, p: &PauliString) {
        let h = GateKind::H.matrix_1q(0.0).expect("1q");
        let sdg = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        ];
        for q in 0..self.n_qubits {
            match p.op(q) {
                Pauli::X => self.apply_1q(q, &h),
                Pauli::Y => {
                    self.apply_1q(q, &sdg);
                    self.apply_1q(q, &h);
                }
                _ => {}
            }
        }
    }
}

fn check_width(circuit_qubits: usize) -> Result<()> {
    if circuit_qubits > MAX_STATEVECTOR_QUBITS {
        return Err(Error::Capacity {
            what: "statevector",
            requested: circuit_qubits,
            cap: MAX_STATEVECTOR_QUBITS,
        });
    }
    Ok(())
}

/// Runs a fully bound circuit on `|0…0⟩`.
pub fn evolve(c: &Circuit) -> Result<State> {
    check_width(c.n_qubits())?;
    if let Some(name) = c.parameters().first() {
        return Err(Error::Binding(name.clone()));
    }
    let mut state = State::zero(c.n_qubits())?;
    for gate in c.gates() {
        state.apply_gate(gate)?;
    }
    Ok(state)
}

/// Exact `⟨ψ|H|ψ⟩` without forming a matrix.
pub fn expectation(s: &State, obs: &PauliSum) -> Result<f64> {
    if s.n_qubits() != obs.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit state, {}-qubit observable",
            s.n_qubits(),
            obs.n_qubits()
        )));
    }
    obs.check_hermitian(EXPECTATION_IMAG_TOL)?;
    let mut total = Complex64::new(0.0, 0.0);
    for (p, c) in obs.terms() {
        total += c * s.pauli_expectation(p);
    }
    debug_assert!(
        total.im.abs() < EXPECTATION_IMAG_TOL * (1.0 + obs.one_norm()),
        "imaginary residue {}",
        total.im
    );
    Ok(total.re)
}

/// Shot-based estimate with its propagated standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Probability of reading even parity on the support of `p` after the
/// basis change that diagonalizes it.
pub(crate) fn even_parity_probability(state: &State, p: &PauliString) -> f64 {
    let mut rotated = state.clone();
    rotated.rotate_to_measurement_basis(p);
    let mask = p.support_mask() as usize;
    rotated
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i & mask).count_ones() % 2 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Draws `shots` parity outcomes with `P(+1) = plus_probability` and returns
/// the sample mean of the ±1 eigenvalue and its standard error.
pub(crate) fn sample_parity(rng: &mut impl Rng, shots: u64, plus_probability: f64) -> (f64, f64) {
    let plus = Binomial::new(shots, plus_probability.clamp(0.0, 1.0))
        .expect("valid binomial")
        .sample(rng);
    parity_mean(plus, shots)
}

pub(crate) fn parity_mean(plus: u64, shots: u64) -> (f64, f64) {
    let n = shots as f64;
    let mean = (2.0 * plus as f64 - n) / n;
    let stderr = ((1.0 - mean * mean).max(0.0) / n).sqrt();
    (mean, stderr)
}

/// Accumulates per-term sample means into a weighted estimate.
#[derive(Debug, Default)]
pub(crate) struct EstimateAccumulator {
    value: f64,
    variance: f64,
}

impl EstimateAccumulator {
    pub fn add_exact(&mut self, v: f64) {
        self.value += v;
    }

    pub fn add_term(&mut self, coefficient: f64, mean: f64, stderr: f64) {
        self.value += coefficient * mean;
        self.variance += coefficient * coefficient * stderr * stderr;
    }

    pub fn finish(self) -> Estimate {
        Estimate {
            value: self.value,
            stderr: self.variance.sqrt(),
        }
    }
}

/// Shot-based estimate of `⟨H⟩`: each non-identity term is measured
/// separately in its own basis with `shots` samples drawn from the term's
/// own seeded substream.
pub fn sample_expectation(c: &Circuit, obs: &PauliSum, shots: u64, seed: u64) -> Result<Estimate> {
    if shots == 0 {
        return Err(Error::Argument("shots must be at least 1".into()));
    }
    if c.n_qubits() != obs.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit, {}-qubit observable",
            c.n_qubits(),
            obs.n_qubits()
        )));
    }
    obs.check_hermitian(EXPECTATION_IMAG_TOL)?;
    let state = evolve(c)?;
    let mut acc = EstimateAccumulator::default();
    for (t, (p, coef)) in obs.terms().enumerate() {
        if p.is_identity() {
            acc.add_exact(coef.re);
            continue;
        }
        let mut rng = substream(seed, Purpose::Measurement, t as u64);
        let (mean, se) = sample_parity(&mut rng, shots, even_parity_probability(&state, p));
        acc.add_term(coef.re, mean, se);
    }
    Ok(acc.finish())
}
