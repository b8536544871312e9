//! The variational loop: ansatz, estimator and optimizer bound together.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, parameter_count, AnsatzSpec};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::exact::ground_energy;
use crate::gradient::{exact_energy, parameter_shift_gradient};
use crate::noise::{noisy_expectation, BackendSnapshot};
use crate::optimize::{minimize, GradientRule, Objective, OptimizerSpec, Trace};
use crate::pauli::PauliSum;
use crate::rng::{mix, substream, Purpose};
use crate::statevector::sample_expectation;

/// Default shot count of the sampling estimators.
pub const DEFAULT_SHOTS: u64 = 8192;

/// Default number of independent restarts per configuration.
pub const DEFAULT_RESTARTS: usize = 5;

/// Widest Hamiltonian for which [`run_vqe`] computes the exact reference
/// on its own.
pub const AUTO_REFERENCE_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    Statevector,
    Shots,
    Noisy,
}

impl EstimatorMode {
    pub const ALL: [EstimatorMode; 3] = [EstimatorMode::Statevector, EstimatorMode::Shots, EstimatorMode::Noisy];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorMode::Statevector => "statevector",
            EstimatorMode::Shots => "shots",
            EstimatorMode::Noisy => "noisy",
        }
    }
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown estimator `{s}`")))
    }
}

/// How energies are estimated during optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<BackendSnapshot>,
    #[serde(default)]
    pub seed: u64,
}

impl EstimatorConfig {
    pub fn statevector() -> Self {
        EstimatorConfig {
            mode: EstimatorMode::Statevector,
            shots: None,
            snapshot: None,
            seed: 0,
        }
    }

    pub fn shots(shots: u64) -> Self {
        EstimatorConfig {
            mode: EstimatorMode::Shots,
            shots: Some(shots),
            snapshot: None,
            seed: 0,
        }
    }

    pub fn noisy(shots: u64, snapshot: BackendSnapshot) -> Self {
        EstimatorConfig {
            mode: EstimatorMode::Noisy,
            shots: Some(shots),
            snapshot: Some(snapshot),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.mode, self.shots, &self.snapshot) {
            (EstimatorMode::Statevector, None, None) => Ok(()),
            (EstimatorMode::Statevector, ..) => Err(Error::Spec("statevector mode takes no shots or snapshot".into())),
            (_, Some(0), _) => Err(Error::Spec("shots must be at least 1".into())),
            (EstimatorMode::Shots, _, Some(_)) => Err(Error::Spec("shots mode takes no snapshot".into())),
            (EstimatorMode::Noisy, _, None) => Err(Error::Spec("noisy mode requires a snapshot".into())),
            (_, _, snapshot) => snapshot.as_ref().map_or(Ok(()), |s| s.validate()),
        }
    }

    fn shot_count(&self) -> u64 {
        self.shots.unwrap_or(DEFAULT_SHOTS)
    }

    /// Estimate at one parameter vector; `draw` selects the sampling seed.
    fn estimate(&self, c: &Circuit, h: &PauliSum, theta: &[f64], draw: u64) -> Result<(f64, f64)> {
        match self.mode {
            EstimatorMode::Statevector => Ok((exact_energy(c, h, theta)?, 0.0)),
            EstimatorMode::Shots => {
                let e = sample_expectation(&c.bind(theta)?, h, self.shot_count(), draw)?;
                Ok((e.value, e.stderr))
            }
            EstimatorMode::Noisy => {
                let snap = self.snapshot.as_ref().expect("validated");
                let e = noisy_expectation(&c.bind(theta)?, h, snap, self.shot_count(), draw)?;
                Ok((e.value, e.stderr))
            }
        }
    }
}

/// Energy landscape seen by the optimizer. Sampling modes draw a fresh seed
/// for every call so repeated points see independent noise.
struct EnergyObjective<'a> {
    circuit: &'a Circuit,
    h: &'a PauliSum,
    est: &'a EstimatorConfig,
    stream: u64,
    calls: u64,
    error: Option<Error>,
}

impl Objective for EnergyObjective<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        let draw = mix(self.stream, self.calls);
        self.calls += 1;
        match self.est.estimate(self.circuit, self.h, x, draw) {
            Ok((v, _)) => v,
            Err(e) => {
                self.error.get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn gradient(&mut self, x: &[f64]) -> Option<Vec<f64>> {
        parameter_shift_gradient(self.circuit, self.h, x).ok()
    }

    /// Shifted evaluations go through [`Objective::value`], so they cost
    /// objective calls exactly as on hardware.
    fn preferred_gradient(&self) -> GradientRule {
        GradientRule::ParameterShift
    }

    fn is_deterministic(&self) -> bool {
        self.est.mode == EstimatorMode::Statevector
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Restart {
    /// Fresh estimate at the final parameters (exact in statevector mode).
    pub energy: f64,
    pub stderr: f64,
    pub parameters: Vec<f64>,
    pub initial_point: Vec<f64>,
    pub trace: Trace,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    /// Lowest restart energy, in Hartree.
    pub energy: f64,
    pub stderr: f64,
    pub parameters: Vec<f64>,
    /// Trace of the restart that produced `energy`.
    pub trace: Trace,
    /// Seconds for the whole run, all restarts included.
    pub wall_time: f64,
    pub restarts: Vec<Restart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_reference: Option<f64>,
    /// Set when every restart aborted; `energy` is then the best value in
    /// the partial traces (or NaN if there is none).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub estimator: EstimatorConfig,
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerSpec,
}

impl VqeResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Objective calls summed over restarts.
    pub fn evaluations(&self) -> usize {
        self.restarts.iter().map(|r| r.trace.len()).sum()
    }
}

/// Initial point of restart `r`: uniform in `[−π, π)` (or the bounds).
pub fn initial_point(opt: &OptimizerSpec, dim: usize, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = substream(mix(seed, restart as u64), Purpose::InitialPoint, 0);
    (0..dim)
        .map(|k| {
            let (lo, hi) = opt
                .bounds
                .as_ref()
                .map_or((-std::f64::consts::PI, std::f64::consts::PI), |b| b[k]);
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo..hi)
            }
        })
        .collect()
}

/// Runs `restarts` independent optimizations and keeps the best.
///
/// The exact reference is computed here for Hamiltonians of up to
/// [`AUTO_REFERENCE_QUBITS`] qubits; use [`run_vqe_with_reference`] to
/// supply one.
pub fn run_vqe(
    h: &PauliSum,
    ansatz: &AnsatzSpec,
    opt: &OptimizerSpec,
    est: &EstimatorConfig,
    restarts: usize,
    seed: u64,
) -> Result<VqeResult> {
    let reference = if h.n_qubits() <= AUTO_REFERENCE_QUBITS {
        Some(ground_energy(h)?)
    } else {
        None
    };
    run_vqe_with_reference(h, ansatz, opt, est, restarts, seed, reference)
}

pub fn run_vqe_with_reference(
    h: &PauliSum,
    ansatz: &AnsatzSpec,
    opt: &OptimizerSpec,
    est: &EstimatorConfig,
    restarts: usize,
    seed: u64,
    reference: Option<f64>,
) -> Result<VqeResult> {
    let start = Instant::now();
    if ansatz.n_qubits != h.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit ansatz, {}-qubit Hamiltonian",
            ansatz.n_qubits,
            h.n_qubits()
        )));
    }
    if restarts == 0 {
        return Err(Error::Argument("restarts must be at least 1".into()));
    }
    est.validate()?;
    h.check_hermitian(crate::statevector::EXPECTATION_IMAG_TOL)?;
    let circuit = build_ansatz(ansatz)?;
    let dim = parameter_count(ansatz);
    opt.validate(dim)?;

    let runs: Vec<Restart> = (0..restarts)
        .into_par_iter()
        .map(|r| run_restart(h, &circuit, opt, est, seed, r))
        .collect::<Result<_>>()?;

    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.failure.is_none())
        .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy))
        .map(|(i, _)| i);
    let (energy, stderr, parameters, trace, failure) = match best {
        Some(i) => (runs[i].energy, runs[i].stderr, runs[i].parameters.clone(), runs[i].trace.clone(), None),
        None => {
            let partial = runs
                .iter()
                .filter_map(|r| r.trace.best().map(|e| (e.value, r)))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let message = runs[0].failure.clone();
            match partial {
                Some((v, r)) => (v, 0.0, r.parameters.clone(), r.trace.clone(), message),
                None => (f64::NAN, 0.0, runs[0].initial_point.clone(), Trace::default(), message),
            }
        }
    };
    Ok(VqeResult {
        energy,
        stderr,
        parameters,
        trace,
        wall_time: start.elapsed().as_secs_f64(),
        restarts: runs,
        exact_reference: reference,
        failure,
        estimator: est.clone(),
        ansatz: ansatz.clone(),
        optimizer: opt.clone(),
    })
}

fn run_restart(
    h: &PauliSum,
    circuit: &Circuit,
    opt: &OptimizerSpec,
    est: &EstimatorConfig,
    seed: u64,
    r: usize,
) -> Result<Restart> {
    let start = Instant::now();
    let x0 = initial_point(opt, circuit.parameters().len(), seed, r);
    let stream = mix(mix(est.seed, r as u64), Purpose::Evaluation as u64);
    let mut objective = EnergyObjective {
        circuit,
        h,
        est,
        stream,
        calls: 0,
        error: None,
    };
    let mut opt = opt.clone();
    opt.seed = mix(opt.seed, r as u64);
    match minimize(&opt, &mut objective, &x0) {
        Ok(m) => {
            // An independent draw scores the final point, so the reported
            // energy carries no selection bias from the optimizer.
            let draw = mix(stream, u64::MAX);
            let (energy, stderr) = est.estimate(circuit, h, &m.x, draw)?;
            Ok(Restart {
                energy,
                stderr,
                parameters: m.x,
                initial_point: x0,
                trace: m.trace,
                converged: m.converged,
                failure: None,
                wall_time: start.elapsed().as_secs_f64(),
            })
        }
        Err(aborted) => {
            // A failing estimator is an input problem, not an optimizer one.
            if let Some(e) = objective.error {
                return Err(e);
            }
            let parameters = aborted.trace.best().map_or(x0.clone(), |e| e.params.clone());
            Ok(Restart {
                energy: f64::NAN,
                stderr: 0.0,
                parameters,
                initial_point: x0,
                trace: aborted.trace,
                converged: false,
                failure: Some(aborted.error.to_string()),
                wall_time: start.elapsed().as_secs_f64(),
            })
        }
    }
}

/// Mean absolute error against `reference` and the sample standard
/// deviation of the absolute errors (0 for a single result).
pub fn mae_report(results: &[VqeResult], reference: f64) -> Result<(f64, f64)> {
    let energies: Vec<f64> = results.iter().map(|r| r.energy).collect();
    mae_spread(&energies, reference)
}

pub fn mae_spread(energies: &[f64], reference: f64) -> Result<(f64, f64)> {
    if energies.is_empty() {
        return Err(Error::Argument("no results to report".into()));
    }
    let errs: Vec<f64> = energies.iter().map(|e| (e - reference).abs()).collect();
    let n = errs.len() as f64;
    let mae = errs.iter().sum::<f64>() / n;
    let spread = if errs.len() < 2 {
        0.0
    } else {
        (errs.iter().map(|e| (e - mae).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok((mae, spread))
}

/// Fixed-point rendering with digits grouped in threes on both sides of
/// the point, separated by a space: `0.00292` at 5 places is `0.002 92`.
pub fn format_grouped(value: f64, decimals: usize) -> String {
    let text = format!("{:.*}", decimals, value.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let mut out = String::new();
    if value.is_sign_negative() && text.bytes().any(|b| b.is_ascii_digit() && b != b'0') {
        out.push('-');
    }
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(' ');
        }
        out.push(ch);
    }
    if !frac.is_empty() {
        out.push('.');
        for (i, ch) in frac.chars().enumerate() {
            if i > 0 && i % 3 == 0 {
                out.push(' ');
            }
            out.push(ch);
        }
    }
    out
}

/// `mae ± spread` with 5 and 6 decimal places.
pub fn format_mae(mae: f64, spread: f64) -> String {
    format!("{} ± {}", format_grouped(mae, 5), format_grouped(spread, 6))
}

#[cfg(test)]
mod tests;
