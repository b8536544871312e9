//! Analytic gradients of circuit energies.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::Circuit;
use crate::error::Result;
use crate::pauli::PauliSum;
use crate::statevector::{evolve, expectation};

/// Exact energy `⟨ψ(θ)|obs|ψ(θ)⟩`.
pub fn exact_energy(c: &Circuit, obs: &PauliSum, theta: &[f64]) -> Result<f64> {
    expectation(&evolve(&c.bind(theta)?)?, obs)
}

/// ∂E/∂θ by the two-term parameter-shift rule.
///
/// Every symbolic angle in a [`Circuit`] drives an RX, RY or RZ rotation,
/// for which the rule is exact. A parameter used by several gates gets one
/// shifted pair per occurrence, summed.
pub fn parameter_shift_gradient(c: &Circuit, obs: &PauliSum, theta: &[f64]) -> Result<Vec<f64>> {
    // Validates arity before any shifting.
    c.bind(theta)?;
    let mut grad = vec![0.0; theta.len()];
    for (k, gates) in c.parameter_occurrences().into_iter().enumerate() {
        for g in gates {
            let plus = expectation(&evolve(&c.bind_shifted(theta, g, FRAC_PI_2)?)?, obs)?;
            let minus = expectation(&evolve(&c.bind_shifted(theta, g, -FRAC_PI_2)?)?, obs)?;
            grad[k] += 0.5 * (plus - minus);
        }
    }
    Ok(grad)
}
