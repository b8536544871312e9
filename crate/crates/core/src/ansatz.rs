//! The six benchmarked hardware-efficient ansatz families.
//!
//! Every family is `reps` blocks of (rotation layer, entangler) followed by a
//! final rotation layer, so the gate list for `reps = r` is a prefix of the
//! one for `reps = r + 1` and parameter counts are linear in `reps`:
//!
//! | kind               | rotation layer | entangler            | parameters       |
//! |--------------------|----------------|----------------------|------------------|
//! | `circuit1`         | RY             | linear CX chain      | `n (reps + 1)`   |
//! | `circuit2`         | RY, RZ         | linear CX chain      | `2n (reps + 1)`  |
//! | `circuit3`         | RY             | all-pairs CX         | `n (reps + 1)`   |
//! | `real_amplitudes`  | RY             | CX (linear or full)  | `n (reps + 1)`   |
//! | `pauli_two_design` | seeded RX/RY/RZ| CZ, alternating pairs| `n (reps + 1)`   |
//! | `efficient_su2`    | RY, RZ         | CX (linear or full)  | `2n (reps + 1)`  |
//!
//! `pauli_two_design` starts with a fixed `RY(π/4)` on every qubit.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Circuit1,
    Circuit2,
    Circuit3,
    RealAmplitudes,
    PauliTwoDesign,
    EfficientSu2,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 6] = [
        AnsatzKind::Circuit1,
        AnsatzKind::Circuit2,
        AnsatzKind::Circuit3,
        AnsatzKind::RealAmplitudes,
        AnsatzKind::PauliTwoDesign,
        AnsatzKind::EfficientSu2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::Circuit1 => "circuit1",
            AnsatzKind::Circuit2 => "circuit2",
            AnsatzKind::Circuit3 => "circuit3",
            AnsatzKind::RealAmplitudes => "real_amplitudes",
            AnsatzKind::PauliTwoDesign => "pauli_two_design",
            AnsatzKind::EfficientSu2 => "efficient_su2",
        }
    }

    fn rotations_per_qubit(self) -> usize {
        match self {
            AnsatzKind::Circuit2 | AnsatzKind::EfficientSu2 => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnsatzKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown ansatz kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    #[default]
    Linear,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    pub reps: usize,
    /// Required for `pauli_two_design`, rejected otherwise.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub entanglement: Entanglement,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, n_qubits: usize, reps: usize) -> Self {
        AnsatzSpec {
            kind,
            n_qubits,
            reps,
            seed: None,
            entanglement: Entanglement::Linear,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::Spec("ansatz needs at least one qubit".into()));
        }
        if self.reps == 0 {
            return Err(Error::Spec("reps must be at least 1".into()));
        }
        match (self.kind, self.seed) {
            (AnsatzKind::PauliTwoDesign, None) => {
                Err(Error::Spec("pauli_two_design requires a seed".into()))
            }
            (AnsatzKind::PauliTwoDesign, Some(_)) | (_, None) => Ok(()),
            (kind, Some(_)) => Err(Error::Spec(format!("{kind} does not take a seed"))),
        }
    }
}

pub fn parameter_count(spec: &AnsatzSpec) -> usize {
    spec.kind.rotations_per_qubit() * spec.n_qubits * (spec.reps + 1)
}

fn cx_pairs(n: usize, entanglement: Entanglement) -> Vec<(usize, usize)> {
    match entanglement {
        Entanglement::Linear => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        Entanglement::Full => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
    }
}

struct Builder {
    circuit: Circuit,
}

impl Builder {
    fn param_layer(&mut self, kinds: &[GateKind]) -> Result<()> {
        let n = self.circuit.n_qubits();
        for &kind in kinds {
            for q in 0..n {
                let name = format!("θ[{}]", self.circuit.parameters().len());
                self.circuit.rotate_param(kind, q, name)?;
            }
        }
        Ok(())
    }

    fn cx(&mut self, pairs: &[(usize, usize)]) -> Result<()> {
        for &(a, b) in pairs {
            self.circuit.cx(a, b)?;
        }
        Ok(())
    }
}

pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.n_qubits;
    let mut b = Builder {
        circuit: Circuit::new(n)?,
    };
    match spec.kind {
        AnsatzKind::PauliTwoDesign => {
            let mut rng = substream(spec.seed.expect("validated"), Purpose::Ansatz, 0);
            for q in 0..n {
                b.circuit
                    .rotate(GateKind::RY, q, Angle::Value(std::f64::consts::FRAC_PI_4))?;
            }
            let choices = [GateKind::RX, GateKind::RY, GateKind::RZ];
            let mut random_layer = |b: &mut Builder| -> Result<()> {
                for q in 0..n {
                    let kind = choices[rng.gen_range(0..3)];
                    let name = format!("θ[{}]", b.circuit.parameters().len());
                    b.circuit.rotate_param(kind, q, name)?;
                }
                Ok(())
            };
            for rep in 0..spec.reps {
                random_layer(&mut b)?;
                let mut i = rep % 2;
                while i + 1 < n {
                    b.circuit.cz(i, i + 1)?;
                    i += 2;
                }
            }
            random_layer(&mut b)?;
        }
        kind => {
            let (rot, pairs): (&[GateKind], Vec<(usize, usize)>) = match kind {
                AnsatzKind::Circuit1 => (&[GateKind::RY], cx_pairs(n, Entanglement::Linear)),
                AnsatzKind::Circuit2 => (
                    &[GateKind::RY, GateKind::RZ],
                    cx_pairs(n, Entanglement::Linear),
                ),
                AnsatzKind::Circuit3 => (&[GateKind::RY], cx_pairs(n, Entanglement::Full)),
                AnsatzKind::RealAmplitudes => (&[GateKind::RY], cx_pairs(n, spec.entanglement)),
                AnsatzKind::EfficientSu2 => (
                    &[GateKind::RY, GateKind::RZ],
                    cx_pairs(n, spec.entanglement),
                ),
                AnsatzKind::PauliTwoDesign => unreachable!(),
            };
            for _ in 0..spec.reps {
                b.param_layer(rot)?;
                b.cx(&pairs)?;
            }
            b.param_layer(rot)?;
        }
    }
    Ok(b.circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_parameter_counts() {
        let su2 = AnsatzSpec::new(AnsatzKind::EfficientSu2, 2, 1);
        assert_eq!(build_ansatz(&su2).unwrap().parameters().len(), 8);
        let ra = AnsatzSpec::new(AnsatzKind::RealAmplitudes, 3, 2);
        assert_eq!(build_ansatz(&ra).unwrap().parameters().len(), 9);
        assert_eq!(parameter_count(&AnsatzSpec::new(AnsatzKind::EfficientSu2, 4, 3)), 32);
        assert_eq!(parameter_count(&AnsatzSpec::new(AnsatzKind::Circuit1, 3, 1)), 6);
    }

    #[test]
    fn pauli_two_design_is_seed_deterministic() {
        let spec = AnsatzSpec::new(AnsatzKind::PauliTwoDesign, 2, 1).with_seed(5);
        assert_eq!(build_ansatz(&spec).unwrap(), build_ansatz(&spec).unwrap());
        let other = AnsatzSpec::new(AnsatzKind::PauliTwoDesign, 6, 3).with_seed(6);
        let same = AnsatzSpec::new(AnsatzKind::PauliTwoDesign, 6, 3).with_seed(6);
        assert_eq!(build_ansatz(&other).unwrap(), build_ansatz(&same).unwrap());
    }

    #[test]
    fn seed_rules() {
        assert!(build_ansatz(&AnsatzSpec::new(AnsatzKind::PauliTwoDesign, 2, 1)).is_err());
        assert!(build_ansatz(&AnsatzSpec::new(AnsatzKind::Circuit1, 2, 1).with_seed(1)).is_err());
        assert!(build_ansatz(&AnsatzSpec::new(AnsatzKind::Circuit1, 2, 0)).is_err());
        assert!("circuit7".parse::<AnsatzKind>().is_err());
        assert_eq!("efficient_su2".parse::<AnsatzKind>().unwrap(), AnsatzKind::EfficientSu2);
    }

    fn spec_for(kind: AnsatzKind, n: usize, reps: usize) -> AnsatzSpec {
        let s = AnsatzSpec::new(kind, n, reps);
        if kind == AnsatzKind::PauliTwoDesign {
            s.with_seed(9)
        } else {
            s
        }
    }

    #[test]
    fn counts_agree_with_built_circuits_and_are_linear() {
        for kind in AnsatzKind::ALL {
            for ent in [Entanglement::Linear, Entanglement::Full] {
                for n in 1..=6 {
                    let counts: Vec<usize> = (1..=4)
                        .map(|reps| {
                            let spec = spec_for(kind, n, reps).with_entanglement(ent);
                            let built = build_ansatz(&spec).unwrap().parameters().len();
                            assert_eq!(built, parameter_count(&spec), "{kind} n={n} reps={reps}");
                            built
                        })
                        .collect();
                    let diffs: Vec<usize> = counts.windows(2).map(|w| w[1] - w[0]).collect();
                    assert!(diffs.iter().all(|d| *d == diffs[0]), "{kind}: {counts:?}");
                }
            }
        }
    }

    #[test]
    fn reps_extend_by_identical_blocks() {
        for kind in AnsatzKind::ALL {
            let n = 4;
            let circuits: Vec<Circuit> = (1..=4)
                .map(|r| build_ansatz(&spec_for(kind, n, r)).unwrap())
                .collect();
            for w in circuits.windows(2) {
                let (short, long) = (w[0].gates(), w[1].gates());
                assert_eq!(&long[..short.len()], short, "{kind}");
            }
            let growth: Vec<usize> = circuits.windows(2).map(|w| w[1].gates().len() - w[0].gates().len()).collect();
            // PauliTwoDesign alternates CZ offsets, so block sizes repeat with period 2.
            if kind == AnsatzKind::PauliTwoDesign {
                assert_eq!(growth[0], growth[2]);
            } else {
                assert!(growth.iter().all(|g| *g == growth[0]), "{kind}: {growth:?}");
            }
        }
    }

    #[test]
    fn parameter_names_are_stable() {
        let c = build_ansatz(&AnsatzSpec::new(AnsatzKind::EfficientSu2, 2, 1)).unwrap();
        let names: Vec<&str> = c.parameters().iter().map(String::as_str).collect();
        assert_eq!(names[0], "θ[0]");
        assert_eq!(names[7], "θ[7]");
        assert!(c.parameter_occurrences().iter().all(|o| o.len() == 1));
    }
}
