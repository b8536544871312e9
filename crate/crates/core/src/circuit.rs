//! Gate-level circuit description with named symbolic parameters.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    RX,
    RY,
    RZ,
    CX,
    CZ,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CX,
        GateKind::CZ,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }

    /// Lower-case name used in backend snapshot files.
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
        }
    }

    /// 2×2 matrix of a single-qubit gate, row-major.
    pub fn matrix_1q(self, angle: f64) -> Option<[[Complex64; 2]; 2]> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Some(match self {
            GateKind::H => [[l * r, l * r], [l * r, -l * r]],
            GateKind::X => [[o, l], [l, o]],
            GateKind::Y => [[o, -i], [i, o]],
            GateKind::Z => [[l, o], [o, -l]],
            GateKind::S => [[l, o], [o, i]],
            GateKind::RX => [[l * c, -i * s], [-i * s, l * c]],
            GateKind::RY => [[l * c, -l * s], [l * s, l * c]],
            GateKind::RZ => [
                [Complex64::from_polar(1.0, -angle / 2.0), o],
                [o, Complex64::from_polar(1.0, angle / 2.0)],
            ],
            GateKind::CX | GateKind::CZ => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation angle: a literal in radians or an index into the circuit's
/// parameter list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Value(f64),
    Param(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// One target, or `[control, target]` for `CX`; `CZ` is symmetric.
    pub qubits: Vec<usize>,
    pub angle: Option<Angle>,
}

impl Gate {
    pub fn fixed(kind: GateKind, qubits: Vec<usize>) -> Self {
        Gate {
            kind,
            qubits,
            angle: None,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: Angle) -> Self {
        Gate {
            kind,
            qubits: vec![qubit],
            angle: Some(angle),
        }
    }

    /// Literal angle, or `None` if the gate is unrotated or still symbolic.
    pub fn literal_angle(&self) -> Option<f64> {
        match self.angle {
            Some(Angle::Value(v)) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    parameters: Vec<String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Dimension("a circuit needs at least one qubit".into()));
        }
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
            parameters: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Parameter names in binding order.
    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn is_bound(&self) -> bool {
        self.parameters.is_empty()
    }

    /// Registers a new symbol and returns its index.
    pub fn add_parameter(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if self.parameters.contains(&name) {
            return Err(Error::Spec(format!("duplicate parameter name {name}")));
        }
        self.parameters.push(name);
        Ok(self.parameters.len() - 1)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.qubits.len() != gate.kind.arity() {
            return Err(Error::Dimension(format!(
                "{} acts on {} qubits, got {:?}",
                gate.kind,
                gate.kind.arity(),
                gate.qubits
            )));
        }
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::Dimension(format!(
                "qubit {q} out of range for a {}-qubit circuit",
                self.n_qubits
            )));
        }
        if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
            return Err(Error::Dimension(format!(
                "{} needs distinct qubits, got {:?}",
                gate.kind, gate.qubits
            )));
        }
        if gate.kind.is_rotation() != gate.angle.is_some() {
            return Err(Error::Spec(format!(
                "{} must {}carry an angle",
                gate.kind,
                if gate.kind.is_rotation() { "" } else { "not " }
            )));
        }
        if let Some(Angle::Param(k)) = gate.angle {
            if k >= self.parameters.len() {
                return Err(Error::Binding(format!("parameter index {k}")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.push(Gate::fixed(GateKind::H, vec![q]))
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.push(Gate::fixed(GateKind::X, vec![q]))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Gate::fixed(GateKind::CX, vec![control, target]))
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.push(Gate::fixed(GateKind::CZ, vec![a, b]))
    }

    pub fn rotate(&mut self, kind: GateKind, q: usize, angle: Angle) -> Result<()> {
        self.push(Gate::rotation(kind, q, angle))
    }

    /// Appends a rotation driven by a fresh parameter `name`.
    pub fn rotate_param(&mut self, kind: GateKind, q: usize, name: impl Into<String>) -> Result<usize> {
        let k = self.add_parameter(name)?;
        self.rotate(kind, q, Angle::Param(k))?;
        Ok(k)
    }

    /// Indices of the gates that reference each parameter.
    pub fn parameter_occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.parameters.len()];
        for (g, gate) in self.gates.iter().enumerate() {
            if let Some(Angle::Param(k)) = gate.angle {
                occ[k].push(g);
            }
        }
        occ
    }

    /// Replaces every symbolic angle by its value; the result has no parameters.
    pub fn bind(&self, values: &[f64]) -> Result<Circuit> {
        if values.len() != self.parameters.len() {
            return Err(Error::Arity {
                expected: self.parameters.len(),
                got: values.len(),
            });
        }
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let mut g = g.clone();
                if let Some(Angle::Param(k)) = g.angle {
                    g.angle = Some(Angle::Value(values[k]));
                }
                g
            })
            .collect();
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
            parameters: Vec::new(),
        })
    }

    /// Binds `values`, then adds `shift` to the angle of gate `gate_index`.
    pub fn bind_shifted(&self, values: &[f64], gate_index: usize, shift: f64) -> Result<Circuit> {
        let mut bound = self.bind(values)?;
        let gate = bound
            .gates
            .get_mut(gate_index)
            .ok_or_else(|| Error::Argument(format!("no gate {gate_index}")))?;
        match gate.angle {
            Some(Angle::Value(v)) => gate.angle = Some(Angle::Value(v + shift)),
            _ => {
                return Err(Error::Argument(format!(
                    "gate {gate_index} ({}) has no angle to shift",
                    gate.kind
                )))
            }
        }
        Ok(bound)
    }
}
