//! Second-quantized operators, the Jordan–Wigner encoding and Hamiltonian
//! assembly from one- and two-electron integrals.
//!
//! Mode `p` maps to qubit `p`. Ladder operators carry a parity string of `Z`
//! on every mode with a strictly lower index:
//!
//! `a†_p = Z_0 … Z_{p-1} (X_p − iY_p)/2`, `a_p = Z_0 … Z_{p-1} (X_p + iY_p)/2`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum, DEFAULT_PRUNE};

/// One creation (`dagger = true`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }
}

/// Linear combination of products of ladder operators. An empty product is
/// the identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    pub terms: Vec<(Complex64, Vec<Ladder>)>,
}

impl FermionOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(coefficient: impl Into<Complex64>, product: Vec<Ladder>) -> Self {
        FermionOperator {
            terms: vec![(coefficient.into(), product)],
        }
    }

    pub fn push(&mut self, coefficient: impl Into<Complex64>, product: Vec<Ladder>) {
        self.terms.push((coefficient.into(), product));
    }

    pub fn extend(&mut self, other: FermionOperator) {
        self.terms.extend(other.terms);
    }

    /// Number operator `a†_p a_p`.
    pub fn number(mode: usize) -> Self {
        Self::term(1.0, vec![Ladder::create(mode), Ladder::annihilate(mode)])
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|(_, prod)| prod.iter().map(|l| l.mode))
            .max()
    }
}

fn ladder_image(ladder: Ladder, n_modes: usize) -> Result<PauliSum> {
    let mut parity = vec![Pauli::I; n_modes];
    for op in parity.iter_mut().take(ladder.mode) {
        *op = Pauli::Z;
    }
    let mut with_x = parity.clone();
    with_x[ladder.mode] = Pauli::X;
    let mut with_y = parity;
    with_y[ladder.mode] = Pauli::Y;
    let y_coef = if ladder.dagger { -0.5 } else { 0.5 };
    PauliSum::from_terms(
        n_modes,
        [
            (PauliString::from_ops(&with_x)?, Complex64::new(0.5, 0.0)),
            (PauliString::from_ops(&with_y)?, Complex64::new(0.0, y_coef)),
        ],
    )
}

/// Encodes a fermionic operator on `n_modes` modes as a qubit operator.
pub fn jordan_wigner(op: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    let mut cache: BTreeMap<(usize, bool), PauliSum> = BTreeMap::new();
    let mut out = PauliSum::zero(n_modes)?;
    for (coefficient, product) in &op.terms {
        let mut acc = PauliSum::identity(n_modes, 1.0)?;
        for ladder in product {
            if ladder.mode >= n_modes {
                return Err(Error::Dimension(format!(
                    "mode {} out of range for {n_modes} modes",
                    ladder.mode
                )));
            }
            let image = match cache.get(&(ladder.mode, ladder.dagger)) {
                Some(img) => img.clone(),
                None => {
                    let img = ladder_image(*ladder, n_modes)?;
                    cache.insert((ladder.mode, ladder.dagger), img.clone());
                    img
                }
            };
            acc = acc.try_mul(&image)?;
        }
        out = out.try_add(&acc.scale(*coefficient))?;
    }
    Ok(out.simplify(DEFAULT_PRUNE))
}

/// Two-electron integral index conventions accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `⟨pq|rs⟩ = ∫ φ_p(1) φ_q(2) r₁₂⁻¹ φ_r(1) φ_s(2)`.
    Physicist,
    /// `(pq|rs) = ∫ φ_p(1) φ_q(1) r₁₂⁻¹ φ_r(2) φ_s(2)`.
    Chemist,
}

/// Spin-orbital integrals with `h2` stored in physicist order.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub n_spin_orbitals: usize,
    pub core_energy: f64,
    pub h1: Vec<Vec<f64>>,
    pub h2: Vec<Vec<Vec<Vec<f64>>>>,
    pub metadata: BTreeMap<String, String>,
}

pub const INTEGRAL_SYMMETRY_TOL: f64 = 1e-8;

impl IntegralSet {
    pub fn zeros(n_spin_orbitals: usize) -> Self {
        let n = n_spin_orbitals;
        IntegralSet {
            n_spin_orbitals: n,
            core_energy: 0.0,
            h1: vec![vec![0.0; n]; n],
            h2: vec![vec![vec![vec![0.0; n]; n]; n]; n],
            metadata: BTreeMap::new(),
        }
    }

    /// Transposes a chemist-ordered tensor `(pq|rs)` to physicist `⟨pr|qs⟩`.
    pub fn chemist_to_physicist(chem: &[Vec<Vec<Vec<f64>>>]) -> Vec<Vec<Vec<Vec<f64>>>> {
        let n = chem.len();
        let mut phys = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        phys[p][r][q][s] = chem[p][q][r][s];
                    }
                }
            }
        }
        phys
    }

    /// Checks shape, the even spin-orbital count, `h1` symmetry and the
    /// physicist-order symmetries `⟨pq|rs⟩ = ⟨qp|sr⟩ = ⟨rs|pq⟩`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n_spin_orbitals;
        if n == 0 || n % 2 != 0 {
            return Err(Error::Constraint(format!(
                "{n} spin orbitals: active spaces must hold an even number of spin orbitals \
                 (even electron count in the active and inactive spaces)"
            )));
        }
        if self.h1.len() != n || self.h1.iter().any(|row| row.len() != n) {
            return Err(Error::Integral(format!("h1 must be {n}x{n}")));
        }
        let h2_ok = self.h2.len() == n
            && self.h2.iter().all(|a| {
                a.len() == n && a.iter().all(|b| b.len() == n && b.iter().all(|c| c.len() == n))
            });
        if !h2_ok {
            return Err(Error::Integral(format!("h2 must be {n}x{n}x{n}x{n}")));
        }
        for p in 0..n {
            for q in 0..n {
                let (a, b) = (self.h1[p][q], self.h1[q][p]);
                if (a - b).abs() > tol {
                    return Err(Error::Integral(format!(
                        "h1 not symmetric: h1[{p}][{q}] = {a} but h1[{q}][{p}] = {b}"
                    )));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.h2[p][q][r][s];
                        let swapped = self.h2[q][p][s][r];
                        let adjoint = self.h2[r][s][p][q];
                        if (v - swapped).abs() > tol || (v - adjoint).abs() > tol {
                            return Err(Error::Integral(format!(
                                "h2 symmetry violated at <{p}{q}|{r}{s}> = {v} \
                                 (<{q}{p}|{s}{r}> = {swapped}, <{r}{s}|{p}{q}> = {adjoint})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The second-quantized Hamiltonian
    /// `E_core + Σ h1[p][q] a†_p a_q + ½ Σ ⟨pq|rs⟩ a†_p a†_q a_s a_r`.
    pub fn fermion_operator(&self) -> FermionOperator {
        let n = self.n_spin_orbitals;
        let mut op = FermionOperator::new();
        if self.core_energy != 0.0 {
            op.push(self.core_energy, vec![]);
        }
        for p in 0..n {
            for q in 0..n {
                let v = self.h1[p][q];
                if v != 0.0 {
                    op.push(v, vec![Ladder::create(p), Ladder::annihilate(q)]);
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.h2[p][q][r][s];
                        if v != 0.0 && p != q && r != s {
                            op.push(
                                0.5 * v,
                                vec![
                                    Ladder::create(p),
                                    Ladder::create(q),
                                    Ladder::annihilate(s),
                                    Ladder::annihilate(r),
                                ],
                            );
                        }
                    }
                }
            }
        }
        op
    }
}

/// Imaginary parts at or above this magnitude mark a non-Hermitian build.
pub const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-10;

/// Builds the qubit Hamiltonian for an integral set via Jordan–Wigner.
pub fn build_hamiltonian(ints: &IntegralSet) -> Result<PauliSum> {
    let n = ints.n_spin_orbitals;
    if n == 0 {
        return Err(Error::Constraint("integral set has no spin orbitals".into()));
    }
    let h = jordan_wigner(&ints.fermion_operator(), n)?;
    // An all-zero operator still needs a representable identity term.
    let h = if h.is_empty() {
        PauliSum::zero(n)?
    } else {
        h
    };
    if let Some((term, imag)) = h.max_imaginary() {
        if imag >= HAMILTONIAN_HERMITIAN_TOL {
            return Err(Error::IntegralConvention {
                term: term.to_label(),
                imag,
            });
        }
    }
    let real = PauliSum::from_terms(
        n,
        h.terms().map(|(p, c)| (*p, Complex64::new(c.re, 0.0))),
    )?;
    Ok(real.simplify(DEFAULT_PRUNE))
}
