//! Pauli strings and weighted sums of them.
//!
//! A string over `n` qubits is stored as a pair of bitmasks in the symplectic
//! form `P = i^{|x & z|} X^x Z^z`, so `Y` on qubit `q` sets bit `q` in both
//! masks. Qubit 0 is the least significant bit everywhere in this crate.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Widest string representable by the bitmask layout.
pub const MAX_PAULI_QUBITS: usize = 64;

/// Default threshold below which coefficients are dropped by [`PauliSum::simplify`].
pub const DEFAULT_PRUNE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// Tensor product of single-qubit Paulis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_PAULI_QUBITS {
        return Err(Error::Dimension(format!(
            "Pauli strings need 1..={MAX_PAULI_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(PauliString {
            n_qubits,
            x: 0,
            z: 0,
        })
    }

    /// Builds a string from per-qubit operators, `ops[q]` acting on qubit `q`.
    pub fn from_ops(ops: &[Pauli]) -> Result<Self> {
        check_width(ops.len())?;
        let (mut x, mut z) = (0u64, 0u64);
        for (q, op) in ops.iter().enumerate() {
            let (xb, zb) = op.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(PauliString {
            n_qubits: ops.len(),
            x,
            z,
        })
    }

    /// A single operator on qubit `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, op: Pauli) -> Result<Self> {
        check_width(n_qubits)?;
        if qubit >= n_qubits {
            return Err(Error::Dimension(format!(
                "qubit {qubit} out of range for {n_qubits} qubits"
            )));
        }
        let mut s = PauliString::identity(n_qubits)?;
        s.set(qubit, op);
        Ok(s)
    }

    /// Raw symplectic constructor; bits above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        check_width(n_qubits)?;
        let valid = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        if (x | z) & !valid != 0 {
            return Err(Error::Dimension(format!(
                "mask bits set beyond qubit {}",
                n_qubits - 1
            )));
        }
        Ok(PauliString { n_qubits, x, z })
    }

    /// Parses a human-ordered label: the leftmost character acts on the
    /// highest-index qubit, so `"XZ"` is `X` on qubit 1 and `Z` on qubit 0.
    pub fn from_label(label: &str) -> Result<Self> {
        let chars: Vec<char> = label.chars().collect();
        let n = chars.len();
        check_width(n)?;
        let mut ops = vec![Pauli::I; n];
        for (pos, c) in chars.iter().enumerate() {
            let op = Pauli::from_char(*c).ok_or_else(|| {
                Error::parse(
                    format!("character {pos} of \"{label}\""),
                    format!("invalid Pauli character '{c}'"),
                )
            })?;
            ops[n - 1 - pos] = op;
        }
        PauliString::from_ops(&ops)
    }

    /// Inverse of [`PauliString::from_label`].
    pub fn to_label(&self) -> String {
        (0..self.n_qubits).rev().map(|q| self.op(q).as_char()).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits acted on non-trivially.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn op(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.op(q)).collect()
    }

    fn set(&mut self, qubit: usize, op: Pauli) {
        let (xb, zb) = op.bits();
        self.x = (self.x & !(1 << qubit)) | ((xb as u64) << qubit);
        self.z = (self.z & !(1 << qubit)) | ((zb as u64) << qubit);
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product `self · other` as a unit phase and a string.
    pub fn multiply(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "cannot multiply {}-qubit and {}-qubit strings",
                self.n_qubits, other.n_qubits
            )));
        }
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 4
            - ((x & z).count_ones() % 4);
        Ok((
            i_pow(k),
            PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        ))
    }

    /// Action on a computational basis state: `P|index⟩ = phase · |image⟩`.
    #[inline]
    pub fn apply_to_basis(&self, index: usize) -> (Complex64, usize) {
        let sign = ((index as u64) & self.z).count_ones();
        (i_pow(self.y_count() + 2 * sign), index ^ self.x as usize)
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({})", self.to_label())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_label())
    }
}

/// Weighted sum of Pauli strings over a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    /// The zero operator.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    pub fn identity(n_qubits: usize, coefficient: f64) -> Result<Self> {
        let mut s = PauliSum::zero(n_qubits)?;
        s.add_term(PauliString::identity(n_qubits)?, coefficient.into())?;
        Ok(s)
    }

    /// Collects terms, merging duplicates by addition.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut s = PauliSum::zero(n_qubits)?;
        for (p, c) in terms {
            s.add_term(p, c)?;
        }
        Ok(s)
    }

    /// Convenience for real-weighted sums written with human labels.
    pub fn from_labels(terms: &[(&str, f64)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Argument("from_labels needs at least one term".into()))?;
        let n = first.0.chars().count();
        let mut s = PauliSum::zero(n)?;
        for (label, c) in terms {
            s.add_term(PauliString::from_label(label)?, Complex64::new(*c, 0.0))?;
        }
        Ok(s)
    }

    pub fn add_term(&mut self, string: PauliString, coefficient: Complex64) -> Result<()> {
        if string.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "term {} has {} qubits, sum has {}",
                string,
                string.n_qubits(),
                self.n_qubits
            )));
        }
        *self.terms.entry(string).or_insert(Complex64::new(0.0, 0.0)) += coefficient;
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms
            .get(string)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Coefficient of the all-identity string.
    pub fn constant(&self) -> Complex64 {
        PauliString::identity(self.n_qubits)
            .map(|id| self.coefficient(&id))
            .unwrap_or_default()
    }

    /// Drops terms with `|coefficient| < prune_below`. Duplicates are already
    /// merged on insertion.
    pub fn simplify(&self, prune_below: f64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() >= prune_below && c.norm() > 0.0)
                .map(|(p, c)| (*p, *c))
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c * factor)).collect(),
        }
    }

    pub fn try_add(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = self.clone();
        for (p, c) in other.terms() {
            out.add_term(*p, *c)?;
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "cannot multiply {}-qubit and {}-qubit sums",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut out = PauliSum::zero(self.n_qubits)?;
        for (pa, ca) in self.terms() {
            for (pb, cb) in other.terms() {
                let (phase, p) = pa.multiply(pb)?;
                out.add_term(p, phase * ca * cb)?;
            }
        }
        Ok(out)
    }

    /// Largest imaginary part among the coefficients, with its string.
    pub fn max_imaginary(&self) -> Option<(PauliString, f64)> {
        self.terms
            .iter()
            .map(|(p, c)| (*p, c.im.abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imaginary().map_or(true, |(_, im)| im < tol)
    }

    /// Errors with the offending term when any coefficient has an
    /// imaginary part of at least `tol`.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        match self.max_imaginary() {
            Some((p, im)) if im >= tol => Err(Error::Observable {
                term: p.to_label(),
                coefficient: format!("{}", self.coefficient(&p)),
            }),
            _ => Ok(()),
        }
    }

    /// Sum of absolute coefficient values; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;

    /// Panics on width mismatch; use [`PauliSum::try_add`] for fallible addition.
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(rhs).expect("PauliSum widths differ")
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;

    /// Panics on width mismatch; use [`PauliSum::try_mul`] for fallible products.
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.try_mul(rhs).expect("PauliSum widths differ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    type Mat = Vec<Vec<Complex64>>;

    fn single_matrix(p: Pauli) -> [[Complex64; 2]; 2] {
        let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        match p {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    /// Kronecker-product oracle, independent of the bitmask layout.
    fn dense(s: &PauliString) -> Mat {
        let n = s.n_qubits();
        let dim = 1usize << n;
        let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
        for (r, row) in m.iter_mut().enumerate() {
            for (col, entry) in row.iter_mut().enumerate() {
                let mut v = c(1.0, 0.0);
                for q in 0..n {
                    v *= single_matrix(s.op(q))[r >> q & 1][col >> q & 1];
                }
                *entry = v;
            }
        }
        m
    }

    fn matmul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        let mut out = vec![vec![c(0.0, 0.0); n]; n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn dense_sum(s: &PauliSum) -> Mat {
        let dim = 1usize << s.n_qubits();
        let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
        for (p, coef) in s.terms() {
            let d = dense(p);
            for i in 0..dim {
                for j in 0..dim {
                    m[i][j] += coef * d[i][j];
                }
            }
        }
        m
    }

    #[test]
    fn x_times_y_is_i_z() {
        let x = PauliString::from_label("X").unwrap();
        let y = PauliString::from_label("Y").unwrap();
        let (phase, p) = x.multiply(&y).unwrap();
        assert_eq!(phase, c(0.0, 1.0));
        assert_eq!(p.to_label(), "Z");
    }

    #[test]
    fn involution() {
        let xi = PauliString::from_label("XI").unwrap();
        let (phase, p) = xi.multiply(&xi).unwrap();
        assert_eq!(phase, c(1.0, 0.0));
        assert!(p.is_identity());
        assert_eq!(p.to_label(), "II");
    }

    #[test]
    fn two_qubit_product_matches_dense_oracle() {
        let a = PauliString::from_label("XZ").unwrap();
        let b = PauliString::from_label("YX").unwrap();
        let (phase, p) = a.multiply(&b).unwrap();
        let lhs = matmul(&dense(&a), &dense(&b));
        let rhs = dense(&p);
        for i in 0..4 {
            for j in 0..4 {
                assert!((lhs[i][j] - phase * rhs[i][j]).norm() < 1e-15);
            }
        }
        // X·Y = iZ on the high qubit, Z·X = iY on the low qubit.
        assert_eq!(p.to_label(), "ZY");
        assert_eq!(phase, c(-1.0, 0.0));
    }

    #[test]
    fn every_single_qubit_product_matches_matrices() {
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for a in all {
            for b in all {
                let pa = PauliString::from_ops(&[a]).unwrap();
                let pb = PauliString::from_ops(&[b]).unwrap();
                let (phase, p) = pa.multiply(&pb).unwrap();
                let lhs = matmul(&dense(&pa), &dense(&pb));
                let rhs = dense(&p);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((lhs[i][j] - phase * rhs[i][j]).norm() < 1e-15, "{a:?}{b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_widths_are_rejected() {
        let a = PauliString::from_label("X").unwrap();
        let b = PauliString::from_label("XX").unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::Dimension(_))));
    }

    #[test]
    fn label_order_is_big_endian() {
        let p = PauliString::from_label("XZI").unwrap();
        assert_eq!(p.op(0), Pauli::I);
        assert_eq!(p.op(1), Pauli::Z);
        assert_eq!(p.op(2), Pauli::X);
        assert_eq!(p.to_label(), "XZI");
        let err = PauliString::from_label("XW").unwrap_err();
        assert!(err.to_string().contains("'W'"), "{err}");
    }

    #[test]
    fn basis_action_matches_dense() {
        for label in ["XYZ", "YYI", "ZIX", "III", "YZY"] {
            let p = PauliString::from_label(label).unwrap();
            let d = dense(&p);
            for col in 0..8 {
                let (phase, row) = p.apply_to_basis(col);
                assert!((d[row][col] - phase).norm() < 1e-15, "{label} col {col}");
            }
        }
    }

    #[test]
    fn simplify_merges_and_prunes() {
        let z = PauliString::from_label("Z").unwrap();
        let x = PauliString::from_label("X").unwrap();
        let s = PauliSum::from_terms(1, [(z, c(1.0, 0.0)), (z, c(1.0, 0.0))]).unwrap();
        let s = s.simplify(DEFAULT_PRUNE);
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&z), c(2.0, 0.0));

        let tiny = PauliSum::from_terms(1, [(x, c(1e-15, 0.0))]).unwrap();
        assert!(tiny.simplify(1e-12).is_empty());
    }

    #[test]
    fn simplify_preserves_dense_operator() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut s = PauliSum::zero(3).unwrap();
        for _ in 0..30 {
            let ops: Vec<Pauli> = (0..3).map(|_| all[rng.gen_range(0..4)]).collect();
            let coef = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            s.add_term(PauliString::from_ops(&ops).unwrap(), coef).unwrap();
        }
        s.add_term(PauliString::from_label("XYZ").unwrap(), c(1e-14, 0.0))
            .unwrap();
        let simplified = s.simplify(1e-12);
        let (a, b) = (dense_sum(&s), dense_sum(&simplified));
        for i in 0..8 {
            for j in 0..8 {
                assert!((a[i][j] - b[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermiticity_check_names_term() {
        let s = PauliSum::from_terms(
            1,
            [(PauliString::from_label("Z").unwrap(), c(1.0, 0.5))],
        )
        .unwrap();
        assert!(!s.is_hermitian(1e-12));
        match s.check_hermitian(1e-12) {
            Err(Error::Observable { term, .. }) => assert_eq!(term, "Z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pauli() -> impl Strategy<Value = Pauli> {
            prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
        }

        proptest! {
            #[test]
            fn product_is_closed_with_unit_phase(
                a in proptest::collection::vec(pauli(), 1..6),
                b in proptest::collection::vec(pauli(), 1..6),
            ) {
                let n = a.len().min(b.len());
                let pa = PauliString::from_ops(&a[..n]).unwrap();
                let pb = PauliString::from_ops(&b[..n]).unwrap();
                let (phase, p) = pa.multiply(&pb).unwrap();
                prop_assert_eq!(p.n_qubits(), n);
                let units = [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
                prop_assert!(units.contains(&phase));
                // Commuting strings give a real phase, anticommuting an imaginary one.
                prop_assert_eq!(pa.commutes_with(&pb), phase.im == 0.0);
            }

            #[test]
            fn label_round_trip(ops in proptest::collection::vec(pauli(), 1..12)) {
                let p = PauliString::from_ops(&ops).unwrap();
                prop_assert_eq!(PauliString::from_label(&p.to_label()).unwrap(), p);
                prop_assert_eq!(p.ops(), ops);
            }
        }
    }
}
