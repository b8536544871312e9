//! Dense exact diagonalization of qubit Hamiltonians.
//!
//! The Hermitian matrix is reduced to real symmetric tridiagonal form by
//! Householder reflections followed by a diagonal phase similarity, and the
//! tridiagonal problem is solved by implicit QL iteration with Wilkinson
//! shifts.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Widest Hamiltonian accepted by the dense solver.
pub const MAX_EXACT_QUBITS: usize = 14;

/// Coefficients with an imaginary part at or above this are non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Frobenius norm, an upper bound on the spectral norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Materializes a Pauli sum as a `2^n × 2^n` matrix (little-endian basis).
pub fn dense_matrix(h: &PauliSum) -> Result<DenseMatrix> {
    let n = h.n_qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::Capacity {
            what: "dense matrix",
            requested: n,
            cap: MAX_EXACT_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DenseMatrix::zeros(dim);
    for (p, coef) in h.terms() {
        for col in 0..dim {
            let (phase, row) = p.apply_to_basis(col);
            m[(row, col)] += coef * phase;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending, in the Hamiltonian's unit.
    pub eigenvalues: Vec<f64>,
    /// Normalized eigenvector of the lowest eigenvalue, when requested.
    pub ground_state: Option<Vec<Complex64>>,
}

fn hermitian_matrix(h: &PauliSum) -> Result<DenseMatrix> {
    if h.n_qubits() > MAX_EXACT_QUBITS {
        return Err(Error::Capacity {
            what: "exact diagonalization",
            requested: h.n_qubits(),
            cap: MAX_EXACT_QUBITS,
        });
    }
    h.check_hermitian(HERMITIAN_TOL)?;
    dense_matrix(h)
}

pub fn ground_energy(h: &PauliSum) -> Result<f64> {
    Ok(full_spectrum(h)?.eigenvalues[0])
}

pub fn full_spectrum(h: &PauliSum) -> Result<Spectrum> {
    let m = hermitian_matrix(h)?;
    let (eigenvalues, _) = eigh(&m, false);
    Ok(Spectrum {
        eigenvalues,
        ground_state: None,
    })
}

/// Spectrum with the ground-state vector retained.
pub fn spectrum_with_ground_state(h: &PauliSum) -> Result<Spectrum> {
    let m = hermitian_matrix(h)?;
    let (eigenvalues, vectors) = eigh(&m, true);
    Ok(Spectrum {
        eigenvalues,
        ground_state: vectors.map(|mut v| v.swap_remove(0)),
    })
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are ascending;
/// eigenvectors (if requested) follow the same order.
pub fn eigh(m: &DenseMatrix, want_vectors: bool) -> (Vec<f64>, Option<Vec<Vec<Complex64>>>) {
    let n = m.dim();
    if n == 1 {
        let vecs = want_vectors.then(|| vec![vec![Complex64::new(1.0, 0.0)]]);
        return (vec![m[(0, 0)].re], vecs);
    }
    let mut a = m.clone();
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        let off = k + 1;
        let len = n - off;

        // p = tau * A_sub v, on the trailing block.
        let mut p = vec![Complex64::new(0.0, 0.0); len];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = (off + i) * n + off;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                acc += a.data[row + j] * vj;
            }
            *pi = acc * tau;
        }
        let kk: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum::<Complex64>() * 0.5 * tau;
        let q: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for i in 0..len {
            let row = (off + i) * n + off;
            for j in 0..len {
                a.data[row + j] -= v[i] * q[j].conj() + q[i] * v[j].conj();
            }
        }
        // Column k below the subdiagonal becomes (alpha, 0, …).
        a[(off, k)] = alpha;
        a[(k, off)] = alpha.conj();
        for i in off + 1..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
            a[(k, i)] = Complex64::new(0.0, 0.0);
        }
        if want_vectors {
            reflectors.push((off, v, tau));
        }
    }

    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let sub = a[(i + 1, i)];
        let mag = sub.norm();
        e[i] = mag;
        phases[i + 1] = if mag > 0.0 {
            phases[i] * sub / mag
        } else {
            phases[i]
        };
    }

    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    tridiagonal_ql(&mut d, &mut e, z.as_deref_mut());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();

    let vectors = z.map(|z| {
        order
            .iter()
            .map(|&col| {
                let mut v: Vec<Complex64> = (0..n).map(|row| phases[row] * z[row * n + col]).collect();
                for (off, u, tau) in reflectors.iter().rev() {
                    let dot: Complex64 = u
                        .iter()
                        .enumerate()
                        .map(|(i, ui)| ui.conj() * v[off + i])
                        .sum::<Complex64>()
                        * *tau;
                    for (i, ui) in u.iter().enumerate() {
                        v[off + i] -= ui * dot;
                    }
                }
                v
            })
            .collect()
    });
    (eigenvalues, vectors)
}

/// Implicit QL on a symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e` (`e[i]` couples `i` and `i + 1`, `e[n-1]` unused).
/// On return `d` holds the eigenvalues; `z`, if given, is right-multiplied
/// by the accumulated rotations (row-major `n × n`).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) {
    let n = d.len();
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                // Unconverged entries are left as-is; observed only on
                // pathological inputs far outside this crate's use.
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}
