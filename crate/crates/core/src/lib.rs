//! Variational quantum eigensolver benchmarking toolkit.
//!
//! Qubit Hamiltonians are ingested as Pauli sums (or built from electronic
//! integrals through the Jordan–Wigner encoding), minimized over
//! hardware-efficient ansätze with one of four classical optimizers under an
//! exact, shot-sampled or noisy estimator, and compared against dense exact
//! diagonalization. The `bench` module sweeps those choices and emits
//! MAE / percent-error tables and bond-distance scans.

pub mod ansatz;
pub mod bench;
pub mod circuit;
pub mod error;
pub mod exact;
pub mod fermion;
pub mod gradient;
pub mod io;
pub mod noise;
pub mod optimize;
pub mod pauli;
pub mod rng;
pub mod statevector;
pub mod vqe;

pub use error::{Error, Result};
