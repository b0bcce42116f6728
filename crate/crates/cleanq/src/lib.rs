//! Density-matrix simulation of DQC-k ("k clean qubits") machines and a
//! verification harness for their state-synthesis bounds.
//!
//! A DQC-k machine receives `a` qubits prepared in |0⟩ together with `b`
//! maximally mixed qubits, applies one circuit `U`, and then either measures
//! or discards a register `C` of `c` qubits, leaving an output register `D`
//! of `d` qubits. This crate provides:
//!
//! * dense complex-matrix kernels ([`linalg`]),
//! * register bookkeeping and canonical state constructors ([`registers`]),
//! * the discarding and measuring output channels ([`channels`]),
//! * gate-level circuits, Haar sampling, and the named reference circuits
//!   ([`circuits`]),
//! * Gibbs states, entropies, and trace-distance tooling ([`thermo`]),
//! * one checker per impossibility bound, with seeded trial ensembles and
//!   saturation search ([`verify`]).
//!
//! Everything is deterministic given a seed: all randomness flows through
//! explicitly seeded generators, and parallel trial reductions are
//! order-independent.

pub mod channels;
pub mod circuits;
pub mod error;
pub mod linalg;
pub mod registers;
pub mod seeding;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, UnitaryMatrix};
pub use registers::{DensityMatrix, RegisterLayout};
