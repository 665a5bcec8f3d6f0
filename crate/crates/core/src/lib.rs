//! Ground and low-lying excited states of small Fermi-Hubbard lattices.
//!
//! The crate pairs a variational solver (a Hamiltonian-variational circuit with
//! one free angle per gate, optimized by a derivative-free stage followed by
//! quasi-Newton refinement) with an exact-diagonalization reference, and
//! derives charge- and spin-gap diagrams over electron number and `U/t`.
//!
//! ```
//! use hubbard_vqe::{exactdiag::exact_spectrum, lattice::LatticeGeometry};
//!
//! let chain: LatticeGeometry = "4x1".parse().unwrap();
//! let spectrum = exact_spectrum(&chain, 0.0, 2, 2, 1).unwrap();
//! assert!((spectrum.energies[0] + 4.4721).abs() < 1e-4);
//! ```

pub mod ansatz;
pub mod error;
pub mod exactdiag;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod optim;
pub mod seed;
pub mod simulator;
pub mod vqe;

pub use error::{Error, Result};
