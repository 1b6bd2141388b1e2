//! Rydberg-dressed phonon-swap simulation.
//!
//! The crate computes state-insensitive van der Waals interactions between
//! Rydberg atoms from angular algebra and quantum-defect radial integrals,
//! turns them into laser-dressed soft-core potentials, and simulates the
//! phonon exchange between data and auxiliary atoms that those potentials
//! drive.
//!
//! Modules, bottom up:
//!
//! - [`angular`]: Wigner symbols, Clebsch-Gordan coefficients, the dipole
//!   angular factor.
//! - [`atomdata`]: species files, Rydberg-Ritz energies, Numerov radial
//!   wavefunctions and matrix elements, lifetimes.
//! - [`vdw`]: channel sums, the Zeeman-basis interaction matrix and its
//!   deviation from identity.
//! - [`dressing`]: dressed potentials and their exact-diagonalization check.
//! - [`phonons`]: chain couplings, Gaussian dynamics, the Bessel formula.
//! - [`adiabatic`]: equilibrium tracking and pulse design for the
//!   three-axis swap.
//! - [`selftest`]: the acceptance criteria, shared by tests and the CLI.
//!
//! Units are listed in [`units`].

pub mod adiabatic;
pub mod angular;
pub mod atomdata;
pub mod dressing;
mod error;
pub mod keyfile;
pub mod par;
pub mod phonons;
pub mod selftest;
pub mod units;
pub mod vdw;

pub use error::{Error, Result};
