//! Numerical core for ballistic electron transport governed by stationary
//! Schrödinger equations of order `2s`, obtained by truncating the power-series
//! expansion of the isotropic Kane dispersion relation.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of its inputs; IO, configuration files and thread pools live in the
//! companion `kanewave` crate.
//!
//! Units: energies in eV, lengths in nm, wave vectors in nm⁻¹. Electrostatic
//! potentials are stored in volts and enter the Hamiltonian as `-qV` with the
//! elementary charge set to one, so a potential of `-0.3` V is a `+0.3` eV
//! barrier. Probability currents are reported in nm/fs.
//!
//! Module map:
//!
//! * [`dispersion`]: Kane coefficients, truncated dispersion and wave-vector modes.
//! * [`potential`]: piecewise-affine potentials, including the double-barrier RTD.
//! * [`scattering`]: transparent-boundary scattering solver.
//! * [`observables`]: generalized probability current and transmission.
//! * [`ensemble`]: Fermi–Dirac integration of density and electric current.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod dispersion;
pub mod ensemble;
mod error;
pub mod integrator;
pub mod linalg;
pub mod observables;
pub mod potential;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64;
