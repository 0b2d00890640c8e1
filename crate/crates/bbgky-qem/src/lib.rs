//! BBGKY-hierarchy-informed error mitigation for noisy quantum spin-chain
//! simulations.
//!
//! The crate builds the extended qubit BBGKY hierarchy of equations of motion
//! for arbitrary time-dependent Pauli-sum Hamiltonians, simulates Trotterized
//! ideal and noisy spin-chain dynamics, and recovers mitigated observable
//! trajectories by simulated-annealing sampling of a physics-constrained
//! action. A lattice Schwinger-model builder and its electric-current
//! observable are included as the reference workload.
//!
//! Modules, bottom up:
//!
//! - [`pauli`] — exact sparse Pauli-string algebra (products, brackets,
//!   f-factors, length bounds).
//! - [`hamiltonian`] — time-dependent Pauli-sum Hamiltonians, the Schwinger
//!   builder, observable definitions and file ingestion.
//! - [`hierarchy`] — BBGKY equations, the immediate-connection graph, layer
//!   expansion, subhierarchy detection and z-ratios.
//! - [`simulator`] — statevector / density-matrix Trotter evolution,
//!   depolarizing noise, shot sampling and measurement tables.
//! - [`mitigation`] — configuration grid, finite-difference residuals, the
//!   quantum/BBGKY actions and the annealed Metropolis-Hastings chain.
//! - [`metrics`] — observable assembly with error propagation, trajectory
//!   norms and short-time quadratic fits.
//! - [`run`] — config-driven experiment orchestration behind the CLI.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod dense;
pub mod error;
pub mod hamiltonian;
pub mod hierarchy;
pub mod metrics;
pub mod mitigation;
pub mod pauli;
pub mod run;
pub mod seeds;
pub mod simulator;

pub use error::{Error, Result};
