//! Hamiltonian-level to QEC-level simulation of superconducting processors.
//!
//! The crate covers the full pipeline from a parameterized fluxonium-lattice
//! Hamiltonian to surface-code logical error rates, plus gradients of those
//! rates with respect to device and control parameters:
//!
//! 1. [`device`] — single-fluxonium spectra and the coupled idling
//!    Hamiltonian of a frequency-patterned lattice with fabrication disorder.
//! 2. [`control`] — time-dependent drives (simultaneous X gates,
//!    cross-resonance CNOTs) and the virtual compensation applied around a
//!    gate round.
//! 3. [`evolve`] — Trotterized state-vector evolution, computational-subspace
//!    selection with phase fixing, Walsh (eigenvalue-crosstalk) analysis, and
//!    round-unitary extraction with leakage accounting.
//! 4. [`twirl`] — Pauli twirling of unitary errors and aggregation into the
//!    uniform locally-correlated Pauli error model (LCPEM).
//! 5. [`circuit`] — surface-code syndrome extraction circuits and Pauli-frame
//!    sampling of LCPEM noise on the full lattice.
//! 6. [`decode`] — detector graphs, union-find decoding, and Monte-Carlo
//!    logical error rates.
//! 7. [`oracle`] — independent small-scale references: toric-code ballistic
//!    noise, color-split decoding, the low-rate logical formula, average
//!    fidelity, and a brute-force minimum-weight decoder.
//! 8. [`optim`] — fidelity objectives, control optimization, adjoint
//!    gradients of LCPEM rates, finite-difference gradients of the logical
//!    error rate, and the chained objective.
//!
//! The `hamqec` binary exposes the workflow as subcommands
//! (`walsh | gate-errors | qec | grad | toy`); the `examples/` directory has
//! one runnable example per capability.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod control;
pub mod decode;
pub mod device;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod optim;
pub mod oracle;
pub mod rng;
pub mod twirl;

pub use error::{Error, Result};
