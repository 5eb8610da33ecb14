//! Adiabatic pulse synthesis from the quantum metric tensor of a parametric
//! Hamiltonian, with unitary and Lindblad dynamics to validate the pulses.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: small dense complex matrices, Jacobi eigensolver, exponentials.
//! - [`models`]: parametric Hamiltonians (Pauli qubit, double-dot 3×3 / 6×6,
//!   effective 2×2) and a low-energy truncation.
//! - [`metric`]: quantum geometric tensor, finite-difference oracle, pullback.
//! - [`pulse`]: linear and geometric fast-QUAD schedules.
//! - [`dynamics`]: Schrödinger / Lindblad propagation and fidelities.
//! - [`noise`]: quasistatic detuning and miscalibration studies.
//! - [`harness`]: experiment configs, sweeps and CSV/JSON/SVG output.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metric;
pub mod models;
pub mod noise;
pub mod par;
pub mod pulse;

pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, EigenSystem};
pub use models::ParametricHamiltonian;
