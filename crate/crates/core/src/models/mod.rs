//! Parametric Hamiltonians: the Pauli qubit, the double-quantum-dot 3×3 and
//! 6×6 models, the effective Schrieffer-Wolff 2×2 model, a low-energy
//! two-level truncation and generic wrappers.

mod dqd;
mod generic;
mod pauli;
mod spec;
mod sw;
mod truncate;

use std::collections::BTreeMap;

pub use dqd::{Dqd3, Dqd6, DqdParams};
pub use generic::{FiniteDifferenceModel, ScaledModel};
pub use pauli::{PauliMode, PauliModel};
pub use spec::{AngularFactor, ModelKind, ModelSpec};
pub use sw::Sw2;
pub use truncate::{truncate_two_level, TruncatedModel};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// A Hermitian matrix-valued function of a few real control parameters.
pub trait ParametricHamiltonian: Send + Sync {
    fn dim(&self) -> usize;

    /// Names of the active parameters, in the order `h_at` expects them.
    fn param_names(&self) -> Vec<String>;

    /// Fixed (non-swept) energies, for provenance.
    fn fixed_params(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix>;

    /// `∂H/∂x^μ` at `x`.
    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix>;

    fn num_params(&self) -> usize {
        self.param_names().len()
    }

    /// Labels for the computational basis states.
    fn basis_labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("b{i}")).collect()
    }
}

pub(crate) fn check_point(model: &(impl ParametricHamiltonian + ?Sized), x: &[f64]) -> Result<()> {
    if x.len() != model.num_params() {
        return Err(Error::ShapeMismatch(format!("model takes {} parameters, got {}", model.num_params(), x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite parameter in {x:?}")));
    }
    Ok(())
}

pub(crate) fn check_mu(model: &(impl ParametricHamiltonian + ?Sized), mu: usize) -> Result<()> {
    if mu >= model.num_params() {
        return Err(Error::ShapeMismatch(format!("parameter index {mu} out of range")));
    }
    Ok(())
}
