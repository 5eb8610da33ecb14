//! Dense complex linear algebra for small matrices (dimension up to a few
//! dozen): Hermitian eigendecomposition by cyclic Jacobi rotations, matrix
//! exponentials, Kronecker products and row vectorization.

mod eigen;
pub(crate) mod expm;
mod matrix;

pub use eigen::{eigensystem, eigensystem_unchecked, EigenSystem, HERMITIAN_TOL};
pub use expm::{expm, expm_action, expm_unitary};
pub use matrix::{c64, kron, unvec_row, vec_row, ComplexMatrix};

/// Inner product ⟨a|b⟩.
pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `1 - |⟨a|b⟩|²` for unit vectors, evaluated as the squared norm of the
/// component of `b` orthogonal to `a` so small infidelities keep full
/// relative precision.
pub fn infidelity(a: &[c64], b: &[c64]) -> f64 {
    let ov = inner(a, b);
    a.iter().zip(b).map(|(x, y)| (y - ov * x).norm_sqr()).sum()
}
