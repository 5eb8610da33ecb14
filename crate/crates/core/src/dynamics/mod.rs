//! Time evolution under a pulse: unitary Schrödinger stepping, Lindblad
//! dephasing on the row-vectorized density matrix, and fidelities.

mod fidelity;
mod lindblad;
mod schrodinger;

pub use fidelity::{pure_state_fidelity, uhlmann_fidelity};
pub use lindblad::{
    dephasing_jump, lindblad_rhs, lindblad_superoperator, lindblad_transfer_fidelity, propagate_lindblad, ChargeLayout,
    DephasingVariant, JumpOperator, LindbladMethod, LindbladOptions, LindbladRun,
};
pub use schrodinger::{propagate_schrodinger, transfer_probability, SchrodingerOptions, SchrodingerRun};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigensystem, norm, ComplexMatrix};
use crate::models::ParametricHamiltonian;
use crate::pulse::PulseSchedule;

/// Default number of propagation steps.
pub const DEFAULT_STEPS: usize = 20_000;

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub amplitudes: Vec<c64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<c64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("state norm {n}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut a = vec![c64::new(0.0, 0.0); dim];
        a[k] = c64::new(1.0, 0.0);
        Self { amplitudes: a }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { entries: ComplexMatrix::outer(&self.amplitudes) }
    }
}

/// Entry-wise tolerances for a valid density matrix.
pub const DENSITY_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    pub entries: ComplexMatrix,
}

impl DensityMatrix {
    /// Wraps `entries`, checking Hermiticity, unit trace and positivity.
    pub fn new(entries: ComplexMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::ShapeMismatch("density matrix must be square".into()));
        }
        let h = entries.hermiticity_deviation();
        if h > DENSITY_TOL {
            return Err(Error::NotHermitian { deviation: h });
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr}")));
        }
        let rho = Self { entries };
        let m = rho.min_eigenvalue()?;
        if m < -POSITIVITY_TOL {
            return Err(Error::PositivityViolation { min_eigenvalue: m });
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigensystem(&self.entries.hermitian_part())?.values[0])
    }
}

/// The single control coordinate, checking the model has exactly one.
pub(crate) fn single_parameter(model: &dyn ParametricHamiltonian) -> Result<()> {
    if model.num_params() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "pulse propagation needs a single-parameter model, got {}",
            model.num_params()
        )));
    }
    Ok(())
}

/// Instantaneous eigenvector `level` at the schedule value `eps`.
pub fn instantaneous_state(model: &dyn ParametricHamiltonian, eps: f64, level: usize) -> Result<StateVector> {
    let es = eigensystem(&model.h_at(&[eps])?)?;
    if level >= es.dim() {
        return Err(Error::ShapeMismatch(format!("level {level} out of range")));
    }
    Ok(StateVector { amplitudes: es.vector(level) })
}

pub(crate) fn check_steps(steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    Ok(())
}

pub(crate) fn midpoint(schedule: &PulseSchedule, steps: usize, k: usize) -> (f64, f64) {
    let dt = schedule.t_f / steps as f64;
    (dt, schedule.eps((k as f64 + 0.5) * dt))
}
