use serde::Serialize;

use super::{check_steps, instantaneous_state, midpoint, single_parameter, StateVector, DEFAULT_STEPS};
use crate::error::{Error, Result};
use crate::linalg::{c64, expm_unitary, inner, norm};
use crate::models::ParametricHamiltonian;
use crate::pulse::PulseSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchrodingerOptions {
    pub steps: usize,
    /// Store every n-th state (0 keeps only the final one).
    pub record_every: usize,
}

impl Default for SchrodingerOptions {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, record_every: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchrodingerRun {
    pub psi: StateVector,
    /// `| ‖ψ(t_f)‖ - 1 |` before renormalization.
    pub norm_drift: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

/// Midpoint piecewise-constant stepping
/// `ψ_{k+1} = exp(-i H(ε(t_k + dt/2)) dt) ψ_k`.
pub fn propagate_schrodinger(
    model: &dyn ParametricHamiltonian,
    schedule: &PulseSchedule,
    psi0: &StateVector,
    opts: &SchrodingerOptions,
) -> Result<SchrodingerRun> {
    single_parameter(model)?;
    check_steps(opts.steps)?;
    if psi0.dim() != model.dim() {
        return Err(Error::ShapeMismatch(format!("state has dimension {}, model {}", psi0.dim(), model.dim())));
    }
    let mut psi = psi0.amplitudes.clone();
    let mut times = Vec::new();
    let mut states = Vec::new();
    if opts.record_every > 0 {
        times.push(0.0);
        states.push(psi0.clone());
    }
    for k in 0..opts.steps {
        let (dt, eps) = midpoint(schedule, opts.steps, k);
        let u = expm_unitary(&model.h_at(&[eps])?, dt)?;
        psi = u.mul_vec(&psi);
        if opts.record_every > 0 && ((k + 1) % opts.record_every == 0 || k + 1 == opts.steps) {
            times.push((k + 1) as f64 * dt);
            states.push(StateVector { amplitudes: psi.clone() });
        }
    }
    let n = norm(&psi);
    let norm_drift = (n - 1.0).abs();
    if norm_drift > 1e-12 {
        log::debug!("Schrödinger norm drift {norm_drift:.3e} renormalized");
    }
    for a in psi.iter_mut() {
        *a /= c64::new(n, 0.0);
    }
    Ok(SchrodingerRun { psi: StateVector { amplitudes: psi }, norm_drift, times, states })
}

/// `|⟨ψ_level(t_f)|ψ(t_f)⟩|²` starting from the instantaneous eigenstate
/// `level` at `ε(0)`.
pub fn transfer_probability(
    model: &dyn ParametricHamiltonian,
    schedule: &PulseSchedule,
    level: usize,
    steps: usize,
) -> Result<f64> {
    single_parameter(model)?;
    let psi0 = instantaneous_state(model, schedule.eps(0.0), level)?;
    let run = propagate_schrodinger(model, schedule, &psi0, &SchrodingerOptions { steps, record_every: 0 })?;
    let target = instantaneous_state(model, schedule.eps(schedule.t_f), level)?;
    Ok(inner(&target.amplitudes, &run.psi.amplitudes).norm_sqr().min(1.0))
}
