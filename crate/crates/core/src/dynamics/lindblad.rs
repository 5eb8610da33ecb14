use serde::{Deserialize, Serialize};

use super::{
    check_steps, instantaneous_state, midpoint, pure_state_fidelity, single_parameter, DensityMatrix, DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::linalg::expm::{expm_action_in_place, ActionScratch};
use crate::linalg::{c64, expm, kron, unvec_row, vec_row, ComplexMatrix};
use crate::models::ParametricHamiltonian;
use crate::pulse::PulseSchedule;

/// Hard limit on the Hermiticity defect removed by per-step symmetrization.
const HERMITICITY_LIMIT: f64 = 1e-6;
/// Hard limit on negative eigenvalues of ρ.
const POSITIVITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpOperator {
    pub matrix: ComplexMatrix,
    pub label: String,
}

impl JumpOperator {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_finite() || !matrix.is_square() {
            return Err(Error::InvalidParameter("jump operator must be square and finite".into()));
        }
        Ok(Self { matrix, label: label.into() })
    }
}

/// Which basis states carry a doubly occupied dot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeLayout {
    pub dim: usize,
    pub doubly_occupied: Vec<usize>,
}

impl ChargeLayout {
    /// S(2,0), S(1,1), T₀(1,1).
    pub fn dqd3() -> Self {
        Self { dim: 3, doubly_occupied: vec![0] }
    }

    /// S(0,2), S(2,0) followed by the four (1,1) spin states.
    pub fn dqd6() -> Self {
        Self { dim: 6, doubly_occupied: vec![0, 1] }
    }

    /// Layout matching a model's dimension, if it is a known one.
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            3 => Ok(Self::dqd3()),
            6 => Ok(Self::dqd6()),
            2 => Ok(Self { dim: 2, doubly_occupied: vec![0] }),
            d => Err(Error::ShapeMismatch(format!("no charge layout for dimension {d}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingVariant {
    /// `√(1/2T₂)` times +1 on doubly occupied states and −1 elsewhere.
    #[default]
    A,
    /// `√(2/T₂)` times the projector on doubly occupied states.
    B,
}

/// Charge dephasing at rate `1/T₂`; `T₂ = ∞` gives the zero operator.
pub fn dephasing_jump(t2: f64, layout: &ChargeLayout, variant: DephasingVariant) -> Result<JumpOperator> {
    if t2.is_nan() || t2 <= 0.0 {
        return Err(Error::InvalidT2(t2));
    }
    let mut diag = vec![0.0; layout.dim];
    if t2.is_finite() {
        let (on, off, scale) = match variant {
            DephasingVariant::A => (1.0, -1.0, (0.5 / t2).sqrt()),
            DephasingVariant::B => (1.0, 0.0, (2.0 / t2).sqrt()),
        };
        for (i, d) in diag.iter_mut().enumerate() {
            *d = scale * if layout.doubly_occupied.contains(&i) { on } else { off };
        }
    }
    JumpOperator::new(ComplexMatrix::from_diag(&diag), format!("dephasing_{variant:?}_t2={t2}"))
}

fn check_jumps(dim: usize, jumps: &[JumpOperator]) -> Result<()> {
    for j in jumps {
        if j.matrix.rows() != dim {
            return Err(Error::ShapeMismatch(format!(
                "jump {} is {}x{}, Hamiltonian is {dim}x{dim}",
                j.label,
                j.matrix.rows(),
                j.matrix.cols()
            )));
        }
    }
    Ok(())
}

/// Row-vectorized generator
/// `𝓛 = -i(H⊗I - I⊗Hᵀ) + Σ [L⊗L* - ½(L†L⊗I + I⊗(L†L)ᵀ)]`, so that
/// `vec(ρ̇) = 𝓛 vec(ρ)` with `vec` stacking rows.
pub fn lindblad_superoperator(h: &ComplexMatrix, jumps: &[JumpOperator]) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch("Hamiltonian must be square".into()));
    }
    let d = h.rows();
    check_jumps(d, jumps)?;
    let id = ComplexMatrix::identity(d);
    let mi = c64::new(0.0, -1.0);
    let out = (&kron(h, &id) - &kron(&id, &h.transpose())).scale(mi);
    Ok(&out + &dissipator(d, jumps)?)
}

/// `Σ [L⊗L* - ½(L†L⊗I + I⊗(L†L)ᵀ)]`.
fn dissipator(d: usize, jumps: &[JumpOperator]) -> Result<ComplexMatrix> {
    let id = ComplexMatrix::identity(d);
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for j in jumps {
        let l = &j.matrix;
        let ldl = l.dagger().matmul(l)?;
        out = &out + &kron(l, &l.conj());
        out = &out - &(&kron(&ldl, &id) + &kron(&id, &ldl.transpose())).scale_real(0.5);
    }
    Ok(out)
}

/// `(-i(H⊗I - I⊗Hᵀ) + D) dt` written into `out`.
fn fill_generator(h: &ComplexMatrix, diss: &ComplexMatrix, dt: f64, out: &mut ComplexMatrix) {
    let d = h.rows();
    let n = d * d;
    let dd = diss.as_slice();
    let o = out.as_mut_slice();
    for (k, v) in o.iter_mut().enumerate() {
        *v = dd[k] * dt;
    }
    let mi = c64::new(0.0, -dt);
    // row index (i, j) ↔ i*d + j; (H⊗I)[(i,j),(k,l)] = H_ik δ_jl, (I⊗Hᵀ)[(i,j),(k,l)] = δ_ik H_lj
    for i in 0..d {
        for j in 0..d {
            let r = i * d + j;
            for k in 0..d {
                o[r * n + k * d + j] += mi * h[(i, k)];
            }
            for l in 0..d {
                o[r * n + i * d + l] -= mi * h[(l, j)];
            }
        }
    }
}

/// `-i[H, ρ] + Σ (L ρ L† - ½{L†L, ρ})` evaluated directly.
pub fn lindblad_rhs(h: &ComplexMatrix, jumps: &[JumpOperator], rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_jumps(h.rows(), jumps)?;
    let mut out = h.commutator(rho).scale(c64::new(0.0, -1.0));
    for j in jumps {
        let l = &j.matrix;
        let ld = l.dagger();
        out = &out + &l.matmul(rho)?.matmul(&ld)?;
        out = &out - &ld.matmul(l)?.anticommutator(rho).scale_real(0.5);
    }
    Ok(out)
}

/// How `exp(𝓛 dt)` is applied each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LindbladMethod {
    /// Taylor series summed on the vector.
    #[default]
    Action,
    /// Dense scaling-and-squaring exponential of the superoperator.
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladOptions {
    pub steps: usize,
    pub method: LindbladMethod,
    /// Steps between positivity checks (the final state is always checked).
    pub check_every: usize,
    /// Store every n-th state (0 keeps only the final one).
    pub record_every: usize,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, method: LindbladMethod::Action, check_every: 200, record_every: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LindbladRun {
    pub rho: DensityMatrix,
    /// Largest `|tr ρ - 1|` seen.
    pub trace_drift: f64,
    /// Largest Hermiticity defect removed by symmetrization.
    pub hermiticity_drift: f64,
    /// Smallest eigenvalue of ρ seen at the checkpoints.
    pub min_eigenvalue: f64,
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// Steps `vec(ρ)` with `exp(𝓛(t_k + dt/2) dt)`, symmetrizing ρ after each
/// step.
pub fn propagate_lindblad(
    model: &dyn ParametricHamiltonian,
    schedule: &PulseSchedule,
    jumps: &[JumpOperator],
    rho0: &DensityMatrix,
    opts: &LindbladOptions,
) -> Result<LindbladRun> {
    single_parameter(model)?;
    check_steps(opts.steps)?;
    let d = model.dim();
    if rho0.dim() != d {
        return Err(Error::ShapeMismatch(format!("ρ has dimension {}, model {d}", rho0.dim())));
    }
    check_jumps(d, jumps)?;
    let mut v = vec_row(&rho0.entries);
    let mut scratch = ActionScratch::new(d * d);
    let diss = dissipator(d, jumps)?;
    let mut gen = ComplexMatrix::zeros(d * d, d * d);
    let mut run = LindbladRun {
        rho: rho0.clone(),
        trace_drift: 0.0,
        hermiticity_drift: 0.0,
        min_eigenvalue: rho0.min_eigenvalue()?,
        times: Vec::new(),
        states: Vec::new(),
    };
    if opts.record_every > 0 {
        run.times.push(0.0);
        run.states.push(rho0.clone());
    }
    for k in 0..opts.steps {
        let (dt, eps) = midpoint(schedule, opts.steps, k);
        fill_generator(&model.h_at(&[eps])?, &diss, dt, &mut gen);
        match opts.method {
            LindbladMethod::Action => expm_action_in_place(&gen, &mut v, &mut scratch),
            LindbladMethod::Dense => v = expm(&gen)?.mul_vec(&v),
        }
        // symmetrize in place on the row-stacked vector
        let mut defect: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let (a, b) = (v[i * d + j], v[j * d + i]);
                defect = defect.max((a - b.conj()).norm());
                let s = 0.5 * (a + b.conj());
                v[i * d + j] = s;
                v[j * d + i] = s.conj();
            }
        }
        run.hermiticity_drift = run.hermiticity_drift.max(defect);
        if defect > HERMITICITY_LIMIT {
            return Err(Error::HermiticityDrift(defect));
        }
        let last = k + 1 == opts.steps;
        let record = opts.record_every > 0 && ((k + 1) % opts.record_every == 0 || last);
        let check = last || (opts.check_every > 0 && (k + 1) % opts.check_every == 0);
        if record || check {
            let rho = DensityMatrix { entries: unvec_row(&v)? };
            run.trace_drift = run.trace_drift.max((rho.trace() - 1.0).abs());
            if check {
                let m = rho.min_eigenvalue()?;
                run.min_eigenvalue = run.min_eigenvalue.min(m);
                if m < -POSITIVITY_LIMIT {
                    return Err(Error::PositivityViolation { min_eigenvalue: m });
                }
            }
            if record {
                run.times.push((k + 1) as f64 * dt);
                run.states.push(rho.clone());
            }
            if last {
                run.rho = rho;
            }
        }
    }
    if run.trace_drift > 1e-12 || run.hermiticity_drift > 1e-12 {
        log::debug!("Lindblad drift: trace {:.3e}, hermiticity {:.3e}", run.trace_drift, run.hermiticity_drift);
    }
    Ok(run)
}

/// Starts in the instantaneous eigenstate `level` at `ε(0)` and returns the
/// final run together with `⟨ψ_level(t_f)|ρ(t_f)|ψ_level(t_f)⟩`.
pub fn lindblad_transfer_fidelity(
    model: &dyn ParametricHamiltonian,
    schedule: &PulseSchedule,
    jumps: &[JumpOperator],
    level: usize,
    opts: &LindbladOptions,
) -> Result<(f64, LindbladRun)> {
    single_parameter(model)?;
    let rho0 = instantaneous_state(model, schedule.eps(0.0), level)?.to_density();
    let run = propagate_lindblad(model, schedule, jumps, &rho0, opts)?;
    let target = instantaneous_state(model, schedule.eps(schedule.t_f), level)?;
    let f = pure_state_fidelity(&run.rho, &target)?;
    Ok((f, run))
}
