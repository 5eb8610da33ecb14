use super::eigen::eigensystem;
use super::matrix::{c64, ComplexMatrix};
use crate::error::{Error, Result};

const TAYLOR_MAX_TERMS: usize = 40;

/// `exp(-i H dt)` for Hermitian `H`, through its eigendecomposition.
pub fn expm_unitary(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    let es = eigensystem(h)?;
    Ok(es.apply_fn(|e| c64::from_polar(1.0, -e * dt)))
}

/// General matrix exponential by scaling and squaring around a Taylor core.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("expm needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.scale_real(0.5f64.powi(squarings));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=TAYLOR_MAX_TERMS {
        term = (&term * &b).scale_real(1.0 / k as f64);
        result = &result + &term;
        if term.norm_one() <= 1e-18 * result.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// `exp(A) v` without forming `exp(A)`: the Taylor series is summed on the
/// vector over enough sub-steps that each has `‖A‖/m ≤ 1/2`.
pub fn expm_action(a: &ComplexMatrix, v: &[c64]) -> Vec<c64> {
    let mut out = v.to_vec();
    let mut scratch = ActionScratch::new(v.len());
    expm_action_in_place(a, &mut out, &mut scratch);
    out
}

pub(crate) struct ActionScratch {
    term: Vec<c64>,
    next: Vec<c64>,
}

impl ActionScratch {
    pub(crate) fn new(n: usize) -> Self {
        Self { term: vec![c64::new(0.0, 0.0); n], next: vec![c64::new(0.0, 0.0); n] }
    }
}

pub(crate) fn expm_action_in_place(a: &ComplexMatrix, v: &mut [c64], s: &mut ActionScratch) {
    let n = v.len();
    let norm = a.norm_one();
    let substeps = ((norm / 0.5).ceil() as usize).max(1);
    let inv_m = 1.0 / substeps as f64;
    let data = a.as_slice();
    for _ in 0..substeps {
        s.term.copy_from_slice(v);
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for k in 1..=TAYLOR_MAX_TERMS {
            let f = inv_m / k as f64;
            for (i, row) in data.chunks_exact(n).enumerate() {
                let acc: c64 = row.iter().zip(&s.term).map(|(x, y)| x * y).sum();
                s.next[i] = acc * f;
            }
            std::mem::swap(&mut s.term, &mut s.next);
            let mut tnorm = 0.0;
            for (vi, ti) in v.iter_mut().zip(&s.term) {
                *vi += ti;
                tnorm += ti.norm_sqr();
            }
            if tnorm.sqrt() <= 1e-18 * vnorm.max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
}
