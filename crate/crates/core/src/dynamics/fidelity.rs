use super::{DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{c64, eigensystem};

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::ShapeMismatch(format!("fidelity of {}- and {}-level states", rho.dim(), sigma.dim())));
    }
    let sqrt_rho = eigensystem(&rho.entries.hermitian_part())?.apply_fn(|e| c64::new(e.max(0.0).sqrt(), 0.0));
    let inner = sqrt_rho.matmul(&sigma.entries)?.matmul(&sqrt_rho)?.hermitian_part();
    let values = eigensystem(&inner)?.values;
    // eigenvalues at rounding level would add O(1e-8) through the square root
    let floor = 1e-13 * values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let root_trace: f64 = values.iter().filter(|&&e| e > floor).map(|e| e.sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Uhlmann fidelity against a pure state, `⟨ψ|ρ|ψ⟩`.
pub fn pure_state_fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::ShapeMismatch(format!(
            "fidelity of {}-level state with {}-level vector",
            rho.dim(),
            psi.dim()
        )));
    }
    Ok(rho.entries.sandwich(&psi.amplitudes, &psi.amplitudes).re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, ComplexMatrix};
    use rand::{Rng, SeedableRng};

    fn random_rho(rng: &mut impl Rng, n: usize) -> DensityMatrix {
        let a: Vec<c64> = (0..n * n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let a = ComplexMatrix::from_vec(n, n, a).unwrap();
        let m = a.matmul(&a.dagger()).unwrap();
        let tr = m.trace().re;
        DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part()).unwrap()
    }

    fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
        let v: Vec<c64> = (0..n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = norm(&v);
        StateVector::new(v.iter().map(|z| z / s).collect()).unwrap()
    }

    #[test]
    fn self_fidelity_is_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let r = random_rho(&mut rng, 3);
            assert!((uhlmann_fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_pure_states() {
        let a = StateVector::basis(3, 0).to_density();
        let b = StateVector::basis(3, 2).to_density();
        assert!(uhlmann_fidelity(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn rank_one_shortcut_matches_general_formula() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let r = random_rho(&mut rng, 3);
            let psi = random_state(&mut rng, 3);
            let a = uhlmann_fidelity(&r, &psi.to_density()).unwrap();
            let b = pure_state_fidelity(&r, &psi).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}
