use super::{check_level, GeoTensor};
use crate::error::{Error, Result};
use crate::linalg::{eigensystem, infidelity, ComplexMatrix};
use crate::models::ParametricHamiltonian;

/// Step, relative to `gap / ‖∂_μH‖`, for projector differences.
const TANGENT_STEP: f64 = 1e-2;

fn projector(model: &dyn ParametricHamiltonian, x: &[f64], level: usize) -> Result<ComplexMatrix> {
    let es = eigensystem(&model.h_at(x)?)?;
    check_level(&es, level)?;
    Ok(ComplexMatrix::outer(&es.vector(level)))
}

fn shifted(x: &[f64], mu: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[mu] += h;
    y
}

/// Geometric tensor from the projector `P = |ψ⟩⟨ψ|`: with tangents
/// `t_μ = ∂_μP` (Richardson-extrapolated central differences),
/// `q_μν = tr(P t_μ t_ν)`, so `g_μν = ½ tr(t_μ t_ν)`.
pub fn qgt_tangent(model: &dyn ParametricHamiltonian, x: &[f64], level: usize) -> Result<GeoTensor> {
    let es = eigensystem(&model.h_at(x)?)?;
    check_level(&es, level)?;
    let gap = es.gap(level);
    let p0 = ComplexMatrix::outer(&es.vector(level));
    let n = model.num_params();

    let mut tangents = Vec::with_capacity(n);
    for mu in 0..n {
        let speed = model.dh_at(x, mu)?.frobenius_norm();
        if speed == 0.0 {
            tangents.push(ComplexMatrix::zeros(es.dim(), es.dim()));
            continue;
        }
        let h = TANGENT_STEP * gap / speed;
        let central = |h: f64| -> Result<ComplexMatrix> {
            let plus = projector(model, &shifted(x, mu, h), level)?;
            let minus = projector(model, &shifted(x, mu, -h), level)?;
            Ok((&plus - &minus).scale_real(0.5 / h))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        tangents.push((&fine.scale_real(4.0) - &coarse).scale_real(1.0 / 3.0));
    }

    let mut gt = GeoTensor::zeros(n, level, x);
    for mu in 0..n {
        let pt = p0.matmul(&tangents[mu])?;
        for nu in mu..n {
            let q = pt.matmul(&tangents[nu])?.trace();
            let g = 0.5 * tangents[mu].matmul(&tangents[nu])?.trace().re;
            gt.g[mu][nu] = g;
            gt.g[nu][mu] = g;
            if mu != nu {
                gt.berry[mu][nu] = q.im;
                gt.berry[nu][mu] = -q.im;
            }
        }
    }
    Ok(gt)
}

/// Overlap estimate of `g_μν d̂^μ d̂^ν` along `dx`:
/// `(1 - |⟨ψ(x - dx/2)|ψ(x + dx/2)⟩|²) / ‖dx‖²`.
pub fn qgt_fd_oracle(model: &dyn ParametricHamiltonian, x: &[f64], dx: &[f64], level: usize) -> Result<f64> {
    if dx.len() != x.len() {
        return Err(Error::ShapeMismatch(format!("step has {} components, point has {}", dx.len(), x.len())));
    }
    let norm2: f64 = dx.iter().map(|d| d * d).sum();
    if !(norm2 > 0.0) {
        return Err(Error::InvalidParameter("finite-difference step must be nonzero".into()));
    }
    let at = |s: f64| -> Result<Vec<_>> {
        let y: Vec<f64> = x.iter().zip(dx).map(|(a, d)| a + s * d).collect();
        let es = eigensystem(&model.h_at(&y)?)?;
        check_level(&es, level)?;
        Ok(es.vector(level))
    };
    Ok(infidelity(&at(-0.5)?, &at(0.5)?) / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::qgt_spectral;
    use crate::models::{Dqd3, Dqd6, DqdParams, FiniteDifferenceModel, PauliMode, PauliModel, Sw2};
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    #[test]
    fn bloch_equator() {
        let m = PauliModel::new(PauliMode::Bloch);
        let gt = qgt_tangent(&m, &[std::f64::consts::FRAC_PI_2, 0.3], 0).unwrap();
        assert!((gt.g[0][0] - 0.25).abs() < 1e-9);
        assert!((gt.g[1][1] - 0.25).abs() < 1e-9);
        assert!(gt.g[0][1].abs() < 1e-9);
    }

    #[test]
    fn constant_model_is_flat() {
        let m = FiniteDifferenceModel::new(2, vec!["a".into()], |_: &[f64]| ComplexMatrix::from_diag(&[0.0, 1.0]));
        let gt = qgt_tangent(&m, &[0.4], 0).unwrap();
        assert_eq!(gt.g[0][0], 0.0);
    }

    #[test]
    fn oracle_on_bloch_theta() {
        let m = PauliModel::new(PauliMode::Bloch);
        let v = qgt_fd_oracle(&m, &[1.1, 0.2], &[1e-3, 0.0], 0).unwrap();
        assert!((v - 0.25).abs() < 1e-6);
    }

    #[test]
    fn oracle_on_commuting_direction() {
        let m = PauliModel::new(PauliMode::RhoZ { phi: 0.0 });
        let v = qgt_fd_oracle(&m, &[0.0, 1.0], &[0.0, 1e-3], 0).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn oracle_near_anticrossing_with_richardson() {
        let m = Dqd3::new(DqdParams::three_level_default()).unwrap();
        for eps in [95.0, 105.0] {
            let g = qgt_spectral(&m, &[eps], 0).unwrap().g[0][0];
            let a = qgt_fd_oracle(&m, &[eps], &[2e-2], 0).unwrap();
            let b = qgt_fd_oracle(&m, &[eps], &[1e-2], 0).unwrap();
            let r = (4.0 * b - a) / 3.0;
            assert!((b - g).abs() < 1e-4 * g, "{b} vs {g}");
            assert!((r - g).abs() <= (b - g).abs().max(1e-9 * g));
        }
    }

    #[test]
    fn dqd6_tangent_matches_spectral() {
        let m = Dqd6::new(DqdParams::six_level_default()).unwrap();
        let a = qgt_spectral(&m, &[150.0], 0).unwrap().g[0][0];
        let b = qgt_tangent(&m, &[150.0], 0).unwrap().g[0][0];
        assert!((a - b).abs() < 1e-6 * a);
    }

    fn zoo() -> Vec<(Arc<dyn ParametricHamiltonian>, Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> Vec<f64>>)> {
        let three = Arc::new(Dqd3::new(DqdParams::three_level_default()).unwrap()) as Arc<dyn ParametricHamiltonian>;
        let six = Arc::new(Dqd6::new(DqdParams::six_level_default()).unwrap()) as Arc<dyn ParametricHamiltonian>;
        // the truncated model is left out: its h_at is diagonal in a moving
        // basis, so only the spectral form sees its geometry
        vec![
            (
                Arc::new(PauliModel::new(PauliMode::Cylindrical)),
                Box::new(|r| vec![r.gen_range(0.1..3.0), r.gen_range(-3.0..3.0), r.gen_range(-2.0..2.0)]),
            ),
            (
                Arc::new(PauliModel::new(PauliMode::Bloch)),
                Box::new(|r| vec![r.gen_range(0.1..3.0), r.gen_range(-3.0..3.0)]),
            ),
            (
                Arc::new(PauliModel::new(PauliMode::RhoOnly { phi: 0.0, z: 0.1 })),
                Box::new(|r| vec![r.gen_range(-10.0..10.0)]),
            ),
            (three, Box::new(|r| vec![r.gen_range(0.0..200.0)])),
            (six, Box::new(|r| vec![r.gen_range(95.0..200.0)])),
            (Arc::new(Sw2::new(10.0, 1.0).unwrap()), Box::new(|r| vec![r.gen_range(-50.0..50.0)])),
        ]
    }

    #[test]
    fn spectral_and_tangent_agree_across_zoo() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (model, sample) in zoo() {
            for _ in 0..20 {
                let x = sample(&mut rng);
                let a = qgt_spectral(model.as_ref(), &x, 0).unwrap();
                let b = qgt_tangent(model.as_ref(), &x, 0).unwrap();
                let scale = a.scale();
                for i in 0..x.len() {
                    for j in 0..x.len() {
                        assert!((a.g[i][j] - b.g[i][j]).abs() <= 1e-6 * scale, "{x:?} g[{i}][{j}]");
                        assert!((a.berry[i][j] - b.berry[i][j]).abs() <= 1e-6 * scale, "{x:?} berry[{i}][{j}]");
                    }
                }
                assert!(a.min_eigenvalue() >= -1e-10 * scale.max(1.0));
                assert!(a.symmetry_defect() <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
