use std::collections::BTreeMap;
use std::sync::Arc;

use super::{check_mu, check_point, ParametricHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{c64, eigensystem, ComplexMatrix, EigenSystem};

const SUBSPACE_GAP_TOL: f64 = 1e-12;

/// Low-energy projection of a model onto its two lowest instantaneous
/// eigenstates.
///
/// At every point the Hamiltonian is expressed in its own eigenbasis
/// (`diag(E₀, E₁)`) and `∂H` is projected onto that same basis, so the metric
/// of the truncated model only sees the 0 ↔ 1 coupling.
pub struct TruncatedModel {
    inner: Arc<dyn ParametricHamiltonian>,
}

impl TruncatedModel {
    fn split(&self, x: &[f64]) -> Result<EigenSystem> {
        let es = eigensystem(&self.inner.h_at(x)?)?;
        check_subspace(&es)?;
        Ok(es)
    }

    pub fn inner(&self) -> &Arc<dyn ParametricHamiltonian> {
        &self.inner
    }
}

fn check_subspace(es: &EigenSystem) -> Result<()> {
    if es.dim() > 2 {
        let gap = es.values[2] - es.values[1];
        if gap <= SUBSPACE_GAP_TOL * es.spectral_norm() {
            return Err(Error::DegenerateSpectrum { level: 1, gap });
        }
    }
    Ok(())
}

/// Truncates `model` to its two lowest levels, checking at `x` that the
/// two-level subspace is well separated from the rest. Two-level models are
/// returned unchanged.
pub fn truncate_two_level(model: Arc<dyn ParametricHamiltonian>, x: &[f64]) -> Result<Arc<dyn ParametricHamiltonian>> {
    if model.dim() < 2 {
        return Err(Error::ShapeMismatch("truncation needs at least two levels".into()));
    }
    if model.dim() == 2 {
        return Ok(model);
    }
    check_point(model.as_ref(), x)?;
    check_subspace(&eigensystem(&model.h_at(x)?)?)?;
    Ok(Arc::new(TruncatedModel { inner: model }))
}

impl ParametricHamiltonian for TruncatedModel {
    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        self.inner.param_names()
    }

    fn fixed_params(&self) -> BTreeMap<String, f64> {
        self.inner.fixed_params()
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        let es = self.split(x)?;
        Ok(ComplexMatrix::from_diag(&es.values[..2]))
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        check_mu(self, mu)?;
        let es = self.split(x)?;
        let dh = self.inner.dh_at(x, mu)?;
        let v = [es.vector(0), es.vector(1)];
        let mut out = ComplexMatrix::zeros(2, 2);
        for n in 0..2 {
            for m in 0..2 {
                out[(n, m)] = dh.sandwich(&v[n], &v[m]);
            }
        }
        for n in 0..2 {
            out[(n, n)] = c64::new(out[(n, n)].re, 0.0);
        }
        Ok(out)
    }

    fn basis_labels(&self) -> Vec<String> {
        vec!["E0".into(), "E1".into()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Dqd6, DqdParams, FiniteDifferenceModel, PauliMode, PauliModel};

    #[test]
    fn diagonal_three_level() {
        let m: Arc<dyn ParametricHamiltonian> =
            Arc::new(FiniteDifferenceModel::new(3, vec!["x".into()], |x: &[f64]| {
                ComplexMatrix::from_diag(&[0.0, 1.0 + 0.0 * x[0], 10.0])
            }));
        let t = truncate_two_level(m, &[0.0]).unwrap();
        let h = t.h_at(&[0.0]).unwrap();
        assert!(h.max_abs_diff(&ComplexMatrix::from_diag(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn gap_matches_full_model() {
        let full: Arc<dyn ParametricHamiltonian> = Arc::new(Dqd6::new(DqdParams::six_level_default()).unwrap());
        let x = [150.0];
        let t = truncate_two_level(full.clone(), &x).unwrap();
        for eps in [148.0, 150.0, 152.5] {
            let es = eigensystem(&full.h_at(&[eps]).unwrap()).unwrap();
            let h2 = t.h_at(&[eps]).unwrap();
            let gap2 = h2[(1, 1)].re - h2[(0, 0)].re;
            assert!((gap2 - (es.values[1] - es.values[0])).abs() < 1e-9);
        }
    }

    #[test]
    fn two_level_model_is_unchanged() {
        let m: Arc<dyn ParametricHamiltonian> = Arc::new(PauliModel::new(PauliMode::Cylindrical));
        let t = truncate_two_level(m.clone(), &[0.3, 0.2, 0.1]).unwrap();
        let x = [0.7, -0.4, 0.9];
        assert!(t.h_at(&x).unwrap().max_abs_diff(&m.h_at(&x).unwrap()) < 1e-12);
    }

    #[test]
    fn projected_derivative_is_hermitian() {
        let full: Arc<dyn ParametricHamiltonian> = Arc::new(Dqd6::new(DqdParams::six_level_default()).unwrap());
        let t = truncate_two_level(full, &[110.0]).unwrap();
        let d = t.dh_at(&[110.0], 0).unwrap();
        assert!(d.hermiticity_deviation() < 1e-14);
    }

    #[test]
    fn degenerate_subspace_is_refused() {
        let m: Arc<dyn ParametricHamiltonian> =
            Arc::new(FiniteDifferenceModel::new(3, vec!["x".into()], |_: &[f64]| {
                ComplexMatrix::from_diag(&[0.0, 1.0, 1.0])
            }));
        assert!(matches!(truncate_two_level(m, &[0.0]), Err(Error::DegenerateSpectrum { .. })));
    }
}
